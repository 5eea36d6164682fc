#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stlncs/harness.hpp"

namespace py = pybind11;
using namespace stlncs;

namespace {

Trace trace_from_lists(const std::vector<std::vector<double>>& states) { return Trace::from_states(states); }

std::vector<std::vector<double>> trace_states(const Trace& trace) {
  std::vector<std::vector<double>> out;
  for (int t = 0; t < trace.length(); ++t) {
    const auto s = trace.state(t);
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Networked STL controller synthesis core";

  py::enum_<TemporalOp>(m, "TemporalOp").value("Globally", TemporalOp::Globally).value("Finally", TemporalOp::Finally);

  py::class_<Predicate>(m, "Predicate")
      .def(py::init<>())
      .def_readwrite("coeffs", &Predicate::coeffs)
      .def_readwrite("bound", &Predicate::bound)
      .def("__repr__", [](const Predicate& p) { return to_string(p); });

  py::class_<SubFormula>(m, "SubFormula")
      .def_readonly("op", &SubFormula::op)
      .def_readonly("t_start", &SubFormula::t_start)
      .def_readonly("t_end", &SubFormula::t_end)
      .def("__repr__", [](const SubFormula& f) { return to_string(f); });

  py::class_<Phi>(m, "Phi").def_property_readonly("subs", [](const Phi& phi) { return decompose(phi); });

  py::class_<Spec>(m, "Spec")
      .def_readonly("outer_op", &Spec::outer_op)
      .def_readonly("horizon_end", &Spec::horizon_end)
      .def_readonly("tau", &Spec::tau)
      .def_readonly("total_horizon", &Spec::total_horizon)
      .def_readonly("phi", &Spec::phi)
      .def_property_readonly("sub_count", [](const Spec& s) { return s.phi.subs.size(); })
      .def("__repr__", [](const Spec& s) { return to_string(s); });

  py::class_<Trace>(m, "Trace")
      .def(py::init(&trace_from_lists), py::arg("states"))
      .def_property_readonly("dim", &Trace::dim)
      .def_property_readonly("length", &Trace::length)
      .def("states", &trace_states);

  m.def("parse_stl", &parse_stl, py::arg("text"), py::arg("n_x"));
  m.def("spec_to_string", [](const Spec& s) { return to_string(s); });
  m.def("horizon", [](const Spec& s) { return horizon(s); });
  m.def("satisfies", [](const Trace& tr, int t, const Spec& s) { return satisfies(tr, t, s); }, py::arg("trace"),
        py::arg("t"), py::arg("spec"));
  m.def("robustness", [](const Trace& tr, int t, const Spec& s) { return robustness(tr, t, s); }, py::arg("trace"),
        py::arg("t"), py::arg("spec"));
  m.def("flag_value", &flag_value, py::arg("window"), py::arg("sub"));
  m.def("transform_flag", &transform_flag);

  py::class_<ExtendedState>(m, "ExtendedState")
      .def_property_readonly("tau", &ExtendedState::tau)
      .def_property_readonly("d", [](const ExtendedState& z) { return z.d; })
      .def_property_readonly("window", [](const ExtendedState& z) { return trace_states(z.window); })
      .def_property_readonly("history", [](const ExtendedState& z) { return z.history; })
      .def("flatten", [](const ExtendedState& z) { return flatten(z); });

  m.def("init_extended",
        [](const std::vector<double>& x0, int tau, int d, int n_u) { return init_extended(x0, tau, d, n_u); },
        py::arg("x0"), py::arg("tau"), py::arg("d"), py::arg("n_u"));
  m.def("advance_extended",
        [](const ExtendedState& z, const std::vector<double>& x, const std::vector<double>& a) {
          return advance_extended(z, x, a);
        },
        py::arg("z"), py::arg("new_x"), py::arg("new_a"));
  m.def("reward",
        [](const ExtendedState& z, const Spec& spec, double beta) {
          return reward(z, spec.phi, RewardParams{beta, spec.outer_op});
        },
        py::arg("z"), py::arg("spec"), py::arg("beta") = 100.0);
  m.def("preprocess_state",
        [](const ExtendedState& z, const Spec& spec) { return flatten(preprocess_state(z, decompose(spec.phi))); },
        py::arg("z"), py::arg("spec"));

  py::class_<PlantModel>(m, "PlantModel")
      .def_readonly("name", &PlantModel::name)
      .def_readonly("n_x", &PlantModel::n_x)
      .def_readonly("n_u", &PlantModel::n_u)
      .def_readwrite("init_low", &PlantModel::init_low)
      .def_readwrite("init_high", &PlantModel::init_high)
      .def_readwrite("action_low", &PlantModel::action_low)
      .def_readwrite("action_high", &PlantModel::action_high);

  py::class_<RngStream>(m, "RngStream").def(py::init<std::uint64_t>(), py::arg("seed"));

  m.def("make_plant", &make_plant, py::arg("name"), py::arg("delta") = 0.1, py::arg("noise") = 0.01);
  m.def("sample_initial", [](const PlantModel& p, RngStream& rng) { return sample_initial(p, rng); });
  m.def("plant_step",
        [](const PlantModel& p, const std::vector<double>& x, const std::vector<double>& u, RngStream& rng) {
          return step(p, x, u, rng);
        },
        py::arg("plant"), py::arg("x"), py::arg("u"), py::arg("rng"));

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("step", &EvalReport::step)
      .def_readonly("mean_return", &EvalReport::mean_return)
      .def_readonly("success_rate", &EvalReport::success_rate)
      .def_readonly("returns", &EvalReport::returns)
      .def_readonly("successes", &EvalReport::successes);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("steps", &TrainResult::steps)
      .def_readonly("episodes", &TrainResult::episodes)
      .def_readonly("metrics_csv", &TrainResult::metrics_csv)
      .def_readonly("metrics_svg", &TrainResult::metrics_svg)
      .def_readonly("checkpoint_dir", &TrainResult::checkpoint_dir)
      .def_property_readonly("reports", [](const TrainResult& r) { return r.reports; });

  m.def("run_training",
        [](const std::string& config_text) { return run_training(parse_config(config_text)); },
        py::arg("config_text"), py::call_guard<py::gil_scoped_release>());
  m.def("run_training_file", [](const std::string& path) { return run_training(load_config(path)); },
        py::arg("config_path"), py::call_guard<py::gil_scoped_release>());
  m.def("evaluate_checkpoint",
        [](const std::string& config_text, const std::string& checkpoint_dir, int n) {
          return evaluate_checkpoint(parse_config(config_text), checkpoint_dir, n);
        },
        py::arg("config_text"), py::arg("checkpoint_dir"), py::arg("n") = 100,
        py::call_guard<py::gil_scoped_release>());
}
