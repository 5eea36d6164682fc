#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stlncs/harness.hpp"

namespace {

// Accepts a header naming x<i> columns or plain numeric rows.
stlncs::Trace load_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open trace file '" + path + "'");
  std::vector<int> state_columns;
  std::vector<std::vector<double>> states;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      first = false;
      bool header = false;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].empty() && cells[i][0] == 'x') {
          state_columns.push_back(static_cast<int>(i));
          header = true;
        }
      }
      if (header) continue;
      for (std::size_t i = 0; i < cells.size(); ++i) state_columns.push_back(static_cast<int>(i));
    }
    std::vector<double> x;
    for (int c : state_columns) {
      if (c >= static_cast<int>(cells.size())) throw std::runtime_error("short row in trace file");
      x.push_back(std::stod(cells[c]));
    }
    states.push_back(std::move(x));
  }
  return stlncs::Trace::from_states(states);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked STL controller synthesis"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ablation, checkpoint, spec_text, trace_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  long steps_override = -1;
  int eval_n = 100;
  int monitor_at = 0;

  auto* train = app.add_subcommand("train", "Train a networked controller");
  train->add_option("--config", config_path, "Config file")->required();
  train->add_option("--seed", seed, "Random seed")->each([&](const std::string&) { seed_given = true; });
  train->add_option("--ablation", ablation, "tau-mdp or no-preprocess");
  train->add_option("--out", out_dir, "Output directory");
  train->add_option("--steps", steps_override, "Override the training step budget");

  auto* eval = app.add_subcommand("eval", "Evaluate a saved policy");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  eval->add_option("--config", config_path, "Config file")->required();
  eval->add_option("-n", eval_n, "Number of evaluation trajectories");
  eval->add_option("--seed", seed, "Random seed")->each([&](const std::string&) { seed_given = true; });

  auto* monitor = app.add_subcommand("monitor", "Check a trace against a specification");
  monitor->add_option("--spec", spec_text, "STL formula")->required();
  monitor->add_option("--trace", trace_path, "CSV trace file")->required();
  monitor->add_option("--at", monitor_at, "Evaluation time index");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      stlncs::TrainerConfig config = stlncs::load_config(config_path);
      if (seed_given) config.seed = seed;
      if (!ablation.empty()) config.ablation = stlncs::ablation_from_string(ablation);
      if (!out_dir.empty()) config.out_dir = out_dir;
      if (steps_override > 0) config.total_steps = steps_override;
      for (const auto& w : stlncs::validate_config(config)) std::cerr << "warning: " << w << "\n";
      const stlncs::TrainResult result = stlncs::run_training(config);
      const auto& last = result.reports.back();
      std::cout << "trained " << result.steps << " steps over " << result.episodes << " episodes\n";
      std::cout << "final mean return " << last.mean_return << ", success rate " << last.success_rate << "\n";
      std::cout << "metrics: " << result.metrics_csv << "\n";
      std::cout << "checkpoint: " << result.checkpoint_dir << "\n";
    } else if (*eval) {
      stlncs::TrainerConfig config = stlncs::load_config(config_path);
      if (seed_given) config.seed = seed;
      const stlncs::EvalReport report = stlncs::evaluate_checkpoint(config, checkpoint, eval_n);
      std::cout << "trajectories: " << eval_n << "\n";
      std::cout << "mean return: " << report.mean_return << "\n";
      std::cout << "success rate: " << report.success_rate << "\n";
    } else if (*monitor) {
      const stlncs::Trace trace = load_trace_csv(trace_path);
      const stlncs::Spec spec = stlncs::parse_stl(spec_text, trace.dim());
      const double rho = stlncs::robustness(trace, monitor_at, spec);
      const bool sat = stlncs::satisfies(trace, monitor_at, spec);
      std::cout << "robustness: " << rho << "\n";
      std::cout << "satisfied: " << (sat ? "true" : "false") << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
