#include "stlncs/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stlncs/plant.hpp"
#include "stlncs/stl.hpp"

namespace stlncs {

Ablation ablation_from_string(const std::string& name) {
  if (name == "none" || name.empty()) return Ablation::None;
  if (name == "tau-mdp") return Ablation::TauMdp;
  if (name == "no-preprocess") return Ablation::NoPreprocess;
  throw std::invalid_argument("unknown ablation '" + name + "' (expected tau-mdp or no-preprocess)");
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::None:
      return "none";
    case Ablation::TauMdp:
      return "tau-mdp";
    case Ablation::NoPreprocess:
      return "no-preprocess";
  }
  return "none";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

long to_long(const std::string& v, const std::string& key) {
  long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw std::invalid_argument("config key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<double> to_vector(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string item;
  while (ss >> item) out.push_back(to_double(item, key));
  return out;
}

std::vector<int> to_int_vector(const std::string& v, const std::string& key) {
  std::vector<int> out;
  for (double d : to_vector(v, key)) out.push_back(static_cast<int>(d));
  return out;
}

}  // namespace

TrainerConfig parse_config(const std::string& text) {
  TrainerConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(line_no) + ": unclosed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qualified = section.empty() ? key : section + "." + key;

    if (qualified == "spec.formula") {
      cfg.spec.formula = value;
    } else if (qualified == "spec.beta") {
      cfg.spec.beta = to_double(value, qualified);
    } else if (qualified == "plant.name") {
      cfg.plant.name = value;
    } else if (qualified == "plant.delta") {
      cfg.plant.delta = to_double(value, qualified);
    } else if (qualified == "plant.noise") {
      cfg.plant.noise = to_double(value, qualified);
    } else if (qualified == "plant.init_low") {
      cfg.plant.init_low = to_vector(value, qualified);
    } else if (qualified == "plant.init_high") {
      cfg.plant.init_high = to_vector(value, qualified);
    } else if (qualified == "plant.action_low") {
      cfg.plant.action_low = to_vector(value, qualified);
    } else if (qualified == "plant.action_high") {
      cfg.plant.action_high = to_vector(value, qualified);
    } else if (qualified == "plant.norm_offset") {
      cfg.plant.norm_offset = to_vector(value, qualified);
    } else if (qualified == "delays.d_sc") {
      cfg.delays.d_sc = static_cast<int>(to_long(value, qualified));
    } else if (qualified == "delays.d_ca") {
      cfg.delays.d_ca = static_cast<int>(to_long(value, qualified));
    } else if (qualified == "delays.d_sc_max") {
      cfg.delays.d_sc_max = static_cast<int>(to_long(value, qualified));
    } else if (qualified == "delays.d_ca_max") {
      cfg.delays.d_ca_max = static_cast<int>(to_long(value, qualified));
    } else if (qualified == "delays.hold_until_max") {
      cfg.delays.hold_until_max = to_bool(value, qualified);
    } else if (qualified == "sac.gamma") {
      cfg.sac.gamma = to_double(value, qualified);
    } else if (qualified == "sac.xi") {
      cfg.sac.xi = to_double(value, qualified);
    } else if (qualified == "sac.lr") {
      cfg.sac.lr = to_double(value, qualified);
    } else if (qualified == "sac.capacity") {
      cfg.sac.capacity = static_cast<int>(to_long(value, qualified));
    } else if (qualified == "sac.batch_size") {
      cfg.sac.batch_size = static_cast<int>(to_long(value, qualified));
    } else if (qualified == "sac.target_entropy") {
      cfg.sac.target_entropy = to_double(value, qualified);
    } else if (qualified == "sac.initial_alpha") {
      cfg.sac.initial_alpha = to_double(value, qualified);
    } else if (qualified == "sac.hidden") {
      cfg.sac.hidden = to_int_vector(value, qualified);
    } else if (qualified == "sac.total_steps") {
      cfg.total_steps = to_long(value, qualified);
    } else if (qualified == "eval.cadence") {
      cfg.eval.cadence = to_long(value, qualified);
    } else if (qualified == "eval.trajectories") {
      cfg.eval.trajectories = static_cast<int>(to_long(value, qualified));
    } else if (qualified == "eval.resample") {
      cfg.eval.resample = to_bool(value, qualified);
    } else if (qualified == "run.seed") {
      cfg.seed = static_cast<std::uint64_t>(to_long(value, qualified));
    } else if (qualified == "run.out_dir") {
      cfg.out_dir = value;
    } else if (qualified == "run.ablation") {
      cfg.ablation = ablation_from_string(value);
    } else if (qualified == "run.trace_episodes") {
      cfg.trace_episodes = to_bool(value, qualified);
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + qualified + "'");
    }
  }
  return cfg;
}

TrainerConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

namespace {

std::string join(const std::vector<double>& v) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) ss << ' ';
    ss << v[i];
  }
  return ss.str();
}

}  // namespace

std::string dump_config(const TrainerConfig& c) {
  std::ostringstream ss;
  ss << "[spec]\n";
  ss << "formula = " << c.spec.formula << "\n";
  ss << "beta = " << c.spec.beta << "\n\n";
  ss << "[plant]\n";
  ss << "name = " << c.plant.name << "\n";
  ss << "delta = " << c.plant.delta << "\n";
  ss << "noise = " << c.plant.noise << "\n";
  if (!c.plant.init_low.empty()) ss << "init_low = " << join(c.plant.init_low) << "\n";
  if (!c.plant.init_high.empty()) ss << "init_high = " << join(c.plant.init_high) << "\n";
  if (!c.plant.action_low.empty()) ss << "action_low = " << join(c.plant.action_low) << "\n";
  if (!c.plant.action_high.empty()) ss << "action_high = " << join(c.plant.action_high) << "\n";
  if (!c.plant.norm_offset.empty()) ss << "norm_offset = " << join(c.plant.norm_offset) << "\n";
  ss << "\n[delays]\n";
  ss << "d_sc = " << c.delays.d_sc << "\n";
  ss << "d_ca = " << c.delays.d_ca << "\n";
  ss << "d_sc_max = " << c.delays.d_sc_max << "\n";
  ss << "d_ca_max = " << c.delays.d_ca_max << "\n";
  ss << "hold_until_max = " << (c.delays.hold_until_max ? "true" : "false") << "\n";
  ss << "\n[sac]\n";
  ss << "gamma = " << c.sac.gamma << "\n";
  ss << "xi = " << c.sac.xi << "\n";
  ss << "lr = " << c.sac.lr << "\n";
  ss << "capacity = " << c.sac.capacity << "\n";
  ss << "batch_size = " << c.sac.batch_size << "\n";
  ss << "target_entropy = " << c.sac.target_entropy << "\n";
  ss << "initial_alpha = " << c.sac.initial_alpha << "\n";
  ss << "hidden =";
  for (int h : c.sac.hidden) ss << ' ' << h;
  ss << "\n";
  ss << "total_steps = " << c.total_steps << "\n";
  ss << "\n[eval]\n";
  ss << "cadence = " << c.eval.cadence << "\n";
  ss << "trajectories = " << c.eval.trajectories << "\n";
  ss << "resample = " << (c.eval.resample ? "true" : "false") << "\n";
  ss << "\n[run]\n";
  ss << "seed = " << c.seed << "\n";
  ss << "out_dir = " << c.out_dir << "\n";
  ss << "ablation = " << to_string(c.ablation) << "\n";
  ss << "trace_episodes = " << (c.trace_episodes ? "true" : "false") << "\n";
  return ss.str();
}

std::vector<std::string> validate_config(const TrainerConfig& c) {
  std::vector<std::string> warnings;
  const PlantModel plant = make_plant(c.plant.name, c.plant.delta, c.plant.noise);
  const Spec spec = parse_stl(c.spec.formula, plant.n_x);
  if (c.spec.beta <= 0.0) throw std::invalid_argument("spec.beta must be positive");
  c.delays.validate();
  if (c.sac.gamma < 0.0 || c.sac.gamma >= 1.0) throw std::invalid_argument("sac.gamma must lie in [0, 1)");
  if (c.sac.xi <= 0.0 || c.sac.xi > 1.0) throw std::invalid_argument("sac.xi must lie in (0, 1]");
  if (c.sac.lr <= 0.0) throw std::invalid_argument("sac.lr must be positive");
  if (c.sac.capacity <= 0) throw std::invalid_argument("sac.capacity must be positive");
  if (c.sac.batch_size <= 0) throw std::invalid_argument("sac.batch_size must be positive");
  if (c.sac.initial_alpha <= 0.0) throw std::invalid_argument("sac.initial_alpha must be positive");
  if (c.sac.hidden.empty()) throw std::invalid_argument("sac.hidden must name at least one layer");
  if (c.total_steps <= 0) throw std::invalid_argument("sac.total_steps must be positive");
  if (c.eval.cadence <= 0) throw std::invalid_argument("eval.cadence must be positive");
  if (c.eval.trajectories <= 0) throw std::invalid_argument("eval.trajectories must be positive");
  if (spec.outer_op == TemporalOp::Finally && c.spec.beta > 30.0)
    warnings.push_back("finally-outer specification with beta = " + std::to_string(c.spec.beta) +
                       ": rewards reach exp(beta), which is numerically violent; consider a smaller beta");
  if (spec.total_horizon + 1 > c.total_steps)
    warnings.push_back("total_steps is shorter than a single episode; no episode will finish");
  return warnings;
}

}  // namespace stlncs
