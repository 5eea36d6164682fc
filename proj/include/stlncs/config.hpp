#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stlncs/ncs.hpp"
#include "stlncs/sac.hpp"

namespace stlncs {

enum class Ablation {
  None,          // flag preprocessing plus action history
  TauMdp,        // drop the action history from the network input
  NoPreprocess,  // feed the flattened extended state instead of flags
};

Ablation ablation_from_string(const std::string& name);
std::string to_string(Ablation a);

struct SpecSection {
  std::string formula =
      "G[0,900](F[0,99](x0>=3.75 && x0<=5 && x1>=3.75 && x1<=5) && "
      "F[0,99](x0>=3.75 && x0<=5 && x1>=1.25 && x1<=2.5))";
  double beta = 100.0;
};

struct PlantSection {
  std::string name = "unicycle";
  double delta = 0.1;
  double noise = 0.01;
  // empty vectors mean "use the plant's built-in box"
  std::vector<double> init_low, init_high;
  std::vector<double> action_low, action_high;
  // subtracted from the state before it enters a network; never touches
  // rewards or satisfaction checks
  std::vector<double> norm_offset;
};

struct EvalSection {
  long cadence = 10000;
  int trajectories = 100;
  bool resample = false;  // fresh initial states at every evaluation point
};

struct TrainerConfig {
  SpecSection spec;
  PlantSection plant;
  DelayConfig delays{3, 4, 5, 5};
  SacConfig sac;
  long total_steps = 600000;
  EvalSection eval;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  Ablation ablation = Ablation::None;
  bool trace_episodes = false;
};

TrainerConfig parse_config(const std::string& text);
TrainerConfig load_config(const std::string& path);
std::string dump_config(const TrainerConfig& config);

// Throws on inconsistent settings; returns human-readable warnings (for
// example a finally-outer reward with a large beta).
std::vector<std::string> validate_config(const TrainerConfig& config);

}  // namespace stlncs
