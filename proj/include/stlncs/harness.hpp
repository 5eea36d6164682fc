#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stlncs/config.hpp"
#include "stlncs/metrics.hpp"
#include "stlncs/ncs.hpp"
#include "stlncs/preprocess.hpp"
#include "stlncs/sac.hpp"
#include "stlncs/taud.hpp"

namespace stlncs {

// A validated run setup: parsed specification, resolved plant, reward
// parameters, and the network input layout for the selected ablation.
struct Task {
  TrainerConfig config;
  Spec spec;
  PlantModel plant;
  RewardParams reward_params;
  std::vector<double> norm_offset;
  int obs_dim = 0;

  const std::vector<SubFormula>& subs() const { return spec.phi.subs; }
  int tau() const { return spec.tau; }
  int d() const { return config.delays.total(); }

  // Network input for an extended state under the configured ablation;
  // states are shifted by norm_offset, flags and actions pass through.
  std::vector<double> observation(const ExtendedState& z) const;
};

Task prepare_task(const TrainerConfig& config);

// Fired once per wall-clock step of a training episode.
struct StepEvent {
  long global_step = 0;
  int episode = 0;
  int t = 0;        // wall-clock step within the episode
  int k = -1;       // decision index served this step, -1 if none
  bool stored = false;  // a transition (k-1, k) entered the replay buffer
};

using StepObserver = std::function<void(const StepEvent&)>;

struct TrainResult {
  std::vector<EvalReport> reports;
  long steps = 0;
  int episodes = 0;
  std::string metrics_csv;
  std::string metrics_svg;
  std::string checkpoint_dir;
  std::vector<std::string> warnings;
};

TrainResult run_training(const TrainerConfig& config, const StepObserver& observer = {});

// Runs n delay-simulated episodes under the deterministic policy. Returns
// per trajectory the discounted reward sum over decisions and whether the
// full state trace satisfies the specification.
EvalReport evaluate(const Task& task, const Actor& actor, int n, const std::vector<std::vector<double>>& init_states,
                    std::uint64_t noise_seed, long step_index);

// Draws n initial states from the plant's initial box.
std::vector<std::vector<double>> draw_initial_states(const Task& task, int n, RngStream& rng);

EvalReport evaluate_checkpoint(const TrainerConfig& config, const std::string& checkpoint_dir, int n);

}  // namespace stlncs
