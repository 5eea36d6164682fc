#pragma once

#include <string>
#include <vector>

namespace stlncs {

// One evaluation round: statistics of n rollouts under the deterministic
// policy, plus the most recent training diagnostics.
struct EvalReport {
  long step = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
  std::vector<double> returns;
  std::vector<bool> successes;
  double alpha = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
};

// Columns: step, mean_return, success_rate, alpha, critic_loss, actor_loss.
void write_metrics_csv(const std::vector<EvalReport>& reports, const std::string& path);

// Line plot of mean return and success rate against the training step. With
// several seeds the per-seed curves are drawn faint behind the seed mean and
// a +-1 standard deviation band.
void write_metrics_svg(const std::vector<std::vector<EvalReport>>& seeds, const std::string& path);

}  // namespace stlncs
