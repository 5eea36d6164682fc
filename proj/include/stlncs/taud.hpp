#pragma once

#include <span>
#include <vector>

#include "stlncs/stl.hpp"

namespace stlncs {

// Controller-side extended state: a window of the last tau plant states and
// the last d control actions, oldest entries first.
struct ExtendedState {
  Trace window;                 // tau states of dimension n_x
  std::vector<double> history;  // d * n_u values, flat, oldest action first
  int d = 0;
  int n_u = 0;

  int tau() const { return window.length(); }
  int n_x() const { return window.dim(); }
  std::size_t flat_size() const { return window.flat().size() + history.size(); }
};

ExtendedState init_extended(std::span<const double> x0, int tau, int d, int n_u);

ExtendedState advance_extended(const ExtendedState& z, std::span<const double> new_x, std::span<const double> new_a);

// Window states followed by the action history, as fed to networks when no
// preprocessing is applied.
std::vector<double> flatten(const ExtendedState& z);

struct RewardParams {
  double beta = 100.0;
  TemporalOp outer_op = TemporalOp::Globally;
};

// Two-valued reward from the robustness sign of phi over the state window:
//   outer G:  -exp(-beta * [rho >= 0])
//   outer F:  +exp(+beta * [rho >= 0])
double reward(const ExtendedState& z, const Phi& phi, const RewardParams& params);

}  // namespace stlncs
