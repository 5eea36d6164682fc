#include "stlncs/taud.hpp"

#include <cmath>
#include <stdexcept>

namespace stlncs {

ExtendedState init_extended(std::span<const double> x0, int tau, int d, int n_u) {
  if (tau < 1) throw std::invalid_argument("tau must be at least 1");
  if (d < 0 || n_u < 0) throw std::invalid_argument("history shape must be non-negative");
  ExtendedState z;
  z.window = Trace(static_cast<int>(x0.size()), tau);
  for (int i = 0; i < tau; ++i) z.window.set_state(i, x0);
  z.history.assign(static_cast<std::size_t>(d) * n_u, 0.0);
  z.d = d;
  z.n_u = n_u;
  return z;
}

ExtendedState advance_extended(const ExtendedState& z, std::span<const double> new_x, std::span<const double> new_a) {
  if (static_cast<int>(new_x.size()) != z.n_x()) throw std::invalid_argument("state dimension mismatch");
  if (z.d > 0 && static_cast<int>(new_a.size()) != z.n_u) throw std::invalid_argument("action dimension mismatch");
  ExtendedState out = z;
  out.window.shift_append(new_x);
  if (z.d > 0) {
    std::copy(out.history.begin() + z.n_u, out.history.end(), out.history.begin());
    std::copy(new_a.begin(), new_a.end(), out.history.end() - z.n_u);
  }
  return out;
}

std::vector<double> flatten(const ExtendedState& z) {
  std::vector<double> out;
  out.reserve(z.flat_size());
  out.insert(out.end(), z.window.flat().begin(), z.window.flat().end());
  out.insert(out.end(), z.history.begin(), z.history.end());
  return out;
}

double reward(const ExtendedState& z, const Phi& phi, const RewardParams& params) {
  const double rho = robustness(z.window, 0, phi);
  const double indicator = rho >= 0.0 ? 1.0 : 0.0;
  if (params.outer_op == TemporalOp::Globally) return -std::exp(-params.beta * indicator);
  return std::exp(params.beta * indicator);
}

}  // namespace stlncs
