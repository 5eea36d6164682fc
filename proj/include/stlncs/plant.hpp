#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stlncs/rng.hpp"

namespace stlncs {

// Stochastic discrete-time plant  x' = f(x, u) + noise_gain * w,
// with w drawn i.i.d. standard normal per coordinate. Initial states are
// uniform on the box [init_low, init_high]; inputs are clamped to
// [action_low, action_high] before they reach the dynamics.
struct PlantModel {
  std::string name;
  int n_x = 0;
  int n_u = 0;
  std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> out)> dynamics;
  std::vector<double> noise_gain;  // n_x * n_x, row-major
  std::vector<double> init_low, init_high;
  std::vector<double> action_low, action_high;

  void validate() const;
};

std::vector<double> sample_initial(const PlantModel& model, RngStream& rng);

std::vector<double> clamp_action(const PlantModel& model, std::span<const double> u);

std::vector<double> step(const PlantModel& model, std::span<const double> x, std::span<const double> u,
                         RngStream& rng);

// Two-wheeled mobile robot on a plane: state (x, y, heading), input
// (forward speed, turn rate), Euler-discretized with time step delta.
PlantModel make_unicycle(double delta = 0.1, double noise = 0.01);

// Point mass on a line: state (position, velocity), input (acceleration).
PlantModel make_double_integrator(double delta = 0.1, double noise = 0.01);

// Built-in model lookup used by the config loader; throws on unknown names.
PlantModel make_plant(const std::string& name, double delta, double noise);

}  // namespace stlncs
