#include "stlncs/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stlncs {

void PlantModel::validate() const {
  if (n_x <= 0 || n_u <= 0) throw std::invalid_argument("plant dimensions must be positive");
  if (!dynamics) throw std::invalid_argument("plant has no dynamics");
  auto check_box = [](const std::vector<double>& lo, const std::vector<double>& hi, std::size_t n, const char* what) {
    if (lo.size() != n || hi.size() != n) throw std::invalid_argument(std::string(what) + " box has wrong dimension");
    for (std::size_t i = 0; i < n; ++i)
      if (lo[i] > hi[i]) throw std::invalid_argument(std::string(what) + " box has low > high");
  };
  check_box(init_low, init_high, static_cast<std::size_t>(n_x), "initial-state");
  check_box(action_low, action_high, static_cast<std::size_t>(n_u), "action");
  if (noise_gain.size() != static_cast<std::size_t>(n_x) * n_x)
    throw std::invalid_argument("noise gain must be an n_x by n_x matrix");
}

std::vector<double> sample_initial(const PlantModel& model, RngStream& rng) {
  std::vector<double> x(model.n_x);
  for (int i = 0; i < model.n_x; ++i) x[i] = rng.uniform(model.init_low[i], model.init_high[i]);
  return x;
}

std::vector<double> clamp_action(const PlantModel& model, std::span<const double> u) {
  if (static_cast<int>(u.size()) != model.n_u) throw std::invalid_argument("action dimension mismatch");
  std::vector<double> out(model.n_u);
  for (int i = 0; i < model.n_u; ++i) out[i] = std::clamp(u[i], model.action_low[i], model.action_high[i]);
  return out;
}

std::vector<double> step(const PlantModel& model, std::span<const double> x, std::span<const double> u,
                         RngStream& rng) {
  if (static_cast<int>(x.size()) != model.n_x) throw std::invalid_argument("state dimension mismatch");
  const std::vector<double> uc = clamp_action(model, u);
  std::vector<double> next(model.n_x);
  model.dynamics(x, uc, next);
  std::vector<double> w(model.n_x);
  for (int i = 0; i < model.n_x; ++i) w[i] = rng.gaussian();
  for (int i = 0; i < model.n_x; ++i) {
    double noise = 0.0;
    for (int j = 0; j < model.n_x; ++j) noise += model.noise_gain[static_cast<std::size_t>(i) * model.n_x + j] * w[j];
    next[i] += noise;
  }
  return next;
}

static std::vector<double> scaled_identity(int n, double s) {
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + i] = s;
  return m;
}

PlantModel make_unicycle(double delta, double noise) {
  PlantModel m;
  m.name = "unicycle";
  m.n_x = 3;
  m.n_u = 2;
  m.dynamics = [delta](std::span<const double> x, std::span<const double> u, std::span<double> out) {
    out[0] = x[0] + delta * u[0] * std::cos(x[2]);
    out[1] = x[1] + delta * u[0] * std::sin(x[2]);
    out[2] = x[2] + delta * u[1];
  };
  m.noise_gain = scaled_identity(3, noise);
  const double half_pi = 1.5707963267948966;
  m.init_low = {0.0, 0.0, -half_pi};
  m.init_high = {2.5, 2.5, half_pi};
  m.action_low = {-1.0, -1.0};
  m.action_high = {1.0, 1.0};
  return m;
}

PlantModel make_double_integrator(double delta, double noise) {
  PlantModel m;
  m.name = "double_integrator";
  m.n_x = 2;
  m.n_u = 1;
  m.dynamics = [delta](std::span<const double> x, std::span<const double> u, std::span<double> out) {
    out[0] = x[0] + delta * x[1];
    out[1] = x[1] + delta * u[0];
  };
  m.noise_gain = scaled_identity(2, noise);
  m.init_low = {-1.0, -0.5};
  m.init_high = {1.0, 0.5};
  m.action_low = {-1.0};
  m.action_high = {1.0};
  return m;
}

PlantModel make_plant(const std::string& name, double delta, double noise) {
  if (name == "unicycle") return make_unicycle(delta, noise);
  if (name == "double_integrator") return make_double_integrator(delta, noise);
  throw std::invalid_argument("unknown plant '" + name + "'");
}

}  // namespace stlncs
