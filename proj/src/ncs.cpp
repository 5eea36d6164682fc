#include "stlncs/ncs.hpp"

#include <stdexcept>

namespace stlncs {

void DelayConfig::validate() const {
  if (d_sc < 0 || d_ca < 0 || d_sc_max < 0 || d_ca_max < 0)
    throw std::invalid_argument("delays must be non-negative");
  if (d_sc > d_sc_max) throw std::invalid_argument("d_sc exceeds d_sc_max");
  if (d_ca > d_ca_max) throw std::invalid_argument("d_ca exceeds d_ca_max");
}

LoopState::LoopState(const PlantModel& model, const DelayConfig& delays, std::vector<double> x0)
    : delays_(delays), x_(std::move(x0)), held_(model.n_u, 0.0) {
  delays_.validate();
  const int release = delays_.hold_until_max ? delays_.d_sc_max : delays_.d_sc;
  sensor_.push_back({0, x_, release});
}

std::optional<std::pair<int, std::vector<double>>> LoopState::poll_observation() {
  if (sensor_.empty() || sensor_.front().deliver_at != t_) return std::nullopt;
  Message msg = std::move(sensor_.front());
  sensor_.pop_front();
  return std::make_pair(msg.k, std::move(msg.payload));
}

void LoopState::send_action(int k, std::span<const double> action) {
  if (k <= last_sent_k_) throw std::invalid_argument("action index " + std::to_string(k) + " already sent");
  last_sent_k_ = k;
  const int deliver_at = delays_.hold_until_max ? k + delays_.total() : t_ + delays_.d_ca;
  actuator_.push_back({k, std::vector<double>(action.begin(), action.end()), deliver_at});
}

std::pair<std::vector<double>, std::vector<double>> LoopState::advance(const PlantModel& model, RngStream& rng) {
  while (!actuator_.empty() && actuator_.front().deliver_at == t_) {
    held_ = std::move(actuator_.front().payload);
    actuator_.pop_front();
  }
  const std::vector<double> applied = held_;
  x_ = step(model, x_, applied, rng);
  ++t_;
  const int release = t_ + (delays_.hold_until_max ? delays_.d_sc_max : delays_.d_sc);
  sensor_.push_back({t_, x_, release});
  return {x_, applied};
}

LoopState begin_episode(const PlantModel& model, const DelayConfig& delays, RngStream& rng) {
  return LoopState(model, delays, sample_initial(model, rng));
}

LoopState begin_episode_at(const PlantModel& model, const DelayConfig& delays, std::vector<double> x0) {
  return LoopState(model, delays, std::move(x0));
}

}  // namespace stlncs
