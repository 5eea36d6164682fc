#pragma once

#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stlncs/plant.hpp"
#include "stlncs/rng.hpp"

namespace stlncs {

// Constant transmission delays of the sensor->controller and
// controller->actuator channels, together with their known upper bounds.
struct DelayConfig {
  int d_sc = 0;
  int d_ca = 0;
  int d_sc_max = 0;
  int d_ca_max = 0;
  // Worst-case timing: observations are released at k + d_sc_max and actions
  // take effect at k + total(), regardless of the true delays.
  bool hold_until_max = false;

  int total() const { return d_sc_max + d_ca_max; }  // d

  void validate() const;
};

// One control-loop episode. Each step t delivers due actuator messages,
// applies the held input to the plant, and publishes the new state on the
// sensor channel. The held input is the zero vector until the first action
// arrives.
class LoopState {
 public:
  LoopState(const PlantModel& model, const DelayConfig& delays, std::vector<double> x0);

  int time() const { return t_; }
  const std::vector<double>& plant_state() const { return x_; }
  const std::vector<double>& held_input() const { return held_; }
  std::size_t sensor_depth() const { return sensor_.size(); }
  std::size_t actuator_depth() const { return actuator_.size(); }

  // The sensor message due at the current step, if any. For constant delays
  // this is (t - d_sc, x_{t-d_sc}) once t >= d_sc.
  std::optional<std::pair<int, std::vector<double>>> poll_observation();

  // Queues the k-th control action; it reaches the actuator d_ca steps from
  // now. Each index may be sent once, in increasing order.
  void send_action(int k, std::span<const double> action);

  // Advances the loop one step. Returns the new plant state and the input
  // that was applied during the transition.
  std::pair<std::vector<double>, std::vector<double>> advance(const PlantModel& model, RngStream& rng);

 private:
  struct Message {
    int k;
    std::vector<double> payload;
    int deliver_at;
  };

  DelayConfig delays_;
  int t_ = 0;
  std::vector<double> x_;
  std::vector<double> held_;
  std::deque<Message> sensor_;
  std::deque<Message> actuator_;
  int last_sent_k_ = -1;
};

LoopState begin_episode(const PlantModel& model, const DelayConfig& delays, RngStream& rng);
LoopState begin_episode_at(const PlantModel& model, const DelayConfig& delays, std::vector<double> x0);

}  // namespace stlncs
