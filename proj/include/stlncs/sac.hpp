#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stlncs/neural.hpp"
#include "stlncs/rng.hpp"

namespace stlncs {

// Squashed-Gaussian policy. The network outputs a mean and a raw log
// standard deviation per action dimension; actions are
// scale * tanh(mu + sigma * eps) + offset, elementwise on the action box.
struct Actor {
  Mlp net;  // obs_dim -> 2 * n_u
  Eigen::VectorXd scale;
  Eigen::VectorXd offset;
  int n_u = 0;
  double log_std_min = -20.0;
  double log_std_max = 2.0;
};

Actor make_actor(int obs_dim, std::span<const double> action_low, std::span<const double> action_high,
                 const std::vector<int>& hidden, RngStream& rng);

// Main and target Q-networks; both take (observation, action) rows.
struct Critics {
  Mlp q1, q2;
  Mlp target1, target2;
};

Critics make_critics(int obs_dim, int n_u, const std::vector<int>& hidden, RngStream& rng);

struct EntropyTemp {
  double log_alpha = 0.0;
  double target_entropy = -2.0;
  ScalarAdam opt;

  double alpha() const { return std::exp(log_alpha); }
};

struct Batch {
  Eigen::MatrixXd obs, act, next_obs;
  Eigen::VectorXd rewards;

  int size() const { return static_cast<int>(obs.rows()); }
};

// Ring buffer of transitions with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, int obs_dim, int act_dim);

  void push(std::span<const double> obs, std::span<const double> act, std::span<const double> next_obs, double reward);
  int size() const { return size_; }
  int capacity() const { return capacity_; }

  // Empty until at least `count` items are stored.
  std::optional<Batch> sample(int count, RngStream& rng) const;

 private:
  int capacity_;
  int size_ = 0;
  int cursor_ = 0;
  Eigen::MatrixXd obs_, act_, next_obs_;
  Eigen::VectorXd rewards_;
};

// One batch of reparameterized action samples with everything the actor
// gradient needs.
struct ActionBatch {
  Eigen::MatrixXd actions;    // rows in U
  Eigen::VectorXd log_probs;  // exact density of the squashed transform
  Eigen::MatrixXd mu, log_std_raw, sigma, pre_tanh, tanh_u, noise;
  ForwardCache cache;
};

Eigen::MatrixXd gaussian_noise(int rows, int cols, RngStream& rng);

ActionBatch sample_actions(const Actor& actor, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& noise);

std::pair<std::vector<double>, double> sample_action(const Actor& actor, std::span<const double> obs, RngStream& rng,
                                                     bool deterministic);

// Single-sample estimate of the entropy-regularized target state value:
// min of the target critics at a fresh action minus alpha * log pi.
Eigen::VectorXd target_values(const Critics& critics, const Actor& actor, double alpha,
                              const Eigen::MatrixXd& next_obs, RngStream& rng);
double target_value(const Critics& critics, const Actor& actor, double alpha, std::span<const double> next_obs,
                    RngStream& rng);

// Pure loss/gradient evaluations; the update functions below apply one Adam
// step on top of these.
struct CriticLossGrads {
  double loss = 0.0;
  MlpGradients grads;
};
CriticLossGrads critic_loss_grads(const Mlp& q, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& act,
                                  const Eigen::VectorXd& targets);
double critic_loss(const Mlp& q, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& act,
                   const Eigen::VectorXd& targets);

struct ActorLossGrads {
  double loss = 0.0;
  MlpGradients grads;
  Eigen::VectorXd log_probs;
};
ActorLossGrads actor_loss_grads(const Actor& actor, const Critics& critics, const Eigen::MatrixXd& obs,
                                const Eigen::MatrixXd& noise, double alpha);
double actor_loss(const Actor& actor, const Critics& critics, const Eigen::MatrixXd& obs,
                  const Eigen::MatrixXd& noise, double alpha);

double alpha_loss(double log_alpha, const Eigen::VectorXd& log_probs, double target_entropy);

double update_critics(Critics& critics, AdamState& opt1, AdamState& opt2, const Batch& batch, const Actor& actor,
                      double alpha, double gamma, RngStream& rng);
double update_actor(Actor& actor, AdamState& opt, const Critics& critics, const Batch& batch, double alpha,
                    RngStream& rng, Eigen::VectorXd* log_probs_out = nullptr);
double update_alpha(EntropyTemp& temp, const Eigen::VectorXd& log_probs);
void soft_update(Critics& critics, double xi);

struct SacConfig {
  double gamma = 0.99;
  double xi = 0.01;
  double lr = 3e-4;
  int capacity = 100000;
  int batch_size = 64;
  double target_entropy = -2.0;
  double initial_alpha = 1.0;
  std::vector<int> hidden = {256, 256};
};

// Owns the learner state and runs the per-step update schedule: critics,
// actor, target soft update, temperature.
class SacAgent {
 public:
  SacAgent(int obs_dim, std::span<const double> action_low, std::span<const double> action_high,
           const SacConfig& config, RngStream& init_rng);

  std::pair<std::vector<double>, double> act(std::span<const double> obs, RngStream& rng, bool deterministic) const;

  void observe(std::span<const double> obs, std::span<const double> act, std::span<const double> next_obs,
               double reward);

  struct UpdateStats {
    bool updated = false;
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha_loss = 0.0;
    double alpha = 0.0;
  };
  UpdateStats update(RngStream& rng);

  const Actor& actor() const { return actor_; }
  Actor& actor() { return actor_; }
  const Critics& critics() const { return critics_; }
  Critics& critics() { return critics_; }
  const EntropyTemp& temperature() const { return temp_; }
  ReplayBuffer& replay() { return replay_; }
  const SacConfig& config() const { return config_; }

  void save(const std::string& dir) const;
  void load(const std::string& dir);

 private:
  SacConfig config_;
  Actor actor_;
  Critics critics_;
  AdamState actor_opt_, q1_opt_, q2_opt_;
  EntropyTemp temp_;
  ReplayBuffer replay_;
};

// Loads just the policy from a checkpoint directory written by SacAgent::save.
Actor load_actor(const std::string& dir);

}  // namespace stlncs
