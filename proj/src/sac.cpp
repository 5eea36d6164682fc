#include "stlncs/sac.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace stlncs {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(2*pi)/2

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// log(1 - tanh(u)^2), stable for large |u|
double log_one_minus_tanh_sq(double u) { return 2.0 * (std::log(2.0) - u - softplus(-2.0 * u)); }

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& act) {
  Eigen::MatrixXd in(obs.rows(), obs.cols() + act.cols());
  in << obs, act;
  return in;
}

}  // namespace

Actor make_actor(int obs_dim, std::span<const double> action_low, std::span<const double> action_high,
                 const std::vector<int>& hidden, RngStream& rng) {
  if (action_low.size() != action_high.size() || action_low.empty())
    throw std::invalid_argument("action bounds must be non-empty and congruent");
  Actor actor;
  actor.n_u = static_cast<int>(action_low.size());
  actor.scale.resize(actor.n_u);
  actor.offset.resize(actor.n_u);
  for (int i = 0; i < actor.n_u; ++i) {
    actor.scale(i) = 0.5 * (action_high[i] - action_low[i]);
    actor.offset(i) = 0.5 * (action_high[i] + action_low[i]);
    if (actor.scale(i) <= 0.0) throw std::invalid_argument("action box must have positive width");
  }
  std::vector<int> sizes;
  sizes.push_back(obs_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(2 * actor.n_u);
  actor.net = mlp_init(sizes, OutputActivation::Identity, rng);
  return actor;
}

Critics make_critics(int obs_dim, int n_u, const std::vector<int>& hidden, RngStream& rng) {
  std::vector<int> sizes;
  sizes.push_back(obs_dim + n_u);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  Critics critics;
  critics.q1 = mlp_init(sizes, OutputActivation::Identity, rng);
  critics.q2 = mlp_init(sizes, OutputActivation::Identity, rng);
  critics.target1 = critics.q1;
  critics.target2 = critics.q2;
  return critics;
}

ReplayBuffer::ReplayBuffer(int capacity, int obs_dim, int act_dim)
    : capacity_(capacity),
      obs_(capacity, obs_dim),
      act_(capacity, act_dim),
      next_obs_(capacity, obs_dim),
      rewards_(capacity) {
  if (capacity <= 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(std::span<const double> obs, std::span<const double> act, std::span<const double> next_obs,
                        double reward) {
  if (static_cast<int>(obs.size()) != obs_.cols() || static_cast<int>(next_obs.size()) != obs_.cols() ||
      static_cast<int>(act.size()) != act_.cols())
    throw std::invalid_argument("transition dimension mismatch");
  for (int c = 0; c < obs_.cols(); ++c) obs_(cursor_, c) = obs[c];
  for (int c = 0; c < act_.cols(); ++c) act_(cursor_, c) = act[c];
  for (int c = 0; c < next_obs_.cols(); ++c) next_obs_(cursor_, c) = next_obs[c];
  rewards_(cursor_) = reward;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::optional<Batch> ReplayBuffer::sample(int count, RngStream& rng) const {
  if (count <= 0) throw std::invalid_argument("sample count must be positive");
  if (size_ < count) return std::nullopt;
  Batch batch;
  batch.obs.resize(count, obs_.cols());
  batch.act.resize(count, act_.cols());
  batch.next_obs.resize(count, next_obs_.cols());
  batch.rewards.resize(count);
  for (int i = 0; i < count; ++i) {
    const int idx = std::min(size_ - 1, static_cast<int>(rng.uniform01() * size_));
    batch.obs.row(i) = obs_.row(idx);
    batch.act.row(i) = act_.row(idx);
    batch.next_obs.row(i) = next_obs_.row(idx);
    batch.rewards(i) = rewards_(idx);
  }
  return batch;
}

Eigen::MatrixXd gaussian_noise(int rows, int cols, RngStream& rng) {
  Eigen::MatrixXd noise(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) noise(r, c) = rng.gaussian();
  return noise;
}

ActionBatch sample_actions(const Actor& actor, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& noise) {
  const int n = static_cast<int>(obs.rows());
  const int n_u = actor.n_u;
  if (noise.rows() != n || noise.cols() != n_u) throw std::invalid_argument("noise shape mismatch");
  ActionBatch out;
  out.noise = noise;
  const Eigen::MatrixXd head = mlp_forward(actor.net, obs, &out.cache);
  out.mu = head.leftCols(n_u);
  out.log_std_raw = head.rightCols(n_u);
  const Eigen::MatrixXd log_std = out.log_std_raw.array().min(actor.log_std_max).max(actor.log_std_min);
  out.sigma = log_std.array().exp();
  out.pre_tanh = out.mu + (out.sigma.array() * noise.array()).matrix();
  out.tanh_u = out.pre_tanh.array().tanh();
  out.actions.resize(n, n_u);
  out.log_probs.resize(n);
  double log_scale_sum = 0.0;
  for (int j = 0; j < n_u; ++j) log_scale_sum += std::log(actor.scale(j));
  for (int i = 0; i < n; ++i) {
    double lp = -static_cast<double>(n_u) * kHalfLog2Pi - log_scale_sum;
    for (int j = 0; j < n_u; ++j) {
      out.actions(i, j) = actor.scale(j) * out.tanh_u(i, j) + actor.offset(j);
      lp += -0.5 * noise(i, j) * noise(i, j) - log_std(i, j) - log_one_minus_tanh_sq(out.pre_tanh(i, j));
    }
    out.log_probs(i) = lp;
  }
  return out;
}

std::pair<std::vector<double>, double> sample_action(const Actor& actor, std::span<const double> obs, RngStream& rng,
                                                     bool deterministic) {
  Eigen::MatrixXd row(1, obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) row(0, i) = obs[i];
  const Eigen::MatrixXd noise =
      deterministic ? Eigen::MatrixXd::Zero(1, actor.n_u) : gaussian_noise(1, actor.n_u, rng);
  const ActionBatch batch = sample_actions(actor, row, noise);
  std::vector<double> action(actor.n_u);
  for (int j = 0; j < actor.n_u; ++j) action[j] = batch.actions(0, j);
  return {action, batch.log_probs(0)};
}

Eigen::VectorXd target_values(const Critics& critics, const Actor& actor, double alpha,
                              const Eigen::MatrixXd& next_obs, RngStream& rng) {
  const Eigen::MatrixXd noise = gaussian_noise(static_cast<int>(next_obs.rows()), actor.n_u, rng);
  const ActionBatch next_act = sample_actions(actor, next_obs, noise);
  const Eigen::MatrixXd in = critic_input(next_obs, next_act.actions);
  const Eigen::VectorXd q1 = mlp_forward(critics.target1, in);
  const Eigen::VectorXd q2 = mlp_forward(critics.target2, in);
  return q1.cwiseMin(q2) - alpha * next_act.log_probs;
}

double target_value(const Critics& critics, const Actor& actor, double alpha, std::span<const double> next_obs,
                    RngStream& rng) {
  Eigen::MatrixXd row(1, next_obs.size());
  for (std::size_t i = 0; i < next_obs.size(); ++i) row(0, i) = next_obs[i];
  return target_values(critics, actor, alpha, row, rng)(0);
}

CriticLossGrads critic_loss_grads(const Mlp& q, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& act,
                                  const Eigen::VectorXd& targets) {
  const int n = static_cast<int>(obs.rows());
  ForwardCache cache;
  const Eigen::VectorXd pred = mlp_forward(q, critic_input(obs, act), &cache);
  const Eigen::VectorXd resid = pred - targets;
  CriticLossGrads out;
  out.loss = resid.squaredNorm() / n;
  const Eigen::MatrixXd dq = (2.0 / n) * resid;
  mlp_backward(q, cache, dq, &out.grads);
  return out;
}

double critic_loss(const Mlp& q, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& act,
                   const Eigen::VectorXd& targets) {
  const Eigen::VectorXd pred = mlp_forward(q, critic_input(obs, act));
  return (pred - targets).squaredNorm() / static_cast<double>(obs.rows());
}

ActorLossGrads actor_loss_grads(const Actor& actor, const Critics& critics, const Eigen::MatrixXd& obs,
                                const Eigen::MatrixXd& noise, double alpha) {
  const int n = static_cast<int>(obs.rows());
  const int n_u = actor.n_u;
  ActionBatch ab = sample_actions(actor, obs, noise);
  const Eigen::MatrixXd in = critic_input(obs, ab.actions);
  ForwardCache cache1, cache2;
  const Eigen::VectorXd q1 = mlp_forward(critics.q1, in, &cache1);
  const Eigen::VectorXd q2 = mlp_forward(critics.q2, in, &cache2);

  ActorLossGrads out;
  out.log_probs = ab.log_probs;
  out.loss = (alpha * ab.log_probs - q1.cwiseMin(q2)).mean();

  // d(loss)/d(action) through whichever critic achieves the minimum
  Eigen::MatrixXd dq1 = Eigen::MatrixXd::Zero(n, 1);
  Eigen::MatrixXd dq2 = Eigen::MatrixXd::Zero(n, 1);
  for (int i = 0; i < n; ++i) {
    if (q1(i) <= q2(i))
      dq1(i, 0) = -1.0 / n;
    else
      dq2(i, 0) = -1.0 / n;
  }
  Eigen::MatrixXd din1, din2;
  mlp_backward(critics.q1, cache1, dq1, nullptr, &din1);
  mlp_backward(critics.q2, cache2, dq2, nullptr, &din2);
  const Eigen::MatrixXd d_action = din1.rightCols(n_u) + din2.rightCols(n_u);

  // chain to the actor head: u = mu + sigma * eps, a = scale * tanh(u)
  const Eigen::ArrayXXd tanh_u = ab.tanh_u.array();
  const Eigen::ArrayXXd sech_sq = 1.0 - tanh_u.square();
  Eigen::ArrayXXd du = d_action.array() * sech_sq;
  for (int j = 0; j < n_u; ++j) du.col(j) *= actor.scale(j);

  const Eigen::ArrayXXd sig_eps = ab.sigma.array() * ab.noise.array();
  const double a_over_n = alpha / n;
  Eigen::MatrixXd head_grad(n, 2 * n_u);
  head_grad.leftCols(n_u) = (du + a_over_n * 2.0 * tanh_u).matrix();
  Eigen::ArrayXXd dlogstd = du * sig_eps + a_over_n * (2.0 * tanh_u * sig_eps - 1.0);
  // the clamp blocks the gradient outside its range
  const Eigen::ArrayXXd raw = ab.log_std_raw.array();
  dlogstd *= ((raw > actor.log_std_min) && (raw < actor.log_std_max)).cast<double>();
  head_grad.rightCols(n_u) = dlogstd.matrix();

  mlp_backward(actor.net, ab.cache, head_grad, &out.grads);
  return out;
}

double actor_loss(const Actor& actor, const Critics& critics, const Eigen::MatrixXd& obs,
                  const Eigen::MatrixXd& noise, double alpha) {
  const ActionBatch ab = sample_actions(actor, obs, noise);
  const Eigen::MatrixXd in = critic_input(obs, ab.actions);
  const Eigen::VectorXd q1 = mlp_forward(critics.q1, in);
  const Eigen::VectorXd q2 = mlp_forward(critics.q2, in);
  return (alpha * ab.log_probs - q1.cwiseMin(q2)).mean();
}

double alpha_loss(double log_alpha, const Eigen::VectorXd& log_probs, double target_entropy) {
  return std::exp(log_alpha) * (-log_probs.array() - target_entropy).mean();
}

double update_critics(Critics& critics, AdamState& opt1, AdamState& opt2, const Batch& batch, const Actor& actor,
                      double alpha, double gamma, RngStream& rng) {
  const Eigen::VectorXd y = batch.rewards + gamma * target_values(critics, actor, alpha, batch.next_obs, rng);
  CriticLossGrads g1 = critic_loss_grads(critics.q1, batch.obs, batch.act, y);
  CriticLossGrads g2 = critic_loss_grads(critics.q2, batch.obs, batch.act, y);
  adam_step(critics.q1, g1.grads, opt1);
  adam_step(critics.q2, g2.grads, opt2);
  return 0.5 * (g1.loss + g2.loss);
}

double update_actor(Actor& actor, AdamState& opt, const Critics& critics, const Batch& batch, double alpha,
                    RngStream& rng, Eigen::VectorXd* log_probs_out) {
  const Eigen::MatrixXd noise = gaussian_noise(batch.size(), actor.n_u, rng);
  ActorLossGrads g = actor_loss_grads(actor, critics, batch.obs, noise, alpha);
  adam_step(actor.net, g.grads, opt);
  if (log_probs_out) *log_probs_out = std::move(g.log_probs);
  return g.loss;
}

double update_alpha(EntropyTemp& temp, const Eigen::VectorXd& log_probs) {
  const double mean_gap = (-log_probs.array() - temp.target_entropy).mean();
  const double loss = std::exp(temp.log_alpha) * mean_gap;
  adam_step_scalar(temp.log_alpha, loss, temp.opt);  // d(loss)/d(log_alpha) == loss
  return loss;
}

void soft_update(Critics& critics, double xi) {
  for (int l = 0; l < critics.q1.layer_count(); ++l) {
    critics.target1.weights[l] = xi * critics.q1.weights[l] + (1.0 - xi) * critics.target1.weights[l];
    critics.target1.biases[l] = xi * critics.q1.biases[l] + (1.0 - xi) * critics.target1.biases[l];
    critics.target2.weights[l] = xi * critics.q2.weights[l] + (1.0 - xi) * critics.target2.weights[l];
    critics.target2.biases[l] = xi * critics.q2.biases[l] + (1.0 - xi) * critics.target2.biases[l];
  }
}

// ---------------------------------------------------------------------------
// SacAgent

SacAgent::SacAgent(int obs_dim, std::span<const double> action_low, std::span<const double> action_high,
                   const SacConfig& config, RngStream& init_rng)
    : config_(config),
      actor_(make_actor(obs_dim, action_low, action_high, config.hidden, init_rng)),
      critics_(make_critics(obs_dim, static_cast<int>(action_low.size()), config.hidden, init_rng)),
      actor_opt_(adam_init(actor_.net, config.lr)),
      q1_opt_(adam_init(critics_.q1, config.lr)),
      q2_opt_(adam_init(critics_.q2, config.lr)),
      replay_(config.capacity, obs_dim, static_cast<int>(action_low.size())) {
  if (config.initial_alpha <= 0.0) throw std::invalid_argument("initial alpha must be positive");
  temp_.log_alpha = std::log(config.initial_alpha);
  temp_.target_entropy = config.target_entropy;
  temp_.opt.lr = config.lr;
}

std::pair<std::vector<double>, double> SacAgent::act(std::span<const double> obs, RngStream& rng,
                                                     bool deterministic) const {
  return sample_action(actor_, obs, rng, deterministic);
}

void SacAgent::observe(std::span<const double> obs, std::span<const double> act, std::span<const double> next_obs,
                       double reward) {
  replay_.push(obs, act, next_obs, reward);
}

SacAgent::UpdateStats SacAgent::update(RngStream& rng) {
  UpdateStats stats;
  stats.alpha = temp_.alpha();
  auto batch = replay_.sample(config_.batch_size, rng);
  if (!batch) return stats;
  stats.updated = true;
  stats.critic_loss = update_critics(critics_, q1_opt_, q2_opt_, *batch, actor_, temp_.alpha(), config_.gamma, rng);
  Eigen::VectorXd log_probs;
  stats.actor_loss = update_actor(actor_, actor_opt_, critics_, *batch, temp_.alpha(), rng, &log_probs);
  soft_update(critics_, config_.xi);
  stats.alpha_loss = update_alpha(temp_, log_probs);
  stats.alpha = temp_.alpha();
  return stats;
}

void SacAgent::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_mlp(actor_.net, (fs::path(dir) / "actor.net").string());
  save_mlp(critics_.q1, (fs::path(dir) / "critic1.net").string());
  save_mlp(critics_.q2, (fs::path(dir) / "critic2.net").string());
  save_mlp(critics_.target1, (fs::path(dir) / "target_critic1.net").string());
  save_mlp(critics_.target2, (fs::path(dir) / "target_critic2.net").string());
  save_adam(actor_opt_, (fs::path(dir) / "actor.adam").string());
  save_adam(q1_opt_, (fs::path(dir) / "critic1.adam").string());
  save_adam(q2_opt_, (fs::path(dir) / "critic2.adam").string());
  nlohmann::json j;
  j["log_alpha"] = temp_.log_alpha;
  j["target_entropy"] = temp_.target_entropy;
  j["alpha_adam"] = {{"m", temp_.opt.m}, {"v", temp_.opt.v}, {"step", temp_.opt.step}, {"lr", temp_.opt.lr}};
  j["action_scale"] = std::vector<double>(actor_.scale.data(), actor_.scale.data() + actor_.n_u);
  j["action_offset"] = std::vector<double>(actor_.offset.data(), actor_.offset.data() + actor_.n_u);
  j["log_std_min"] = actor_.log_std_min;
  j["log_std_max"] = actor_.log_std_max;
  std::ofstream os(fs::path(dir) / "checkpoint.json");
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("failed writing checkpoint manifest in '" + dir + "'");
}

void SacAgent::load(const std::string& dir) {
  namespace fs = std::filesystem;
  actor_ = load_actor(dir);
  critics_.q1 = load_mlp((fs::path(dir) / "critic1.net").string());
  critics_.q2 = load_mlp((fs::path(dir) / "critic2.net").string());
  critics_.target1 = load_mlp((fs::path(dir) / "target_critic1.net").string());
  critics_.target2 = load_mlp((fs::path(dir) / "target_critic2.net").string());
  actor_opt_ = load_adam((fs::path(dir) / "actor.adam").string());
  q1_opt_ = load_adam((fs::path(dir) / "critic1.adam").string());
  q2_opt_ = load_adam((fs::path(dir) / "critic2.adam").string());
  std::ifstream is(fs::path(dir) / "checkpoint.json");
  if (!is) throw std::runtime_error("missing checkpoint manifest in '" + dir + "'");
  nlohmann::json j;
  is >> j;
  temp_.log_alpha = j.at("log_alpha").get<double>();
  temp_.target_entropy = j.at("target_entropy").get<double>();
  temp_.opt.m = j.at("alpha_adam").at("m").get<double>();
  temp_.opt.v = j.at("alpha_adam").at("v").get<double>();
  temp_.opt.step = j.at("alpha_adam").at("step").get<long>();
  temp_.opt.lr = j.at("alpha_adam").at("lr").get<double>();
}

Actor load_actor(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "checkpoint.json");
  if (!is) throw std::runtime_error("missing checkpoint manifest in '" + dir + "'");
  nlohmann::json j;
  is >> j;
  Actor actor;
  actor.net = load_mlp((fs::path(dir) / "actor.net").string());
  const auto scale = j.at("action_scale").get<std::vector<double>>();
  const auto offset = j.at("action_offset").get<std::vector<double>>();
  actor.n_u = static_cast<int>(scale.size());
  actor.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), actor.n_u);
  actor.offset = Eigen::Map<const Eigen::VectorXd>(offset.data(), actor.n_u);
  actor.log_std_min = j.at("log_std_min").get<double>();
  actor.log_std_max = j.at("log_std_max").get<double>();
  return actor;
}

}  // namespace stlncs
