#include "stlncs/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace stlncs {

namespace fs = std::filesystem;

std::vector<double> Task::observation(const ExtendedState& z) const {
  const int n_x = plant.n_x;
  std::vector<double> out;
  if (config.ablation == Ablation::NoPreprocess) {
    out = flatten(z);
    for (int i = 0; i < z.tau(); ++i)
      for (int j = 0; j < n_x; ++j) out[static_cast<std::size_t>(i) * n_x + j] -= norm_offset[j];
    return out;
  }
  PreprocessedState p = preprocess_state(z, subs());
  for (int j = 0; j < n_x; ++j) p.current_state[j] -= norm_offset[j];
  if (config.ablation == Ablation::TauMdp) p.action_history.clear();
  return flatten(p);
}

Task prepare_task(const TrainerConfig& config) {
  Task task;
  task.config = config;
  validate_config(config);
  task.plant = make_plant(config.plant.name, config.plant.delta, config.plant.noise);
  auto override_box = [](std::vector<double>& dst, const std::vector<double>& src, int n, const char* what) {
    if (src.empty()) return;
    if (static_cast<int>(src.size()) != n) throw std::invalid_argument(std::string(what) + " has wrong dimension");
    dst = src;
  };
  override_box(task.plant.init_low, config.plant.init_low, task.plant.n_x, "plant.init_low");
  override_box(task.plant.init_high, config.plant.init_high, task.plant.n_x, "plant.init_high");
  override_box(task.plant.action_low, config.plant.action_low, task.plant.n_u, "plant.action_low");
  override_box(task.plant.action_high, config.plant.action_high, task.plant.n_u, "plant.action_high");
  task.plant.validate();

  task.spec = parse_stl(config.spec.formula, task.plant.n_x);
  task.reward_params.beta = config.spec.beta;
  task.reward_params.outer_op = task.spec.outer_op;

  if (config.plant.norm_offset.empty()) {
    task.norm_offset.assign(task.plant.n_x, 0.0);
    if (task.plant.name == "unicycle") task.norm_offset = {2.5, 2.5, 0.0};
  } else if (static_cast<int>(config.plant.norm_offset.size()) == task.plant.n_x) {
    task.norm_offset = config.plant.norm_offset;
  } else {
    throw std::invalid_argument("plant.norm_offset has wrong dimension");
  }

  const int n_x = task.plant.n_x;
  const int n_u = task.plant.n_u;
  const int M = static_cast<int>(task.subs().size());
  const int d = config.delays.total();
  switch (config.ablation) {
    case Ablation::None:
      task.obs_dim = n_x + M + d * n_u;
      break;
    case Ablation::TauMdp:
      task.obs_dim = n_x + M;
      break;
    case Ablation::NoPreprocess:
      task.obs_dim = task.spec.tau * n_x + d * n_u;
      break;
  }
  return task;
}

std::vector<std::vector<double>> draw_initial_states(const Task& task, int n, RngStream& rng) {
  std::vector<std::vector<double>> states;
  states.reserve(n);
  for (int i = 0; i < n; ++i) states.push_back(sample_initial(task.plant, rng));
  return states;
}

EvalReport evaluate(const Task& task, const Actor& actor, int n, const std::vector<std::vector<double>>& init_states,
                    std::uint64_t noise_seed, long step_index) {
  if (n <= 0) throw std::invalid_argument("evaluation needs at least one trajectory");
  if (static_cast<int>(init_states.size()) < n) throw std::invalid_argument("not enough initial states");
  const int T = task.spec.total_horizon;
  const int d_sc = task.config.delays.d_sc;
  const int k_last = T - d_sc - task.config.delays.d_ca;  // last decision that reaches the plant
  const double gamma = task.config.sac.gamma;

  EvalReport report;
  report.step = step_index;
  for (int i = 0; i < n; ++i) {
    RngStream rng(RngStream::mix(noise_seed ^ RngStream::mix(static_cast<std::uint64_t>(i) + 1)));
    RngStream action_rng(0);  // unused in deterministic mode
    LoopState loop = begin_episode_at(task.plant, task.config.delays, init_states[i]);
    Trace trace(task.plant.n_x, 0);
    trace.push_back(loop.plant_state());
    ExtendedState z_prev;
    std::vector<double> a_prev;
    double ret = 0.0;
    for (int t = 0; t <= T; ++t) {
      if (auto ob = loop.poll_observation()) {
        const int k = ob->first;
        ExtendedState z = k == 0 ? init_extended(ob->second, task.spec.tau, task.d(), task.plant.n_u)
                                 : advance_extended(z_prev, ob->second, a_prev);
        if (k <= k_last) ret += std::pow(gamma, k) * reward(z, task.spec.phi, task.reward_params);
        auto [a, logp] = sample_action(actor, task.observation(z), action_rng, true);
        loop.send_action(k, a);
        z_prev = std::move(z);
        a_prev = std::move(a);
      }
      if (t < T) {
        loop.advance(task.plant, rng);
        trace.push_back(loop.plant_state());
      }
    }
    report.returns.push_back(ret);
    report.successes.push_back(satisfies(trace, 0, task.spec));
  }
  for (double r : report.returns) report.mean_return += r;
  report.mean_return /= n;
  for (bool s : report.successes) report.success_rate += s ? 1.0 : 0.0;
  report.success_rate /= n;
  return report;
}

namespace {

void write_episode_trace(const std::string& path, const std::vector<std::vector<double>>& rows, int n_x, int n_u) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "t";
  for (int i = 0; i < n_x; ++i) os << ",x" << i;
  for (int i = 0; i < n_u; ++i) os << ",u" << i;
  os << ",reward,sensor_queue,actuator_queue\n";
  for (const auto& row : rows) {
    os << static_cast<long>(row[0]);
    for (std::size_t i = 1; i < row.size(); ++i) {
      os << ',';
      if (std::isnan(row[i]))
        os << "";
      else
        os << row[i];
    }
    os << '\n';
  }
}

}  // namespace

TrainResult run_training(const TrainerConfig& config, const StepObserver& observer) {
  TrainResult result;
  result.warnings = validate_config(config);
  Task task = prepare_task(config);
  const int T = task.spec.total_horizon;
  const long steps_per_episode = T + 1;
  const int max_episode = static_cast<int>(std::max<long>(1, config.total_steps / steps_per_episode));

  RngStream base(config.seed);
  RngStream env_rng = base.spawn(1);
  RngStream agent_init_rng = base.spawn(2);
  RngStream agent_rng = base.spawn(3);
  RngStream eval_init_rng = base.spawn(4);

  SacAgent agent(task.obs_dim, task.plant.action_low, task.plant.action_high, config.sac, agent_init_rng);

  fs::create_directories(config.out_dir);
  {
    std::ofstream os(fs::path(config.out_dir) / "config.ini");
    os << dump_config(config);
  }
  const std::string trace_dir = (fs::path(config.out_dir) / "traces").string();
  if (config.trace_episodes) fs::create_directories(trace_dir);

  std::vector<std::vector<double>> eval_states;
  if (!config.eval.resample) eval_states = draw_initial_states(task, config.eval.trajectories, eval_init_rng);
  long eval_round = 0;
  SacAgent::UpdateStats last_stats;
  auto run_eval = [&](long step) {
    if (config.eval.resample) eval_states = draw_initial_states(task, config.eval.trajectories, eval_init_rng);
    const std::uint64_t noise_seed = RngStream::mix(config.seed ^ 0x4556414cull) + static_cast<std::uint64_t>(eval_round);
    ++eval_round;
    EvalReport report = evaluate(task, agent.actor(), config.eval.trajectories, eval_states, noise_seed, step);
    report.alpha = agent.temperature().alpha();
    report.critic_loss = last_stats.critic_loss;
    report.actor_loss = last_stats.actor_loss;
    result.reports.push_back(std::move(report));
  };

  run_eval(0);
  long global_step = 0;
  for (int episode = 0; episode < max_episode; ++episode) {
    LoopState loop = begin_episode(task.plant, config.delays, env_rng);
    ExtendedState z_prev;
    std::vector<double> obs_prev, a_prev;
    std::vector<std::vector<double>> trace_rows;
    for (int t = 0; t <= T; ++t) {
      ++global_step;
      StepEvent event;
      event.global_step = global_step;
      event.episode = episode;
      event.t = t;
      double step_reward = std::numeric_limits<double>::quiet_NaN();
      if (auto ob = loop.poll_observation()) {
        const int k = ob->first;
        ExtendedState z = k == 0 ? init_extended(ob->second, task.spec.tau, task.d(), task.plant.n_u)
                                 : advance_extended(z_prev, ob->second, a_prev);
        std::vector<double> obs_k = task.observation(z);
        if (k > 0) {
          step_reward = reward(z_prev, task.spec.phi, task.reward_params);
          agent.observe(obs_prev, a_prev, obs_k, step_reward);
          event.stored = true;
        }
        auto [a, logp] = agent.act(obs_k, agent_rng, false);
        loop.send_action(k, a);
        z_prev = std::move(z);
        obs_prev = std::move(obs_k);
        a_prev = std::move(a);
        event.k = k;
      }
      if (observer) observer(event);

      const auto stats = agent.update(agent_rng);
      if (stats.updated) {
        last_stats = stats;
        if (!std::isfinite(stats.critic_loss) || !std::isfinite(stats.actor_loss) || !std::isfinite(stats.alpha)) {
          const std::string diag = (fs::path(config.out_dir) / "diagnostic_checkpoint").string();
          agent.save(diag);
          throw std::runtime_error("non-finite training statistics at step " + std::to_string(global_step) +
                                   "; diagnostic checkpoint written to " + diag);
        }
      }
      if (global_step % config.eval.cadence == 0) run_eval(global_step);

      const std::vector<double> x_t = loop.plant_state();
      const std::size_t sensor_depth = loop.sensor_depth();
      const std::size_t actuator_depth = loop.actuator_depth();
      const auto [new_x, applied] = loop.advance(task.plant, env_rng);
      if (config.trace_episodes) {
        std::vector<double> row{static_cast<double>(t)};
        row.insert(row.end(), x_t.begin(), x_t.end());
        row.insert(row.end(), applied.begin(), applied.end());
        row.push_back(step_reward);
        row.push_back(static_cast<double>(sensor_depth));
        row.push_back(static_cast<double>(actuator_depth));
        trace_rows.push_back(std::move(row));
      }
    }
    if (config.trace_episodes)
      write_episode_trace((fs::path(trace_dir) / ("episode_" + std::to_string(episode) + ".csv")).string(), trace_rows,
                          task.plant.n_x, task.plant.n_u);
  }
  if (global_step % config.eval.cadence != 0) run_eval(global_step);

  result.steps = global_step;
  result.episodes = max_episode;
  result.metrics_csv = (fs::path(config.out_dir) / "metrics.csv").string();
  result.metrics_svg = (fs::path(config.out_dir) / "metrics.svg").string();
  result.checkpoint_dir = (fs::path(config.out_dir) / "checkpoint").string();
  write_metrics_csv(result.reports, result.metrics_csv);
  write_metrics_svg({result.reports}, result.metrics_svg);
  agent.save(result.checkpoint_dir);
  return result;
}

EvalReport evaluate_checkpoint(const TrainerConfig& config, const std::string& checkpoint_dir, int n) {
  Task task = prepare_task(config);
  fs::path dir(checkpoint_dir);
  if (fs::is_regular_file(dir)) dir = dir.parent_path();  // accept the manifest path too
  const Actor actor = load_actor(dir.string());
  if (actor.net.input_dim() != task.obs_dim)
    throw std::runtime_error("checkpoint expects observation dimension " + std::to_string(actor.net.input_dim()) +
                             " but the config produces " + std::to_string(task.obs_dim));
  RngStream eval_init_rng = RngStream(config.seed).spawn(4);
  const auto states = draw_initial_states(task, n, eval_init_rng);
  return evaluate(task, actor, n, states, RngStream::mix(config.seed ^ 0x4556414cull), 0);
}

}  // namespace stlncs
