#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bsp/csv.hpp"
#include "bsp/model.hpp"
#include "bsp/planner.hpp"
#include "bsp/scenario.hpp"

namespace bsp {

/// One MPC execution campaign: scenario, planner, horizon of the loop and
/// the trial/seed grid.
struct TrialConfig {
  Scenario scenario;
  PlannerConfig planner;
  int steps = 21;
  int trials = 50;
  std::uint64_t seed = 0;
  int particle_count = 150;  // m_x
  bool make_belief_safe = true;
  bool capture_timing = true;  // off: plan_time_ms is written as 0 for reproducible output

  void validate() const {
    scenario.validate();
    planner.validate();
    if (steps < 1 || trials < 1) throw ConfigError("TrialConfig: steps and trials must be >= 1");
    if (particle_count < 1) throw ConfigError("TrialConfig: particle_count must be >= 1");
  }
};

/// One executed step. Collision is judged on the ground truth, never on the
/// belief. action = -1 marks a trial aborted because the belief could not be
/// made safe.
struct StepRecord {
  int trial = 0;
  int step = 0;
  int action = -1;
  double reward = 0.0;
  bool collision = false;
  double plan_time_ms = 0.0;
  long expanded_actions = 0;
  bool feasible = true;
  bool declared_infeasible = false;
  bool aborted_all_unsafe = false;
};

namespace detail {
namespace sim_stream {
inline constexpr std::uint64_t kEnv = 0xE71;
inline constexpr std::uint64_t kInference = 0x1F3;
inline constexpr std::uint64_t kPlan = 0x9A7;
inline constexpr std::uint64_t kPrior = 0xB05;
}  // namespace sim_stream
}  // namespace detail

/// One trial of the MPC loop: make the belief safe (optionally), plan,
/// execute, observe, update, repeat. Errors are recorded, never thrown past
/// the trial boundary.
inline std::vector<StepRecord> run_trial(const TrialConfig& cfg, int trial) {
  cfg.validate();
  namespace st = detail::sim_stream;
  RandomStream master(cfg.seed);
  RandomStream env = master.fork(st::kEnv, static_cast<std::uint64_t>(trial));
  RandomStream infer = master.fork(st::kInference, static_cast<std::uint64_t>(trial));
  RandomStream plan_base = master.fork(st::kPlan, static_cast<std::uint64_t>(trial));
  RandomStream prior_rng = master.fork(st::kPrior, static_cast<std::uint64_t>(trial));

  ScenarioModel model(cfg.scenario);
  ParticleBelief belief = sample_prior(cfg.scenario, cfg.particle_count, prior_rng);
  StateVec gt = cfg.scenario.ground_truth_init;

  std::vector<StepRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    model.set_script_phase(step);
    StepRecord rec;
    rec.trial = trial;
    rec.step = step;

    if (cfg.make_belief_safe) {
      try {
        belief = safe_projection(belief, model, infer).belief;
      } catch (const AllUnsafe&) {
        rec.aborted_all_unsafe = true;
        rec.feasible = false;
        records.push_back(rec);
        break;
      }
    }

    RandomStream plan_rng = plan_base.fork(static_cast<std::uint64_t>(step));
    PlanResult plan_res;
    bool planner_all_unsafe = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      plan_res = plan(belief, cfg.planner, model, plan_rng);
    } catch (const AllUnsafe&) {
      planner_all_unsafe = true;
    }
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    rec.declared_infeasible = planner_all_unsafe || plan_res.infeasible();
    rec.feasible = !rec.declared_infeasible;
    rec.action = rec.declared_infeasible ? model.null_action_index() : plan_res.best_action;
    rec.plan_time_ms = cfg.capture_timing ? elapsed_ms : 0.0;
    rec.expanded_actions = plan_res.stats.expanded_actions;

    const ActionVec act = model.action(rec.action, 0);
    gt = model.transition_sample(gt, act, env);
    rec.collision = !model.state_safe(gt);
    const ObservationVec z = model.observation_sample(gt, env);
    try {
      belief = pf_update(belief, act, z, model, infer);
    } catch (const DegenerateBelief&) {
      rec.aborted_all_unsafe = true;  // filter collapsed; nothing left to track
      records.push_back(rec);
      break;
    }

    rec.reward = model.rho(belief);
    records.push_back(rec);
  }
  return records;
}

/// All trials, parallelized over a small worker pool; results are merged in
/// (trial, step) order so the output is independent of scheduling.
inline std::vector<StepRecord> run_trials(const TrialConfig& cfg) {
  cfg.validate();
  const int workers = std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()),
                                                cfg.trials));
  std::vector<std::vector<StepRecord>> per_trial(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  std::vector<StepRecord> all;
  for (auto& rs : per_trial)
    for (auto& r : rs) all.push_back(r);
  return all;
}

/// Results CSV; one row per executed step.
inline void write_results_csv(std::ostream& os, const TrialConfig& cfg,
                              const std::vector<StepRecord>& records) {
  os << "trial,step,planner,delta,epsilon,L,m_d,m_x,sc,action,reward,collision,plan_time_ms,"
        "expanded_actions,feasible,declared_infeasible\n";
  const std::string planner = planner_name(cfg.planner.kind);
  for (const auto& r : records) {
    os << r.trial << "," << r.step << "," << planner << ","
       << format_double(cfg.planner.constraint.delta) << ","
       << format_double(cfg.planner.constraint.epsilon) << "," << cfg.planner.depth << ","
       << cfg.planner.obs_fanout << "," << cfg.particle_count << ","
       << (cfg.planner.constraint.sc ? 1 : 0) << "," << r.action << ","
       << format_double(r.reward) << "," << (r.collision ? 1 : 0) << ","
       << format_double(r.plan_time_ms) << "," << r.expanded_actions << ","
       << (r.feasible ? 1 : 0) << "," << (r.declared_infeasible ? 1 : 0) << "\n";
  }
}

inline void write_results_csv(const std::string& path, const TrialConfig& cfg,
                              const std::vector<StepRecord>& records) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_results_csv(os, cfg, records);
}

/// Per-planner aggregates over a trial campaign.
struct PlannerAggregate {
  std::string label;
  double mean_cum_reward = 0.0;             // per trial, undiscounted
  double mean_cum_reward_discounted = 0.0;  // per trial, gamma^step weighting
  int collision_trials = 0;                 // trials with at least one collision
  long collision_steps = 0;
  double mean_plan_time_ms = 0.0;
  double mean_expanded_actions = 0.0;
  long infeasible_declarations = 0;
  int aborted_trials = 0;
};

inline PlannerAggregate aggregate(const TrialConfig& cfg, const std::vector<StepRecord>& records) {
  PlannerAggregate agg;
  std::ostringstream label;
  label << planner_name(cfg.planner.kind) << " delta=" << format_double(cfg.planner.constraint.delta)
        << " L=" << cfg.planner.depth;
  agg.label = label.str();
  std::vector<double> cum(static_cast<std::size_t>(cfg.trials), 0.0);
  std::vector<double> cum_disc(static_cast<std::size_t>(cfg.trials), 0.0);
  std::vector<char> collided(static_cast<std::size_t>(cfg.trials), 0);
  std::vector<char> aborted(static_cast<std::size_t>(cfg.trials), 0);
  long n_steps = 0;
  double time_sum = 0.0, exp_sum = 0.0;
  for (const auto& r : records) {
    const auto t = static_cast<std::size_t>(r.trial);
    if (r.aborted_all_unsafe) {
      aborted[t] = 1;
      continue;
    }
    cum[t] += r.reward;
    cum_disc[t] += std::pow(cfg.planner.gamma, r.step) * r.reward;
    if (r.collision) {
      collided[t] = 1;
      ++agg.collision_steps;
    }
    if (r.declared_infeasible) ++agg.infeasible_declarations;
    time_sum += r.plan_time_ms;
    exp_sum += static_cast<double>(r.expanded_actions);
    ++n_steps;
  }
  for (int t = 0; t < cfg.trials; ++t) {
    agg.mean_cum_reward += cum[static_cast<std::size_t>(t)];
    agg.mean_cum_reward_discounted += cum_disc[static_cast<std::size_t>(t)];
    agg.collision_trials += collided[static_cast<std::size_t>(t)];
    agg.aborted_trials += aborted[static_cast<std::size_t>(t)];
  }
  agg.mean_cum_reward /= cfg.trials;
  agg.mean_cum_reward_discounted /= cfg.trials;
  if (n_steps > 0) {
    agg.mean_plan_time_ms = time_sum / static_cast<double>(n_steps);
    agg.mean_expanded_actions = exp_sum / static_cast<double>(n_steps);
  }
  return agg;
}

/// Pairwise planner comparison: speedup (t_base - t_alg)/t_base and expanded
/// action fraction (N_base - N_alg)/N_base, plus the per-planner aggregates.
struct ComparisonReport {
  std::vector<PlannerAggregate> planners;
  Eigen::MatrixXd speedup;          // [baseline][algorithm]
  Eigen::MatrixXd action_fraction;  // [baseline][algorithm]

  std::string render() const {
    std::ostringstream os;
    os << "planner                          collisions(trials/steps)  mean_cum_reward  "
          "mean_plan_ms  mean_expanded  infeasible  aborted\n";
    for (const auto& p : planners) {
      os << p.label;
      for (std::size_t i = p.label.size(); i < 33; ++i) os << ' ';
      os << p.collision_trials << "/" << p.collision_steps << "  " << p.mean_cum_reward << "  "
         << p.mean_plan_time_ms << "  " << p.mean_expanded_actions << "  "
         << p.infeasible_declarations << "  " << p.aborted_trials << "\n";
    }
    os << "\nspeedup (row = baseline, col = algorithm):\n";
    for (Eigen::Index i = 0; i < speedup.rows(); ++i) {
      for (Eigen::Index j = 0; j < speedup.cols(); ++j) os << speedup(i, j) << "  ";
      os << "\n";
    }
    os << "\nexpanded-action fraction (row = baseline, col = algorithm):\n";
    for (Eigen::Index i = 0; i < action_fraction.rows(); ++i) {
      for (Eigen::Index j = 0; j < action_fraction.cols(); ++j) os << action_fraction(i, j) << "  ";
      os << "\n";
    }
    return os.str();
  }
};

/// Runs every config (shared scenario and seed grid) and compares them.
inline ComparisonReport run_comparison(const std::vector<TrialConfig>& cfgs,
                                       std::vector<std::vector<StepRecord>>* records_out = nullptr) {
  if (cfgs.empty()) throw ConfigError("run_comparison: no configs");
  for (const auto& c : cfgs) {
    c.validate();
    if (c.seed != cfgs.front().seed || c.trials != cfgs.front().trials ||
        c.steps != cfgs.front().steps)
      throw ConfigError("run_comparison: configs must share the seed/trial/step grid");
  }
  ComparisonReport rep;
  const auto n = static_cast<Eigen::Index>(cfgs.size());
  rep.speedup.setZero(n, n);
  rep.action_fraction.setZero(n, n);
  std::vector<double> times, actions;
  for (const auto& c : cfgs) {
    auto recs = run_trials(c);
    rep.planners.push_back(aggregate(c, recs));
    times.push_back(rep.planners.back().mean_plan_time_ms);
    actions.push_back(rep.planners.back().mean_expanded_actions);
    if (records_out) records_out->push_back(std::move(recs));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto si = static_cast<std::size_t>(i);
      const auto sj = static_cast<std::size_t>(j);
      rep.speedup(i, j) = times[si] > 0 ? (times[si] - times[sj]) / times[si] : 0.0;
      rep.action_fraction(i, j) =
          actions[si] > 0 ? (actions[si] - actions[sj]) / actions[si] : 0.0;
    }
  }
  return rep;
}

/// The two shipped benchmark scenarios. Noise, priors and ground truth carry
/// the reference parameters; beacon and obstacle layout are this package's
/// defaults (docs/scenario_format.md).
inline std::pair<Scenario, Scenario> builtin_scenarios() {
  Scenario map1;
  map1.kind = ScenarioKind::Navigation;
  for (double bx : {-2.0, 0.0, 2.0})
    for (double by : {-2.0, 0.0, 2.0}) map1.beacons.emplace_back(bx, by);
  map1.obstacles.push_back({Eigen::Vector2d(1.25, 1.25), 0.5, ObstacleShape::Disk});
  map1.goal = Eigen::Vector2d(2.5, 2.5);
  map1.noise = NoiseParams{0.1, 0.01, 0.01, 0.99};
  map1.prior_mean = Eigen::Vector2d(0.0, 0.0);
  map1.prior_cov = 0.1 * Eigen::Matrix2d::Identity();
  map1.ground_truth_init = Eigen::Vector2d(-0.5, -0.2);

  Scenario map2;
  map2.kind = ScenarioKind::Tracking;
  map2.beacons = map1.beacons;
  map2.obstacles.push_back({Eigen::Vector2d(4.0, 1.5), 0.5, ObstacleShape::Square});
  map2.target_script = {Eigen::Vector2d(-1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
  map2.noise = NoiseParams{0.1, 0.01, 0.01, 0.99};
  map2.prior_mean = Eigen::Vector4d(0.0, 0.0, 10.0, 0.0);
  map2.prior_cov = 0.01 * Eigen::Matrix4d::Identity();
  map2.ground_truth_init = Eigen::Vector4d(-0.5, -0.2, 10.0, 0.0);

  return {map1, map2};
}

}  // namespace bsp
