// Command-line front end: run a planner campaign, compare planners, export
// the built-in scenario files, or run the quick self-test battery.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bsp/bsp.hpp"

namespace {

bsp::PlannerKind parse_planner(const std::string& name) {
  if (name == "unconstrained") return bsp::PlannerKind::Unconstrained;
  if (name == "pcss") return bsp::PlannerKind::PCSS;
  if (name == "ccss_is" || name == "ccss-is") return bsp::PlannerKind::CCSS_IS;
  if (name == "fastccss") return bsp::PlannerKind::FastCCSS;
  throw bsp::ConfigError("unknown planner '" + name + "'");
}

bsp::Scenario load_scenario(const std::string& spec) {
  auto [map1, map2] = bsp::builtin_scenarios();
  if (spec == "map1") return map1;
  if (spec == "map2") return map2;
  return bsp::read_scenario(spec);
}

struct CommonFlags {
  std::string scenario = "map1";
  std::string planner = "pcss";
  double delta = 0.8;
  double epsilon = 0.0;
  int depth = 1;
  int md = 100;
  int mx = 150;
  int trials = 50;
  int steps = 21;
  std::uint64_t seed = 0;
  bool sc = false;
  bool no_make_safe = false;
  bool no_timing = false;
  std::string out;
  std::string belief_out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_planner) {
  cmd->add_option("--scenario", f.scenario, "map1, map2 or a scenario JSON file");
  if (with_planner)
    cmd->add_option("--planner", f.planner, "unconstrained | pcss | ccss_is | fastccss");
  cmd->add_option("--delta", f.delta, "inner-constraint threshold");
  cmd->add_option("--epsilon", f.epsilon, "outer-constraint confidence margin");
  cmd->add_option("--depth", f.depth, "planning horizon L");
  cmd->add_option("--md", f.md, "observations per action node (m_d)");
  cmd->add_option("--mx", f.mx, "belief particle count (m_x)");
  cmd->add_option("--trials", f.trials, "number of trials");
  cmd->add_option("--steps", f.steps, "planning sessions per trial");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_flag("--sc", f.sc, "scale delta with remaining depth (chance constraints)");
  cmd->add_flag("--no-make-safe", f.no_make_safe, "skip the safe projection before planning");
  cmd->add_flag("--no-timing", f.no_timing, "write plan_time_ms as 0 for reproducible output");
  cmd->add_option("--out", f.out, "output CSV (run) or output prefix (compare)");
}

bsp::TrialConfig make_config(const CommonFlags& f, bsp::PlannerKind kind) {
  bsp::TrialConfig cfg;
  cfg.scenario = load_scenario(f.scenario);
  cfg.planner.kind = kind;
  cfg.planner.depth = f.depth;
  cfg.planner.obs_fanout = f.md;
  cfg.planner.gamma = cfg.scenario.noise.gamma;
  cfg.planner.constraint.delta = f.delta;
  cfg.planner.constraint.epsilon = f.epsilon;
  cfg.planner.constraint.sc = f.sc;
  cfg.steps = f.steps;
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.particle_count = f.mx;
  cfg.make_belief_safe = !f.no_make_safe && kind != bsp::PlannerKind::Unconstrained;
  cfg.capture_timing = !f.no_timing;
  cfg.validate();
  return cfg;
}

int exit_code_for(const std::vector<bsp::StepRecord>& records) {
  for (const auto& r : records)
    if (r.aborted_all_unsafe && r.step == 0) return 2;
  return 0;
}

int cmd_run(const CommonFlags& f) {
  bsp::TrialConfig cfg = make_config(f, parse_planner(f.planner));
  auto records = bsp::run_trials(cfg);
  const std::string out = f.out.empty() ? "results.csv" : f.out;
  bsp::write_results_csv(out, cfg, records);
  std::cout << bsp::aggregate(cfg, records).label << ": wrote " << records.size() << " rows to "
            << out << "\n";
  if (!f.belief_out.empty()) {
    bsp::RandomStream rng(cfg.seed);
    bsp::write_belief_csv(f.belief_out, bsp::sample_prior(cfg.scenario, cfg.particle_count, rng));
  }
  return exit_code_for(records);
}

int cmd_compare(const CommonFlags& f, const std::string& planners_arg,
                const std::string& baseline_arg) {
  std::vector<std::string> names;
  std::stringstream ss(planners_arg);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) names.push_back(item);
  if (names.empty()) throw bsp::ConfigError("compare: empty planner list");

  std::vector<bsp::TrialConfig> cfgs;
  for (const auto& n : names) cfgs.push_back(make_config(f, parse_planner(n)));

  std::vector<std::vector<bsp::StepRecord>> records;
  bsp::ComparisonReport rep = bsp::run_comparison(cfgs, &records);

  std::size_t base = 0;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == baseline_arg) base = i;
  std::cout << rep.render();
  std::cout << "\nbaseline " << names[base] << ":\n";
  for (std::size_t j = 0; j < names.size(); ++j) {
    std::cout << "  " << names[j] << ": speedup "
              << rep.speedup(static_cast<Eigen::Index>(base), static_cast<Eigen::Index>(j))
              << ", action fraction "
              << rep.action_fraction(static_cast<Eigen::Index>(base), static_cast<Eigen::Index>(j))
              << "\n";
  }

  const std::string prefix = f.out.empty() ? "compare" : f.out;
  int code = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    bsp::write_results_csv(prefix + "_" + names[i] + ".csv", cfgs[i], records[i]);
    code = std::max(code, exit_code_for(records[i]));
  }
  std::ofstream rf(prefix + "_report.txt");
  rf << rep.render();
  return code;
}

int cmd_scenarios(const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto [map1, map2] = bsp::builtin_scenarios();
  bsp::write_scenario(out_dir + "/map1.json", map1);
  bsp::write_scenario(out_dir + "/map2.json", map2);
  std::cout << "wrote " << out_dir << "/map1.json and " << out_dir << "/map2.json\n";
  return 0;
}

bool check(const char* name, bool ok, int& failures) {
  std::cout << (ok ? "  pass  " : "  FAIL  ") << name << "\n";
  if (!ok) ++failures;
  return ok;
}

int cmd_selftest() {
  int failures = 0;
  std::cout << "selftest:\n";

  {  // adaptive bounds sandwich and counter agreement on a small sweep
    bool ok = true;
    bsp::RandomStream rng(7);
    for (int trial = 0; trial < 500 && ok; ++trial) {
      const int m = 1 + static_cast<int>(rng.uniform01() * 30);
      const double eps = rng.uniform01();
      bsp::AdaptiveCounter c(m);
      const auto [na, nr] = bsp::accept_reject_counters(m, eps);
      bool decided = false;
      for (int i = 0; i < m; ++i) {
        const bool success = rng.uniform01() < 0.6;
        c.add(success);
        ok = ok && c.lower_bound() <= c.upper_bound() + 1e-12;
        const auto dec = bsp::adaptive_decision(c, eps);
        if (!decided && dec == bsp::AdaptiveDecision::Accept) {
          ok = ok && c.successes == na;
          decided = true;
        }
        if (!decided && dec == bsp::AdaptiveDecision::Reject) {
          ok = ok && (c.n - c.successes) == nr + 1;
          decided = true;
        }
      }
    }
    check("adaptive bounds and counters", ok, failures);
  }

  {  // execution risk one-step example
    const double w[] = {0.5, 0.5};
    const double er[] = {0.0, 0.2};
    const double v = bsp::execution_risk(0.1, w, er);
    check("execution risk recursion", std::abs(v - 0.19) < 1e-15, failures);
  }

  {  // Appendix-style mean-squared-distance identity, one Gaussian
    bsp::RandomStream rng(3);
    Eigen::MatrixXd xs(2, 20000);
    for (int i = 0; i < xs.cols(); ++i) xs.col(i) = Eigen::Vector2d(3, 4) + rng.normal_vec(2);
    auto b = bsp::ParticleBelief::equal_weights(std::move(xs));
    const double msd = bsp::mean_sq_goal_distance(b, Eigen::Vector2d(0, 0));
    check("mean squared goal distance identity", std::abs(msd - 27.0) < 0.6, failures);
  }

  {  // scenario round trip
    auto [map1, map2] = bsp::builtin_scenarios();
    const auto j1 = bsp::scenario_to_json(map1).dump(2);
    const auto j2 = bsp::scenario_to_json(bsp::scenario_from_json(nlohmann::json::parse(j1))).dump(2);
    check("scenario round trip", j1 == j2, failures);
  }

  {  // myopic planning on map1 picks a goal-ward action deterministically
    auto [map1, map2] = bsp::builtin_scenarios();
    bsp::ScenarioModel model(map1);
    bsp::RandomStream rng(11);
    auto belief = bsp::sample_prior(map1, 100, rng);
    bsp::PlannerConfig cfg;
    cfg.kind = bsp::PlannerKind::PCSS;
    cfg.obs_fanout = 30;
    cfg.constraint.delta = 0.8;
    bsp::RandomStream r1(5), r2(5);
    auto a = bsp::plan(belief, cfg, model, r1);
    auto b = bsp::plan(belief, cfg, model, r2);
    check("planning determinism", !a.infeasible() && a.best_action == b.best_action, failures);
  }

  std::cout << (failures == 0 ? "all checks passed\n" : "FAILURES\n");
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained belief-space planning benchmarks"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "run one planner over the trial grid, write CSV");
  add_common(run, run_flags, true);
  run->add_option("--belief-out", run_flags.belief_out, "also export the prior belief as CSV");

  CommonFlags cmp_flags;
  std::string planners = "pcss,ccss_is,fastccss";
  std::string baseline = "ccss_is";
  auto* cmp = app.add_subcommand("compare", "run a planner matrix and report speedups");
  add_common(cmp, cmp_flags, false);
  cmp->add_option("--planners", planners, "comma-separated planner list");
  cmp->add_option("--baseline", baseline, "baseline planner for the summary");

  std::string out_dir = ".";
  auto* scn = app.add_subcommand("scenarios", "write the built-in scenario files");
  scn->add_option("--out", out_dir, "output directory");

  app.add_subcommand("selftest", "run the quick invariant battery");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_flags);
    if (cmp->parsed()) return cmd_compare(cmp_flags, planners, baseline);
    if (scn->parsed()) return cmd_scenarios(out_dir);
    return cmd_selftest();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // prints usage; nonzero on bad flags
  } catch (const bsp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
