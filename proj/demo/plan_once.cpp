// Minimal library walkthrough: build the navigation scenario, draw a prior
// belief, run one constrained planning session and print the verdicts.

#include <cstdio>

#include "bsp/bsp.hpp"

int main() {
  auto [map1, map2] = bsp::builtin_scenarios();
  bsp::ScenarioModel model(map1);

  bsp::RandomStream rng(42);
  bsp::ParticleBelief belief = bsp::sample_prior(map1, 150, rng);

  bsp::PlannerConfig cfg;
  cfg.kind = bsp::PlannerKind::PCSS;
  cfg.depth = 1;
  cfg.obs_fanout = 50;
  cfg.gamma = map1.noise.gamma;
  cfg.constraint.delta = 0.8;

  bsp::PlanResult res = bsp::plan(belief, cfg, model, rng);
  if (res.infeasible()) {
    std::puts("no feasible action");
    return 0;
  }
  std::printf("best action: %d\n", res.best_action);
  for (std::size_t a = 0; a < res.q_values.size(); ++a)
    std::printf("  a=%zu  feasible=%d  Q=%.4f\n", a, static_cast<int>(res.feasible[a]),
                res.q_values[a]);
  std::printf("expanded=%ld pruned=%ld in %.1f ms\n", res.stats.expanded_actions,
              res.stats.pruned_actions, res.stats.wall_time_ms);
  return 0;
}
