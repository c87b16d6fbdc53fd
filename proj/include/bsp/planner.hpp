#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "bsp/belief.hpp"
#include "bsp/constraints.hpp"
#include "bsp/execution_risk.hpp"
#include "bsp/importance.hpp"
#include "bsp/model.hpp"
#include "bsp/operators.hpp"
#include "bsp/random.hpp"

namespace bsp {

enum class PlannerKind { Unconstrained, PCSS, CCSS_IS, FastCCSS };

inline const char* planner_name(PlannerKind k) {
  switch (k) {
    case PlannerKind::Unconstrained: return "unconstrained";
    case PlannerKind::PCSS: return "pcss";
    case PlannerKind::CCSS_IS: return "ccss_is";
    case PlannerKind::FastCCSS: return "fastccss";
  }
  return "?";
}

struct PlannerConfig {
  PlannerKind kind = PlannerKind::Unconstrained;
  int depth = 1;        // L
  int obs_fanout = 10;  // m_d observations per action node
  ConstraintSpec constraint;
  double gamma = 0.99;
  bool audit = false;  // retain the built tree for post-hoc checks

  long lace_count() const {  // m = m_d^L
    long m = 1;
    for (int i = 0; i < depth; ++i) m *= obs_fanout;
    return m;
  }

  void validate() const {
    if (depth < 1) throw ConfigError("PlannerConfig: depth must be >= 1");
    if (obs_fanout < 1) throw ConfigError("PlannerConfig: obs_fanout must be >= 1");
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("PlannerConfig: gamma must be in [0,1]");
    constraint.validate();
    if (kind == PlannerKind::PCSS && constraint.epsilon > 0.0 && depth != 1)
      throw ConfigError("PlannerConfig: adaptive PCSS (epsilon > 0) is myopic only (depth 1)");
    if (kind == PlannerKind::PCSS && constraint.epsilon == 0.0 &&
        constraint.form != ConstraintForm::Multiplicative)
      throw ConfigError("PlannerConfig: PCSS at epsilon = 0 requires the multiplicative form");
  }
};

struct PlanStats {
  long expanded_actions = 0;  // action nodes that survived every check
  long pruned_actions = 0;    // action nodes discarded at any stage
  double wall_time_ms = 0.0;
};

struct AuditActionRecord {
  int action = -1;
  bool pruned_down = false;
  bool rejected_up = false;
  double q = std::numeric_limits<double>::quiet_NaN();
  double er = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> children;       // audit node ids of recursed children
  std::vector<double> weights;     // constraint weights (IS or uniform)
  std::vector<double> child_phi;   // PCSS: phi of each generated child
  std::vector<double> child_risk;  // CC planners: r_b of each generated child
};

struct AuditNode {
  int depth_remaining = 0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
  double risk = std::numeric_limits<double>::quiet_NaN();
  double value = std::numeric_limits<double>::quiet_NaN();
  double er = std::numeric_limits<double>::quiet_NaN();
  int chosen_action = -1;
  std::vector<AuditActionRecord> actions;
};

struct TreeAudit {
  std::vector<AuditNode> nodes;
  int root = -1;
};

/// Planner output: chosen action (or infeasible), per-action Q estimates and
/// feasibility verdicts, and expansion statistics.
struct PlanResult {
  int best_action = -1;  // -1: no feasible action survives
  std::vector<double> q_values;
  std::vector<bool> feasible;
  PlanStats stats;
  std::shared_ptr<TreeAudit> audit;

  bool infeasible() const { return best_action < 0; }
};

/// phi(b) for the configured constraint operator. NegCVaR takes the worst
/// obstacle; InfoGain has no single-belief value (cumulative form only).
template <BeliefModel M>
double constraint_phi(const ConstraintSpec& spec, const M& model, const ParticleBelief& b) {
  switch (spec.op) {
    case ConstraintOperator::ProbSafe:
      return prob_safe(b, model);
    case ConstraintOperator::NegCVaR:
      if constexpr (requires { model.obstacles(); }) {
        double worst = 0.0;
        for (const auto& o : model.obstacles())
          worst = std::max(worst, cvar_deviation(b, o, spec.alpha));
        return -worst;
      } else {
        throw ConfigError("NegCVaR constraint needs a model with obstacles");
      }
    case ConstraintOperator::ReachGoalProb:
      if constexpr (requires { model.goal(); }) {
        return reach_goal_prob(b, model.goal(), spec.goal_radius);
      } else {
        throw ConfigError("ReachGoalProb constraint needs a model with a goal");
      }
    case ConstraintOperator::InfoGain:
      throw ConfigError("InfoGain is a two-belief operator; use the cumulative form");
  }
  throw ConfigError("unknown constraint operator");
}

/// phi(b_prev -> b_next) for the cumulative form.
template <BeliefModel M>
double constraint_phi_pair(const ConstraintSpec& spec, const M& model, const ParticleBelief& prev,
                           const ActionVec& a, const ObservationVec& z,
                           const ParticleBelief& next) {
  if (spec.op == ConstraintOperator::InfoGain) {
    if constexpr (requires { model.transition_logdensity(StateVec{}, StateVec{}, ActionVec{}); }) {
      return info_gain(prev, a, z, next, model);
    } else {
      throw ConfigError("InfoGain constraint needs a model with transition densities");
    }
  }
  return constraint_phi(spec, model, next);
}

namespace detail {

namespace stream_tag {
inline constexpr std::uint64_t kObsGen = 0xA1;
inline constexpr std::uint64_t kRewardUpdate = 0xB2;
inline constexpr std::uint64_t kConstraintUpdate = 0xC3;
inline constexpr std::uint64_t kProjection = 0xD4;
inline constexpr std::uint64_t kBarPropagate = 0xE5;
inline constexpr std::uint64_t kAction = 0x10000;  // + action index
inline constexpr std::uint64_t kChild = 0x200000;  // + observation index
}  // namespace stream_tag

inline StreamKey action_key(StreamKey node, int a) {
  return node.child(stream_tag::kAction + static_cast<std::uint64_t>(a));
}

inline StreamKey child_key(StreamKey ak, int j) {
  return ak.child(stream_tag::kChild + static_cast<std::uint64_t>(j));
}

template <BeliefModel M>
class PlannerEngine {
 public:
  PlannerEngine(const PlannerConfig& cfg, const M& model) : cfg_(cfg), model_(model) {
    if (cfg_.audit) audit_ = std::make_shared<TreeAudit>();
  }

  PlanResult run(const ParticleBelief& root, RandomStream& rng) {
    const auto t0 = std::chrono::steady_clock::now();
    const StreamKey root_key = rng.fork(0x917).key();
    PlanResult res;
    res.q_values.assign(model_.num_actions(), std::numeric_limits<double>::quiet_NaN());
    res.feasible.assign(model_.num_actions(), false);

    switch (cfg_.kind) {
      case PlannerKind::Unconstrained: {
        NodeOutcome out = eval_plain(root, cfg_.depth, root_key);
        finish_root(res, out);
        break;
      }
      case PlannerKind::PCSS: {
        if (cfg_.constraint.epsilon > 0.0) {
          run_pcss_adaptive(res, root, root_key);
        } else if (constraint_phi(cfg_.constraint, model_, root) < cfg_.constraint.delta) {
          // Root violates the inner constraint; nothing can be feasible.
        } else {
          NodeOutcome out = eval_pcss(root, cfg_.depth, root_key);
          finish_root(res, out);
        }
        break;
      }
      case PlannerKind::CCSS_IS: {
        NodeOutcome out = eval_cc(root, root, /*coincide=*/true, /*dead=*/false, cfg_.depth,
                                  root_key, /*fast=*/false);
        finish_root(res, out);
        break;
      }
      case PlannerKind::FastCCSS: {
        NodeOutcome out = eval_cc(root, root, /*coincide=*/true, /*dead=*/false, cfg_.depth,
                                  root_key, /*fast=*/true);
        finish_root(res, out);
        break;
      }
    }

    res.stats = stats_;
    res.stats.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    res.audit = audit_;
    if (audit_) audit_->root = root_audit_;
    return res;
  }

 private:
  struct ActionOutcome {
    bool feasible = false;
    double q = std::numeric_limits<double>::quiet_NaN();
  };

  struct NodeOutcome {
    bool feasible = true;
    double value = 0.0;
    double er = 0.0;  // CC planners only
    std::vector<ActionOutcome> actions;
    int audit_id = -1;
  };

  struct Expansion {
    ParticleBelief propagated;
    std::vector<ObservationVec> obs;
  };

  Expansion draw_observations(const ParticleBelief& src, const ActionVec& act, StreamKey ak) {
    RandomStream rng(ak.child(stream_tag::kObsGen));
    Expansion e;
    e.propagated = propagate(src, act, model_, rng);
    e.obs.reserve(static_cast<std::size_t>(cfg_.obs_fanout));
    for (int j = 0; j < cfg_.obs_fanout; ++j) {
      const int idx = rng.pick_weighted(e.propagated.weights);
      e.obs.push_back(model_.observation_sample(e.propagated.states.col(idx), rng));
    }
    return e;
  }

  ParticleBelief update_child(const ParticleBelief& src, const ActionVec& act,
                              const ObservationVec& z, StreamKey ak, int j, std::uint64_t chain) {
    RandomStream rng(child_key(ak, j).child(chain));
    return pf_update(src, act, z, model_, rng);
  }

  int new_audit_node(int depth) {
    if (!audit_) return -1;
    audit_->nodes.emplace_back();
    audit_->nodes.back().depth_remaining = depth;
    return static_cast<int>(audit_->nodes.size() - 1);
  }

  AuditNode* audit_node(int id) { return audit_ && id >= 0 ? &audit_->nodes[id] : nullptr; }

  void finish_root(PlanResult& res, const NodeOutcome& out) {
    root_audit_ = out.audit_id;
    for (std::size_t a = 0; a < out.actions.size(); ++a) {
      res.q_values[a] = out.actions[a].q;
      res.feasible[a] = out.actions[a].feasible;
    }
    res.best_action = argmax_feasible(out.actions);
  }

  static int argmax_feasible(const std::vector<ActionOutcome>& actions) {
    int best = -1;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      if (!actions[a].feasible) continue;
      if (best < 0 || actions[a].q > actions[best].q) best = static_cast<int>(a);
    }
    return best;
  }

  // --- sparse sampling, no constraints -------------------------------------

  NodeOutcome eval_plain(const ParticleBelief& b, int depth, StreamKey key) {
    NodeOutcome out;
    out.audit_id = new_audit_node(depth);
    const double rho = model_.rho(b);
    if (auto* an = audit_node(out.audit_id)) an->rho = rho;
    if (depth == 0) {
      out.value = rho;
      if (auto* an = audit_node(out.audit_id)) an->value = rho;
      return out;
    }
    out.actions.resize(model_.num_actions());
    for (int a = 0; a < model_.num_actions(); ++a) {
      const StreamKey ak = action_key(key, a);
      const ActionVec act = model_.action(a, cfg_.depth - depth);
      Expansion e = draw_observations(b, act, ak);
      double sum = 0.0;
      AuditActionRecord rec;
      rec.action = a;
      for (int j = 0; j < cfg_.obs_fanout; ++j) {
        ParticleBelief child = update_child(b, act, e.obs[j], ak, j, stream_tag::kRewardUpdate);
        NodeOutcome co = eval_plain(child, depth - 1, child_key(ak, j));
        sum += co.value;
        rec.children.push_back(co.audit_id);
      }
      out.actions[a].feasible = true;
      out.actions[a].q = sum / cfg_.obs_fanout;
      ++stats_.expanded_actions;
      if (auto* an = audit_node(out.audit_id)) {
        rec.q = out.actions[a].q;
        an->actions.push_back(std::move(rec));
      }
    }
    const int best = argmax_feasible(out.actions);
    out.value = rho + cfg_.gamma * out.actions[best].q;
    if (auto* an = audit_node(out.audit_id)) {
      an->value = out.value;
      an->chosen_action = best;
    }
    return out;
  }

  // --- PCSS: exact pruning at epsilon = 0 ----------------------------------

  NodeOutcome eval_pcss(const ParticleBelief& b, int depth, StreamKey key) {
    NodeOutcome out;
    out.audit_id = new_audit_node(depth);
    const double rho = model_.rho(b);
    if (auto* an = audit_node(out.audit_id)) {
      an->rho = rho;
      an->phi = constraint_phi(cfg_.constraint, model_, b);
    }
    if (depth == 0) {
      out.value = rho;
      if (auto* an = audit_node(out.audit_id)) an->value = rho;
      return out;
    }
    out.actions.resize(model_.num_actions());
    for (int a = 0; a < model_.num_actions(); ++a) {
      const StreamKey ak = action_key(key, a);
      const ActionVec act = model_.action(a, cfg_.depth - depth);
      Expansion e = draw_observations(b, act, ak);
      AuditActionRecord rec;
      rec.action = a;

      // Generate the children and check phi on each before recursing into
      // any of them; one violation prunes the whole action.
      std::vector<ParticleBelief> children;
      children.reserve(static_cast<std::size_t>(cfg_.obs_fanout));
      bool pruned = false;
      for (int j = 0; j < cfg_.obs_fanout; ++j) {
        ParticleBelief child = update_child(b, act, e.obs[j], ak, j, stream_tag::kRewardUpdate);
        const double phi = constraint_phi(cfg_.constraint, model_, child);
        rec.child_phi.push_back(phi);
        if (pc_prune_check(phi, cfg_.constraint.delta)) {
          pruned = true;
          break;
        }
        children.push_back(std::move(child));
      }

      double sum = 0.0;
      if (!pruned) {
        for (int j = 0; j < cfg_.obs_fanout; ++j) {
          NodeOutcome co =
              eval_pcss(children[static_cast<std::size_t>(j)], depth - 1, child_key(ak, j));
          rec.children.push_back(co.audit_id);
          if (!co.feasible) {  // infeasible subtree prunes this action
            pruned = true;
            break;
          }
          sum += co.value;
        }
      }

      if (pruned) {
        ++stats_.pruned_actions;
        rec.pruned_down = true;
      } else {
        ++stats_.expanded_actions;
        out.actions[a].feasible = true;
        out.actions[a].q = sum / cfg_.obs_fanout;
        rec.q = out.actions[a].q;
      }
      if (auto* an = audit_node(out.audit_id)) an->actions.push_back(std::move(rec));
    }

    const int best = argmax_feasible(out.actions);
    if (best < 0) {
      out.feasible = false;
      out.value = rho;
    } else {
      out.value = rho + cfg_.gamma * out.actions[best].q;
    }
    if (auto* an = audit_node(out.audit_id)) {
      an->value = out.value;
      an->chosen_action = best;
    }
    return out;
  }

  // --- adaptive PCSS at epsilon > 0, myopic --------------------------------

  void run_pcss_adaptive(PlanResult& res, const ParticleBelief& root, StreamKey key) {
    const ConstraintSpec& spec = cfg_.constraint;
    root_audit_ = new_audit_node(cfg_.depth);
    const double rho = model_.rho(root);
    if (auto* an = audit_node(root_audit_)) an->rho = rho;

    // The multiplicative inner constraint includes the root belief; a root
    // violation fails every lace at once.
    if (spec.form == ConstraintForm::Multiplicative &&
        constraint_phi(spec, model_, root) < spec.delta)
      return;

    std::vector<ActionOutcome> actions(static_cast<std::size_t>(model_.num_actions()));
    for (int a = 0; a < model_.num_actions(); ++a) {
      const StreamKey ak = action_key(key, a);
      const ActionVec act = model_.action(a, 0);
      Expansion e = draw_observations(root, act, ak);
      AdaptiveCounter counter(cfg_.obs_fanout);
      AuditActionRecord rec;
      rec.action = a;
      bool rejected = false;
      bool settled = false;
      double sum = 0.0;
      for (int j = 0; j < cfg_.obs_fanout; ++j) {
        ParticleBelief child = update_child(root, act, e.obs[j], ak, j, stream_tag::kRewardUpdate);
        sum += model_.rho(child);
        if (!settled) {
          double phi;
          if (spec.form == ConstraintForm::Multiplicative) {
            phi = constraint_phi(spec, model_, child);
            counter.add(phi >= spec.delta);
          } else {
            phi = constraint_phi_pair(spec, model_, root, act, e.obs[j], child);
            counter.add(inner_constraint(std::span<const double>(&phi, 1), spec) == 1);
          }
          rec.child_phi.push_back(phi);
          const AdaptiveDecision dec = adaptive_decision(counter, spec.epsilon);
          if (dec == AdaptiveDecision::Reject) {
            rejected = true;
            break;
          }
          if (dec == AdaptiveDecision::Accept) settled = true;
        }
      }
      if (rejected) {
        ++stats_.pruned_actions;
        rec.pruned_down = true;
      } else {
        ++stats_.expanded_actions;
        actions[a].feasible = true;
        actions[a].q = sum / cfg_.obs_fanout;
        rec.q = actions[a].q;
      }
      if (auto* an = audit_node(root_audit_)) an->actions.push_back(std::move(rec));
    }

    for (std::size_t a = 0; a < actions.size(); ++a) {
      res.q_values[a] = actions[a].q;
      res.feasible[a] = actions[a].feasible;
    }
    res.best_action = argmax_feasible(actions);
    if (auto* an = audit_node(root_audit_)) {
      an->chosen_action = res.best_action;
      if (res.best_action >= 0)
        an->value = rho + cfg_.gamma * actions[static_cast<std::size_t>(res.best_action)].q;
    }
  }

  // --- chance-constrained planners ------------------------------------------
  //
  // CCSS-IS carries the reward chain b and the constraint chain bbar through
  // the same sampled observations; FastCCSS collapses both onto the
  // safe-projected chain. `coincide` marks nodes where the chains are still
  // the same realized belief (shared until the first projection bites);
  // `dead` marks constraint subtrees below an r_b = 1 node, where er = 1 by
  // convention and no further constraint updates are needed.

  NodeOutcome eval_cc(const ParticleBelief& b, const ParticleBelief& bbar, bool coincide,
                      bool dead, int depth, StreamKey key, bool fast) {
    NodeOutcome out;
    out.audit_id = new_audit_node(depth);
    const double rho = model_.rho(b);
    const double risk =
        dead ? 1.0 : std::clamp(1.0 - prob_safe(bbar, model_), 0.0, 1.0);
    if (auto* an = audit_node(out.audit_id)) {
      an->rho = rho;
      an->risk = risk;
    }
    if (depth == 0) {
      out.value = rho;
      out.er = dead ? 1.0 : risk;
      if (auto* an = audit_node(out.audit_id)) {
        an->value = rho;
        an->er = out.er;
      }
      return out;
    }

    const double delta_d = scaled_delta(cfg_.constraint.delta, depth, cfg_.depth,
                                        cfg_.constraint.sc);
    const double Delta = 1.0 - delta_d;

    // FastCCSS expands through the safe-projected belief; with a dead or
    // fully unsafe chain there is nothing to push forward.
    if (fast && (dead || risk >= 1.0)) {
      out.feasible = false;
      out.value = rho;
      out.er = 1.0;
      return out;
    }

    ParticleBelief projected;
    const ParticleBelief* expand_src = nullptr;
    bool did_project = false;
    if (!dead) {
      if (risk == 0.0) {
        expand_src = &bbar;
      } else if (risk < 1.0) {
        RandomStream prj(key.child(stream_tag::kProjection));
        projected = safe_projection(bbar, model_, prj).belief;
        expand_src = &projected;
        did_project = true;
      }
      // risk == 1 with Delta == 1 on the CCSS-IS side: constraint chain goes
      // dead below this node (er = 1 exactly), reward chain continues.
    }
    const bool child_dead = dead || expand_src == nullptr;
    const bool child_coincide = coincide && !did_project && !child_dead;

    out.actions.resize(model_.num_actions());
    std::vector<double> action_er(static_cast<std::size_t>(model_.num_actions()), 1.0);
    for (int a = 0; a < model_.num_actions(); ++a) {
      const StreamKey ak = action_key(key, a);
      const ActionVec act = model_.action(a, cfg_.depth - depth);

      // Observations come from the reward chain for CCSS-IS and from the
      // safe-prior chain for FastCCSS.
      const ParticleBelief& obs_src = fast ? *expand_src : b;
      Expansion e = draw_observations(obs_src, act, ak);

      AuditActionRecord rec;
      rec.action = a;

      std::vector<ParticleBelief> r_children;   // reward chain
      std::vector<ParticleBelief> c_children;   // constraint chain (may alias)
      std::vector<double> child_risks(static_cast<std::size_t>(cfg_.obs_fanout), 1.0);
      r_children.reserve(static_cast<std::size_t>(cfg_.obs_fanout));
      if (!fast) c_children.reserve(static_cast<std::size_t>(cfg_.obs_fanout));

      for (int j = 0; j < cfg_.obs_fanout; ++j) {
        if (fast) {
          r_children.push_back(
              update_child(*expand_src, act, e.obs[j], ak, j, stream_tag::kRewardUpdate));
        } else {
          r_children.push_back(update_child(b, act, e.obs[j], ak, j, stream_tag::kRewardUpdate));
          if (!child_dead && !child_coincide)
            c_children.push_back(
                update_child(*expand_src, act, e.obs[j], ak, j, stream_tag::kConstraintUpdate));
        }
      }
      auto constraint_child = [&](int j) -> const ParticleBelief& {
        if (fast || child_coincide || child_dead) return r_children[static_cast<std::size_t>(j)];
        return c_children[static_cast<std::size_t>(j)];
      };
      if (!child_dead)
        for (int j = 0; j < cfg_.obs_fanout; ++j)
          child_risks[static_cast<std::size_t>(j)] = 1.0 - prob_safe(constraint_child(j), model_);
      rec.child_risk = child_risks;

      // Constraint weights: uniform for FastCCSS (and exact when the chains
      // coincide with an all-safe parent), importance-sampling otherwise.
      std::vector<double> weights(static_cast<std::size_t>(cfg_.obs_fanout),
                                  1.0 / cfg_.obs_fanout);
      if (!fast && !child_dead && !(coincide && risk == 0.0)) {
        RandomStream bar_rng(ak.child(stream_tag::kBarPropagate));
        ParticleBelief bar_prop = propagate(bbar, act, model_, bar_rng);
        const Eigen::VectorXd w = detail::importance_weights_two(
            std::span<const ObservationVec>(e.obs), bbar, bar_prop, b, e.propagated, model_);
        for (int j = 0; j < cfg_.obs_fanout; ++j) weights[static_cast<std::size_t>(j)] = w[j];
      }
      rec.weights = weights;

      // Down-sweep pruning: a child with r_b = 1, or a child risk above the
      // necessary-condition bound, discards the action (only when the
      // constraint is active).
      bool pruned = false;
      if (!child_dead && Delta < 1.0) {
        for (int j = 0; j < cfg_.obs_fanout && !pruned; ++j) {
          const std::size_t sj = static_cast<std::size_t>(j);
          if (child_risks[sj] >= 1.0) pruned = true;
        }
        if (!pruned && risk < 1.0) {
          for (int j = 0; j < cfg_.obs_fanout && !pruned; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            if (!(weights[sj] > 0.0)) continue;
            const double bound = cc_prune_bound(sj, weights, child_risks, risk, Delta);
            if (child_risks[sj] > bound) pruned = true;
          }
        }
      }

      double sum = 0.0;
      std::vector<double> child_ers(static_cast<std::size_t>(cfg_.obs_fanout), 1.0);
      if (!pruned) {
        for (int j = 0; j < cfg_.obs_fanout; ++j) {
          NodeOutcome co = eval_cc(r_children[static_cast<std::size_t>(j)], constraint_child(j),
                                   child_coincide, child_dead, depth - 1, child_key(ak, j), fast);
          rec.children.push_back(co.audit_id);
          if (!co.feasible) {
            pruned = true;
            break;
          }
          sum += co.value;
          child_ers[static_cast<std::size_t>(j)] = co.er;
        }
      }

      if (!pruned) {
        const double er_a = child_dead ? 1.0 : execution_risk(risk, weights, child_ers);
        rec.er = er_a;
        if (er_a > Delta) {  // up-sweep verification
          rec.rejected_up = true;
          ++stats_.pruned_actions;
        } else {
          out.actions[a].feasible = true;
          out.actions[a].q = sum / cfg_.obs_fanout;
          rec.q = out.actions[a].q;
          action_er[static_cast<std::size_t>(a)] = er_a;
          ++stats_.expanded_actions;
        }
      } else {
        rec.pruned_down = true;
        ++stats_.pruned_actions;
      }
      if (auto* an = audit_node(out.audit_id)) an->actions.push_back(std::move(rec));
    }

    const int best = argmax_feasible(out.actions);
    if (best < 0) {
      out.feasible = false;
      out.value = rho;
      out.er = 1.0;
    } else {
      out.value = rho + cfg_.gamma * out.actions[best].q;
      out.er = action_er[static_cast<std::size_t>(best)];
    }
    if (auto* an = audit_node(out.audit_id)) {
      an->value = out.value;
      an->er = out.er;
      an->chosen_action = best;
    }
    return out;
  }

  const PlannerConfig& cfg_;
  const M& model_;
  PlanStats stats_;
  std::shared_ptr<TreeAudit> audit_;
  int root_audit_ = -1;
};

}  // namespace detail

template <BeliefModel M>
PlanResult plan(const ParticleBelief& b, const PlannerConfig& cfg, const M& model,
                RandomStream& rng) {
  cfg.validate();
  detail::PlannerEngine<M> engine(cfg, model);
  return engine.run(b, rng);
}

template <BeliefModel M>
PlanResult plan_unconstrained(const ParticleBelief& b, PlannerConfig cfg, const M& model,
                              RandomStream& rng) {
  cfg.kind = PlannerKind::Unconstrained;
  return plan(b, cfg, model, rng);
}

template <BeliefModel M>
PlanResult plan_pcss(const ParticleBelief& b, PlannerConfig cfg, const M& model,
                     RandomStream& rng) {
  cfg.kind = PlannerKind::PCSS;
  return plan(b, cfg, model, rng);
}

template <BeliefModel M>
PlanResult plan_ccss_is(const ParticleBelief& b, PlannerConfig cfg, const M& model,
                        RandomStream& rng) {
  cfg.kind = PlannerKind::CCSS_IS;
  return plan(b, cfg, model, rng);
}

template <BeliefModel M>
PlanResult plan_fastccss(const ParticleBelief& b, PlannerConfig cfg, const M& model,
                         RandomStream& rng) {
  cfg.kind = PlannerKind::FastCCSS;
  return plan(b, cfg, model, rng);
}

}  // namespace bsp
