#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cgl/envs.hpp"
#include "cgl/learners.hpp"

namespace cgl {

// Exhaustive enumeration of a deterministic environment's dynamics.
struct ExplicitModel {
  int num_states = 0;
  int num_actions = 0;
  std::vector<StateId> next;        // |S|*|A|
  std::vector<double> reward;       // |S|*|A|
  std::vector<std::uint8_t> terminal;  // |S|*|A|, transition-terminal flags

  static ExplicitModel from_env(const Environment& env);
  size_t idx(StateId s, ActionId a) const {
    return static_cast<size_t>(s) * num_actions + a;
  }
};

// One synchronous policy-evaluation sweep: for every (s, a),
//   out(s,a) = r(s,a) + gamma * sum_a' pi(a'|s') [ sum_i (1/beta_i) *
//              log(pi(a'|s')/rho_i(a'|s')) + cg(s',a') ],
// with zero continuation on terminal transitions. Contraction with modulus
// gamma in the sup norm. `parallel` toggles the OpenMP path; both paths are
// bit-identical (synchronous semantics, no cross-state dependence).
std::vector<double> apply_b_pi(const ExplicitModel& model,
                               const std::vector<PolicyDistribution>& pi,
                               const std::vector<PriorPolicy>& priors,
                               std::span<const double> betas,
                               const std::vector<double>& cg, double gamma,
                               bool parallel = true);

// One synchronous optimal sweep: out(s,a) = r(s,a) + soft_backup(next row).
// Shares the soft-backup kernel with the learners (single source of truth).
std::vector<double> apply_b_star(const ExplicitModel& model,
                                 const std::vector<PriorPolicy>& priors,
                                 std::span<const double> betas,
                                 const std::vector<double>& cg, double gamma,
                                 bool parallel = true);

struct FixedPointReport {
  std::vector<double> cg_star;
  int iterations = 0;
  double residual = 0.0;  // sup norm of one more sweep minus cg_star
  bool converged = false;
};

// Iterates apply_b_star from zero until the sup-norm change drops below tol
// (or max_sweeps is hit; the report then carries converged = false).
FixedPointReport solve_fixed_point(const ExplicitModel& model,
                                   const std::vector<PriorPolicy>& priors,
                                   std::span<const double> betas, double gamma,
                                   double tol = 1e-10, int max_sweeps = 10000,
                                   bool parallel = true);

struct BfsResult {
  int length = 0;
  std::vector<std::pair<StateId, ActionId>> path;
};

// Exact unweighted shortest path from the initial state to any terminal
// state over the environment's transition graph, self-loops excluded.
// Independent of all value/backup machinery. Throws when unreachable.
BfsResult bfs_shortest(const Environment& env);

// Per-state argmax of the value table, ties broken by lowest action index.
std::vector<ActionId> greedy_policy(const std::vector<double>& cg,
                                    int num_states, int num_actions);

struct GreedyTrace {
  std::vector<std::pair<StateId, ActionId>> steps;
  bool reached_goal = false;
};

// Follows the greedy policy from the initial state; stops at a terminal
// state, on a revisit (cycle), or after max_len steps.
GreedyTrace greedy_trajectory(const Environment& env,
                              const std::vector<double>& cg,
                              int max_len = 10000);

}  // namespace cgl
