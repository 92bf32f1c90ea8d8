#include "cgl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace cgl {

ExplicitModel ExplicitModel::from_env(const Environment& env) {
  ExplicitModel m;
  m.num_states = env.num_states();
  m.num_actions = env.num_actions();
  const size_t cells = static_cast<size_t>(m.num_states) * m.num_actions;
  m.next.resize(cells);
  m.reward.resize(cells);
  m.terminal.resize(cells);
  for (StateId s = 0; s < m.num_states; ++s) {
    for (ActionId a = 0; a < m.num_actions; ++a) {
      Transition t = env.step(s, a);
      m.next[m.idx(s, a)] = t.next_state;
      m.reward[m.idx(s, a)] = t.reward;
      m.terminal[m.idx(s, a)] = t.terminal ? 1 : 0;
    }
  }
  return m;
}

std::vector<double> apply_b_pi(const ExplicitModel& model,
                               const std::vector<PolicyDistribution>& pi,
                               const std::vector<PriorPolicy>& priors,
                               std::span<const double> betas,
                               const std::vector<double>& cg, double gamma,
                               bool parallel) {
  const int S = model.num_states;
  const int A = model.num_actions;
  if (static_cast<int>(pi.size()) != S)
    throw std::invalid_argument("apply_b_pi: policy has wrong state count");
  if (priors.size() != betas.size() || priors.empty())
    throw std::invalid_argument("apply_b_pi: M priors need M betas");
  std::vector<double> out(cg.size());
  // Precompute the per-state continuation sum_a' pi [ info-cost + cg ];
  // product-form terms with pi(a') = 0 contribute nothing.
  std::vector<double> cont(S);
#pragma omp parallel for schedule(static) if (parallel)
  for (StateId sp = 0; sp < S; ++sp) {
    double v = 0.0;
    for (ActionId ap = 0; ap < A; ++ap) {
      const double p = pi[sp][ap];
      if (p <= 0.0) continue;
      double info = 0.0;
      for (size_t m = 0; m < priors.size(); ++m)
        info += std::log(p / priors[m].prob(sp, ap)) / betas[m];
      v += p * (info + cg[model.idx(sp, ap)]);
    }
    cont[sp] = v;
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const size_t k = model.idx(s, a);
      out[k] = model.reward[k] +
               (model.terminal[k] ? 0.0 : gamma * cont[model.next[k]]);
    }
  }
  return out;
}

std::vector<double> apply_b_star(const ExplicitModel& model,
                                 const std::vector<PriorPolicy>& priors,
                                 std::span<const double> betas,
                                 const std::vector<double>& cg, double gamma,
                                 bool parallel) {
  const int S = model.num_states;
  const int A = model.num_actions;
  if (priors.size() != betas.size() || priors.empty())
    throw std::invalid_argument("apply_b_star: M priors need M betas");
  std::vector<double> out(cg.size());
  std::vector<double> soft(S);
#pragma omp parallel for schedule(static) if (parallel)
  for (StateId sp = 0; sp < S; ++sp) {
    std::vector<std::span<const double>> rows;
    rows.reserve(priors.size());
    for (const auto& p : priors) rows.push_back(p.row(sp));
    std::span<const double> row(cg.data() + static_cast<size_t>(sp) * A,
                                static_cast<size_t>(A));
    soft[sp] = soft_value(row, rows, betas);
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const size_t k = model.idx(s, a);
      out[k] = model.reward[k] +
               (model.terminal[k] ? 0.0 : gamma * soft[model.next[k]]);
    }
  }
  return out;
}

FixedPointReport solve_fixed_point(const ExplicitModel& model,
                                   const std::vector<PriorPolicy>& priors,
                                   std::span<const double> betas, double gamma,
                                   double tol, int max_sweeps, bool parallel) {
  if (!(gamma < 1.0))
    throw std::invalid_argument("solve_fixed_point: needs gamma < 1");
  FixedPointReport report;
  report.cg_star.assign(
      static_cast<size_t>(model.num_states) * model.num_actions, 0.0);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    std::vector<double> next =
        apply_b_star(model, priors, betas, report.cg_star, gamma, parallel);
    double delta = 0.0;
    for (size_t k = 0; k < next.size(); ++k)
      delta = std::max(delta, std::abs(next[k] - report.cg_star[k]));
    report.cg_star = std::move(next);
    report.iterations = sweep;
    if (delta < tol) {
      report.converged = true;
      break;
    }
  }
  std::vector<double> check =
      apply_b_star(model, priors, betas, report.cg_star, gamma, parallel);
  double residual = 0.0;
  for (size_t k = 0; k < check.size(); ++k)
    residual = std::max(residual, std::abs(check[k] - report.cg_star[k]));
  report.residual = residual;
  if (residual > tol) report.converged = false;
  return report;
}

BfsResult bfs_shortest(const Environment& env) {
  const int S = env.num_states();
  std::vector<int> dist(S, -1);
  std::vector<std::pair<StateId, ActionId>> parent(S, {-1, -1});
  std::deque<StateId> queue;
  StateId start = env.initial_state();
  dist[start] = 0;
  queue.push_back(start);
  StateId goal = -1;
  if (env.is_terminal(start)) goal = start;
  while (!queue.empty() && goal < 0) {
    StateId s = queue.front();
    queue.pop_front();
    for (ActionId a = 0; a < env.num_actions(); ++a) {
      StateId ns = env.step(s, a).next_state;
      if (ns == s || dist[ns] >= 0) continue;  // self-loops excluded
      dist[ns] = dist[s] + 1;
      parent[ns] = {s, a};
      if (env.is_terminal(ns)) {
        goal = ns;
        break;
      }
      queue.push_back(ns);
    }
  }
  if (goal < 0) throw std::runtime_error("bfs_shortest: goal unreachable");
  BfsResult result;
  result.length = dist[goal];
  for (StateId s = goal; parent[s].first >= 0; s = parent[s].first)
    result.path.push_back({parent[s].first, parent[s].second});
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

std::vector<ActionId> greedy_policy(const std::vector<double>& cg,
                                    int num_states, int num_actions) {
  if (cg.size() != static_cast<size_t>(num_states) * num_actions)
    throw std::invalid_argument("greedy_policy: shape mismatch");
  std::vector<ActionId> actions(num_states, 0);
  for (StateId s = 0; s < num_states; ++s) {
    const double* row = cg.data() + static_cast<size_t>(s) * num_actions;
    int best = 0;
    for (ActionId a = 1; a < num_actions; ++a)
      if (row[a] > row[best]) best = a;  // strict: lowest index wins ties
    actions[s] = best;
  }
  return actions;
}

GreedyTrace greedy_trajectory(const Environment& env,
                              const std::vector<double>& cg, int max_len) {
  std::vector<ActionId> policy =
      greedy_policy(cg, env.num_states(), env.num_actions());
  GreedyTrace trace;
  std::vector<char> seen(env.num_states(), 0);
  StateId s = env.initial_state();
  while (!env.is_terminal(s) && static_cast<int>(trace.steps.size()) < max_len) {
    if (seen[s]) return trace;  // cycle: greedy policy does not reach the goal
    seen[s] = 1;
    ActionId a = policy[s];
    trace.steps.push_back({s, a});
    s = env.step(s, a).next_state;
  }
  trace.reached_goal = env.is_terminal(s);
  return trace;
}

}  // namespace cgl
