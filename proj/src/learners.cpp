#include "cgl/learners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cgl {

const char* method_name(Method m) {
  switch (m) {
    case Method::kRandomPolicy: return "rp";
    case Method::kQLearning: return "ql";
    case Method::kGLearning: return "gl";
    case Method::kContinualG: return "cgl";
  }
  return "?";
}

LearnerKind LearnerKind::random_policy() {
  return LearnerKind{Method::kRandomPolicy, {}, {}};
}

LearnerKind LearnerKind::q_learning() {
  return LearnerKind{Method::kQLearning, {}, {}};
}

LearnerKind LearnerKind::g_learning(PriorPolicy prior, double beta) {
  LearnerKind lk;
  lk.method = Method::kGLearning;
  lk.priors.push_back(std::move(prior));
  lk.betas.push_back(beta);
  return lk;
}

LearnerKind LearnerKind::continual_g(std::vector<PriorPolicy> priors,
                                     std::vector<double> betas) {
  LearnerKind lk;
  lk.method = Method::kContinualG;
  lk.priors = std::move(priors);
  lk.betas = std::move(betas);
  return lk;
}

void LearnerKind::validate(int num_states, int num_actions) const {
  const bool uses_priors =
      method == Method::kGLearning || method == Method::kContinualG;
  if (!uses_priors) {
    if (!priors.empty() || !betas.empty())
      throw std::invalid_argument("learner: this method takes no priors");
    return;
  }
  if (priors.empty() || priors.size() != betas.size())
    throw std::invalid_argument(
        "learner: priors and betas must have equal length M >= 1");
  if (method == Method::kGLearning && priors.size() != 1)
    throw std::invalid_argument("learner: g-learning takes exactly one prior");
  for (double b : betas)
    if (!(b < 0.0)) throw std::invalid_argument("learner: every beta must be < 0");
  for (const auto& p : priors)
    if (auto v = validate_prior(p, num_states, num_actions))
      throw std::invalid_argument("learner: invalid prior at state " +
                                  std::to_string(v->state) + ": " + v->what);
}

BetaCombination::BetaCombination(std::span<const double> betas) {
  if (betas.empty())
    throw std::invalid_argument("beta combination: empty beta list");
  double inv = 0.0;
  for (double b : betas) {
    if (b == 0.0 || !std::isfinite(b))
      throw std::invalid_argument("beta combination: betas must be finite, nonzero");
    inv += 1.0 / b;
  }
  inverse_scale = inv;
  harmonic_scale = 1.0 / inv;
}

namespace {

// u(a) = harmonic_scale * (sum_i log(rho_i(a)) / beta_i - cg(a)).
// The policy is softmax(u) and the soft value is -logsumexp(u)/harmonic_scale;
// keeping everything in the log domain makes both safe for |beta| up to 1e8
// and |cg| up to 1e3 and beyond.
void scores(std::span<const double> cg_row,
            const std::vector<std::span<const double>>& prior_rows,
            std::span<const double> betas, const BetaCombination& bc,
            std::vector<double>& u) {
  const size_t A = cg_row.size();
  u.assign(A, 0.0);
  for (size_t a = 0; a < A; ++a) {
    if (!std::isfinite(cg_row[a]))
      throw std::invalid_argument("soft kernel: non-finite value entry");
    double z = 0.0;
    for (size_t m = 0; m < prior_rows.size(); ++m) {
      double rho = prior_rows[m][a];
      if (!(rho > 0.0))
        throw std::invalid_argument("soft kernel: prior entries must be > 0");
      z += std::log(rho) / betas[m];
    }
    u[a] = bc.harmonic_scale * (z - cg_row[a]);
  }
}

double log_sum_exp(const std::vector<double>& u) {
  double m = *std::max_element(u.begin(), u.end());
  double s = 0.0;
  for (double x : u) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

PolicyDistribution policy_cg(std::span<const double> cg_row,
                             const std::vector<std::span<const double>>& prior_rows,
                             std::span<const double> betas) {
  if (prior_rows.empty() || prior_rows.size() != betas.size())
    throw std::invalid_argument("policy: M priors need M betas, M >= 1");
  BetaCombination bc(betas);
  std::vector<double> u;
  scores(cg_row, prior_rows, betas, bc, u);
  double m = *std::max_element(u.begin(), u.end());
  PolicyDistribution pi(u.size());
  double z = 0.0;
  for (size_t a = 0; a < u.size(); ++a) {
    pi[a] = std::exp(u[a] - m);
    z += pi[a];
  }
  for (double& p : pi) p /= z;
  return pi;
}

double soft_value(std::span<const double> cg_row,
                  const std::vector<std::span<const double>>& prior_rows,
                  std::span<const double> betas) {
  BetaCombination bc(betas);
  std::vector<double> u;
  scores(cg_row, prior_rows, betas, bc, u);
  return -log_sum_exp(u) / bc.harmonic_scale;
}

double soft_backup(std::span<const double> cg_next_row,
                   const std::vector<std::span<const double>>& prior_next_rows,
                   std::span<const double> betas, double gamma) {
  return gamma * soft_value(cg_next_row, prior_next_rows, betas);
}

ActionId sample_action(const PolicyDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t a = 0; a < dist.size(); ++a) {
    acc += dist[a];
    if (u < acc) return static_cast<ActionId>(a);
  }
  return static_cast<ActionId>(dist.size() - 1);  // guard against rounding
}

PolicyDistribution epsilon_greedy(std::span<const double> q_row,
                                  double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon_greedy: epsilon must be in [0,1]");
  const size_t A = q_row.size();
  const double best = *std::max_element(q_row.begin(), q_row.end());
  int ties = 0;
  for (double v : q_row) ties += (v == best);
  PolicyDistribution dist(A, epsilon / static_cast<double>(A));
  for (size_t a = 0; a < A; ++a)
    if (q_row[a] == best) dist[a] += (1.0 - epsilon) / ties;
  return dist;
}

ActionId epsilon_greedy(std::span<const double> q_row, double epsilon,
                        Rng& rng) {
  return sample_action(epsilon_greedy(q_row, epsilon), rng);
}

double q_update(ValueTable& table, const Transition& t,
                const Hyperparams& hp) {
  const double alpha = learning_rate(table.visit(t.state, t.action), hp.w);
  double bootstrap = 0.0;
  if (!t.terminal) {
    auto row = table.row(t.next_state);
    bootstrap = *std::max_element(row.begin(), row.end());
  }
  double& entry = table.value(t.state, t.action);
  entry = (1.0 - alpha) * entry + alpha * (t.reward + hp.gamma * bootstrap);
  return entry;
}

double cg_update(ValueTable& table, const Transition& t,
                 const std::vector<PriorPolicy>& priors,
                 const Hyperparams& hp) {
  const double alpha = learning_rate(table.visit(t.state, t.action), hp.w);
  double target = t.reward;
  if (!t.terminal) {
    std::vector<std::span<const double>> rows;
    rows.reserve(priors.size());
    for (const auto& p : priors) rows.push_back(p.row(t.next_state));
    target += soft_backup(table.row(t.next_state), rows, hp.betas, hp.gamma);
  }
  double& entry = table.value(t.state, t.action);
  entry = (1.0 - alpha) * entry + alpha * target;
  return entry;
}

double info_cost_diagnostic(const PolicyDistribution& pi,
                            std::span<const double> rho) {
  if (pi.size() != rho.size())
    throw std::invalid_argument("info cost: length mismatch");
  double kl = 0.0;
  for (size_t a = 0; a < pi.size(); ++a) {
    if (!(rho[a] > 0.0))
      throw std::invalid_argument("info cost: rho entries must be > 0");
    if (pi[a] > 0.0) kl += pi[a] * std::log(pi[a] / rho[a]);
  }
  return kl;
}

namespace {

PolicyDistribution behavior_distribution(const LearnerKind& lk,
                                         const ValueTable& table, StateId s,
                                         const Hyperparams& hp) {
  switch (lk.method) {
    case Method::kRandomPolicy:
      return PolicyDistribution(table.num_actions(),
                                1.0 / table.num_actions());
    case Method::kQLearning:
      return epsilon_greedy(table.row(s), hp.epsilon);
    case Method::kGLearning:
    case Method::kContinualG: {
      std::vector<std::span<const double>> rows;
      rows.reserve(lk.priors.size());
      for (const auto& p : lk.priors) rows.push_back(p.row(s));
      return policy_cg(table.row(s), rows, lk.betas);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

EpisodeLog run_episode(const Environment& env, const LearnerKind& learner,
                       ValueTable& table, const Hyperparams& hp, Rng& rng,
                       bool record_trajectory) {
  EpisodeLog log;
  StateId s = env.initial_state();
  int iter = 0;
  while (!env.is_terminal(s) && iter < hp.iter_max) {
    PolicyDistribution dist = behavior_distribution(learner, table, s, hp);
    ActionId a = sample_action(dist, rng);
    Transition t = env.step(s, a);
    ++iter;
    if (learner.method != Method::kRandomPolicy) {
      ++table.visit(t.state, t.action);
      if (learner.method == Method::kQLearning)
        q_update(table, t, hp);
      else
        cg_update(table, t, learner.priors, hp);
    }
    ++log.actions_taken;
    if (record_trajectory) log.trajectory.push_back(t);
    s = t.next_state;
  }
  log.reached_goal = env.is_terminal(s);
  return log;
}

TrainResult train(const Environment& env, const LearnerKind& learner,
                  const Hyperparams& hp, Rng& rng) {
  hp.validate();
  learner.validate(env.num_states(), env.num_actions());
  if ((learner.method == Method::kGLearning ||
       learner.method == Method::kContinualG) &&
      learner.betas != hp.betas)
    throw std::invalid_argument(
        "train: learner betas disagree with hyperparams betas");
  TrainResult result{ValueTable(env.num_states(), env.num_actions()), {}, {}};
  result.logs.reserve(hp.episodes);
  result.sup_change.reserve(hp.episodes);
  for (int ep = 0; ep < hp.episodes; ++ep) {
    ValueTable before = result.table;
    result.logs.push_back(run_episode(env, learner, result.table, hp, rng));
    result.sup_change.push_back(result.table.sup_diff(before));
  }
  return result;
}

}  // namespace cgl
