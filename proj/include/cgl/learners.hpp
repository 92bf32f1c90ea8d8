#pragma once

#include <span>
#include <vector>

#include "cgl/core.hpp"
#include "cgl/envs.hpp"
#include "cgl/rng.hpp"

namespace cgl {

enum class Method { kRandomPolicy, kQLearning, kGLearning, kContinualG };

const char* method_name(Method m);  // "rp", "ql", "gl", "cgl"

// Agent description: the method plus its prior policies and beta
// coefficients. G-Learning is the single-prior case of the same machinery,
// so both kGLearning and kContinualG carry (priors, betas) of equal length
// M >= 1 with every beta < 0; kRandomPolicy/kQLearning carry none.
struct LearnerKind {
  Method method = Method::kRandomPolicy;
  std::vector<PriorPolicy> priors;
  std::vector<double> betas;

  static LearnerKind random_policy();
  static LearnerKind q_learning();
  static LearnerKind g_learning(PriorPolicy prior, double beta);
  static LearnerKind continual_g(std::vector<PriorPolicy> priors,
                                 std::vector<double> betas);

  void validate(int num_states, int num_actions) const;  // throws on misuse
};

using PolicyDistribution = std::vector<double>;

// Harmonic combination of the beta coefficients used by the multi-prior
// policy and backup: harmonic_scale = 1 / sum_i(1/beta_i) (< 0 when all
// betas are negative); inverse_scale is its reciprocal.
struct BetaCombination {
  double harmonic_scale = 0.0;
  double inverse_scale = 0.0;
  explicit BetaCombination(std::span<const double> betas);
};

// pi(a|s) for the multi-prior learner, computed in the log domain with
// max-subtraction: u(a) = harmonic_scale * (sum_i log(rho_i(a))/beta_i -
// cg(a)), pi = softmax(u). Finite for any finite inputs, |beta| up to 1e8.
PolicyDistribution policy_cg(std::span<const double> cg_row,
                             const std::vector<std::span<const double>>& prior_rows,
                             std::span<const double> betas);

// Undiscounted soft state value -log(sum_a exp(u(a))) / harmonic_scale with
// u as in policy_cg; soft_backup is gamma times this. Monotone
// non-decreasing in every cg entry, finite for all finite inputs.
double soft_value(std::span<const double> cg_row,
                  const std::vector<std::span<const double>>& prior_rows,
                  std::span<const double> betas);

double soft_backup(std::span<const double> cg_next_row,
                   const std::vector<std::span<const double>>& prior_next_rows,
                   std::span<const double> betas, double gamma);

// Inverse-CDF sampling over action indices in ascending order; consumes
// exactly one uniform draw. Fixed convention so runs are bit-reproducible.
ActionId sample_action(const PolicyDistribution& dist, Rng& rng);

// Exploration distribution for Q-learning: epsilon/|A| everywhere plus the
// exploitation mass (1-epsilon) split evenly over the argmax set.
PolicyDistribution epsilon_greedy(std::span<const double> q_row, double epsilon);
ActionId epsilon_greedy(std::span<const double> q_row, double epsilon, Rng& rng);

// One-step value updates. The visit counter for (t.state, t.action) must
// already be incremented; alpha = n^-w. Terminal transitions bootstrap 0.
// Both return the updated entry.
double q_update(ValueTable& table, const Transition& t, const Hyperparams& hp);
double cg_update(ValueTable& table, const Transition& t,
                 const std::vector<PriorPolicy>& priors, const Hyperparams& hp);

// KL divergence sum_a pi(a) log(pi(a)/rho(a)) >= 0; logging/plots only.
double info_cost_diagnostic(const PolicyDistribution& pi,
                            std::span<const double> rho);

// One episode of the (policy -> sample -> step -> count -> update) loop,
// from the initial state until terminal or iter_max steps. RandomPolicy
// performs no updates. Every method consumes exactly one uniform draw per
// step.
EpisodeLog run_episode(const Environment& env, const LearnerKind& learner,
                       ValueTable& table, const Hyperparams& hp, Rng& rng,
                       bool record_trajectory = false);

struct TrainResult {
  ValueTable table;
  std::vector<EpisodeLog> logs;
  std::vector<double> sup_change;  // per-episode sup-norm change of the table
};

// Runs exactly hp.episodes episodes on a fresh table.
TrainResult train(const Environment& env, const LearnerKind& learner,
                  const Hyperparams& hp, Rng& rng);

}  // namespace cgl
