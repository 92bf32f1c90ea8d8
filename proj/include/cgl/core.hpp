#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgl {

using StateId = int;
using ActionId = int;

struct Transition {
  StateId state = 0;
  ActionId action = 0;
  double reward = 0.0;
  StateId next_state = 0;
  bool terminal = false;
};

struct EpisodeLog {
  int actions_taken = 0;
  bool reached_goal = false;
  std::vector<Transition> trajectory;  // filled only when recording is requested
};

// Dense state-action value table plus per-cell visit counts.
class ValueTable {
 public:
  ValueTable(int num_states, int num_actions);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double value(StateId s, ActionId a) const { return values_[idx(s, a)]; }
  double& value(StateId s, ActionId a) { return values_[idx(s, a)]; }
  long long visit(StateId s, ActionId a) const { return visits_[idx(s, a)]; }
  long long& visit(StateId s, ActionId a) { return visits_[idx(s, a)]; }

  std::span<const double> row(StateId s) const {
    return {values_.data() + static_cast<size_t>(s) * num_actions_,
            static_cast<size_t>(num_actions_)};
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const;
  // sup-norm of the elementwise difference; tables must have equal shape
  double sup_diff(const ValueTable& other) const;

 private:
  size_t idx(StateId s, ActionId a) const {
    return static_cast<size_t>(s) * num_actions_ + a;
  }
  int num_states_;
  int num_actions_;
  std::vector<double> values_;
  std::vector<long long> visits_;
};

// Per-state probability distribution over actions, entries strictly in (0,1).
class PriorPolicy {
 public:
  PriorPolicy(int num_states, int num_actions);
  static PriorPolicy uniform(int num_states, int num_actions);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double prob(StateId s, ActionId a) const { return probs_[idx(s, a)]; }
  double& prob(StateId s, ActionId a) { return probs_[idx(s, a)]; }
  std::span<const double> row(StateId s) const {
    return {probs_.data() + static_cast<size_t>(s) * num_actions_,
            static_cast<size_t>(num_actions_)};
  }
  void set_row(StateId s, std::span<const double> row);

 private:
  size_t idx(StateId s, ActionId a) const {
    return static_cast<size_t>(s) * num_actions_ + a;
  }
  int num_states_;
  int num_actions_;
  std::vector<double> probs_;
};

struct PriorViolation {
  StateId state = 0;
  ActionId action = 0;
  std::string what;
};

// Checks shape, strict (0,1) entries and row sums within 1e-12.
// Returns the first offending cell, or nullopt when the prior is valid.
std::optional<PriorViolation> validate_prior(const PriorPolicy& p,
                                             int num_states, int num_actions);

struct Hyperparams {
  double gamma = 0.9;
  double w = 0.6;
  std::vector<double> betas = {-2000.0, -2000.0};
  int iter_max = 1000;
  double reward_goal = 1.0;
  double reward_other = 0.0;
  double epsilon = 0.1;  // Q-learning exploration rate
  int episodes = 100;
  int replications = 50;
  std::uint64_t seed = 42;

  // Defaults used by the fabrication-process experiments.
  static Hyperparams am_defaults();

  void validate() const;  // throws std::invalid_argument on violation
};

// alpha = n^-w, defined for n >= 1 only (counters are incremented before the
// rate is computed, so the first update sees alpha = 1).
double learning_rate(long long n, double w);

}  // namespace cgl
