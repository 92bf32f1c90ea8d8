#include "cgl/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cgl {

namespace {

size_t checked_table_size(int num_states, int num_actions) {
  if (num_states <= 0 || num_actions <= 0)
    throw std::invalid_argument("ValueTable: non-positive shape");
  return static_cast<size_t>(num_states) * num_actions;
}

}  // namespace

ValueTable::ValueTable(int num_states, int num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      values_(checked_table_size(num_states, num_actions), 0.0),
      visits_(values_.size(), 0) {}

bool ValueTable::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double ValueTable::sup_diff(const ValueTable& other) const {
  if (other.num_states_ != num_states_ || other.num_actions_ != num_actions_)
    throw std::invalid_argument("ValueTable::sup_diff: shape mismatch");
  double d = 0.0;
  for (size_t k = 0; k < values_.size(); ++k)
    d = std::max(d, std::abs(values_[k] - other.values_[k]));
  return d;
}

PriorPolicy::PriorPolicy(int num_states, int num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      probs_(static_cast<size_t>(num_states) * num_actions,
             num_actions > 0 ? 1.0 / num_actions : 0.0) {
  if (num_states <= 0 || num_actions <= 0)
    throw std::invalid_argument("PriorPolicy: non-positive shape");
}

PriorPolicy PriorPolicy::uniform(int num_states, int num_actions) {
  return PriorPolicy(num_states, num_actions);
}

void PriorPolicy::set_row(StateId s, std::span<const double> row) {
  if (static_cast<int>(row.size()) != num_actions_)
    throw std::invalid_argument("PriorPolicy::set_row: wrong row length");
  std::copy(row.begin(), row.end(),
            probs_.begin() + static_cast<size_t>(s) * num_actions_);
}

std::optional<PriorViolation> validate_prior(const PriorPolicy& p,
                                             int num_states, int num_actions) {
  if (p.num_states() != num_states || p.num_actions() != num_actions)
    return PriorViolation{0, 0, "shape mismatch with environment"};
  for (StateId s = 0; s < num_states; ++s) {
    double sum = 0.0;
    for (ActionId a = 0; a < num_actions; ++a) {
      double v = p.prob(s, a);
      if (!(v > 0.0 && v < 1.0))
        return PriorViolation{s, a, "entry not strictly inside (0,1)"};
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      return PriorViolation{s, 0, "row does not sum to 1 within 1e-12"};
  }
  return std::nullopt;
}

Hyperparams Hyperparams::am_defaults() {
  Hyperparams hp;
  hp.betas = {-700.0, -700.0};
  hp.iter_max = 50;
  hp.replications = 200;
  return hp;
}

void Hyperparams::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("hyperparams: gamma must be in [0,1]");
  if (!(w > 0.5 && w <= 1.0))
    throw std::invalid_argument("hyperparams: w must be in (0.5,1]");
  if (betas.empty())
    throw std::invalid_argument("hyperparams: betas must be non-empty");
  for (double b : betas)
    if (!(b < 0.0))
      throw std::invalid_argument("hyperparams: every beta must be < 0");
  if (iter_max < 1)
    throw std::invalid_argument("hyperparams: iter_max must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("hyperparams: epsilon must be in [0,1]");
  if (episodes < 0)
    throw std::invalid_argument("hyperparams: episodes must be >= 0");
  if (replications < 1)
    throw std::invalid_argument("hyperparams: replications must be >= 1");
}

double learning_rate(long long n, double w) {
  if (n < 1)
    throw std::invalid_argument(
        "learning_rate: n must be >= 1 (increment the counter first)");
  if (!(w > 0.5 && w <= 1.0))
    throw std::invalid_argument("learning_rate: w must be in (0.5,1]");
  return std::pow(static_cast<double>(n), -w);
}

}  // namespace cgl
