#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgl/envs.hpp"
#include "cgl/learners.hpp"
#include "cgl/rng.hpp"

using namespace cgl;

namespace {

// direct reference form of the two-prior policy:
//   pi propto rho1^(b2/(b1+b2)) * rho2^(b1/(b1+b2)) * exp(-cg * b1*b2/(b1+b2))
PolicyDistribution two_prior_reference(const std::vector<double>& cg,
                                       std::span<const double> rho1,
                                       std::span<const double> rho2, double b1,
                                       double b2) {
  const double w1 = b2 / (b1 + b2);
  const double w2 = b1 / (b1 + b2);
  const double c = b1 * b2 / (b1 + b2);
  PolicyDistribution pi(cg.size());
  double sum = 0.0;
  for (size_t a = 0; a < cg.size(); ++a) {
    pi[a] = std::pow(rho1[a], w1) * std::pow(rho2[a], w2) *
            std::exp(-c * cg[a]);
    sum += pi[a];
  }
  for (double& v : pi) v /= sum;
  return pi;
}

PriorPolicy row_prior(const std::vector<double>& row) {
  PriorPolicy p(1, static_cast<int>(row.size()));
  p.set_row(0, row);
  return p;
}

// one non-terminal state, one absorbing goal, two actions: 0 finishes, 1 loops
class TwoStateChain final : public Environment {
 public:
  int num_states() const override { return 2; }
  int num_actions() const override { return 2; }
  StateId initial_state() const override { return 0; }
  bool is_terminal(StateId s) const override { return s == 1; }
  Transition step(StateId s, ActionId a) const override {
    Transition t;
    t.state = s;
    t.action = a;
    if (s == 1 || a == 1) {
      t.next_state = s;
      t.reward = 0.0;
      t.terminal = s == 1;
    } else {
      t.next_state = 1;
      t.reward = 1.0;
      t.terminal = true;
    }
    return t;
  }
  std::string describe_state(StateId s) const override {
    return s == 0 ? "start" : "goal";
  }
};

class NoExitEnv final : public Environment {
 public:
  int num_states() const override { return 2; }
  int num_actions() const override { return 2; }
  StateId initial_state() const override { return 0; }
  bool is_terminal(StateId) const override { return false; }
  Transition step(StateId s, ActionId a) const override {
    return Transition{s, a, 0.0, 1 - s, false};
  }
  std::string describe_state(StateId) const override { return "nowhere"; }
};

}  // namespace

TEST_CASE("method names are the canonical short tokens") {
  CHECK(std::string(method_name(Method::kRandomPolicy)) == "rp");
  CHECK(std::string(method_name(Method::kQLearning)) == "ql");
  CHECK(std::string(method_name(Method::kGLearning)) == "gl");
  CHECK(std::string(method_name(Method::kContinualG)) == "cgl");
}

TEST_CASE("learner factories wire priors and betas consistently") {
  LearnerKind rp = LearnerKind::random_policy();
  CHECK(rp.priors.empty());
  CHECK_NOTHROW(rp.validate(5, 4));

  LearnerKind gl = LearnerKind::g_learning(PriorPolicy::uniform(5, 4), -2000.0);
  CHECK(gl.priors.size() == 1);
  CHECK(gl.betas.size() == 1);
  CHECK_NOTHROW(gl.validate(5, 4));
  CHECK_THROWS_AS(gl.validate(6, 4), std::invalid_argument);  // prior mismatch

  LearnerKind cg = LearnerKind::continual_g(
      {PriorPolicy::uniform(5, 4), PriorPolicy::uniform(5, 4)},
      {-2000.0, -2000.0});
  CHECK_NOTHROW(cg.validate(5, 4));

  CHECK_THROWS_AS(LearnerKind::continual_g({PriorPolicy::uniform(5, 4)},
                                           {-2000.0, -2000.0})
                      .validate(5, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      LearnerKind::g_learning(PriorPolicy::uniform(5, 4), 10.0).validate(5, 4),
      std::invalid_argument);
}

TEST_CASE("beta combination is the harmonic sum") {
  std::vector<double> both{-2000.0, -2000.0};
  BetaCombination bc(both);
  CHECK(bc.harmonic_scale == doctest::Approx(-1000.0).epsilon(1e-15));
  CHECK(bc.inverse_scale == doctest::Approx(-0.001).epsilon(1e-15));
  std::vector<double> one{-700.0};
  CHECK(BetaCombination(one).harmonic_scale ==
        doctest::Approx(-700.0).epsilon(1e-15));
}

TEST_CASE("with zero values the single-prior policy is the prior itself") {
  std::vector<double> cg(4, 0.0);
  PriorPolicy rho = row_prior({0.5, 0.2, 0.2, 0.1});
  std::vector<double> betas{-2000.0};
  PolicyDistribution pi = policy_cg(cg, {rho.row(0)}, betas);
  CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pi[1] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(pi[3] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("with equal betas and zero values two priors fuse geometrically") {
  std::vector<double> cg(4, 0.0);
  PriorPolicy rho1 = row_prior({0.9, 0.1 / 3, 0.1 / 3, 0.1 / 3});
  PriorPolicy rho2 = row_prior({0.25, 0.25, 0.25, 0.25});
  std::vector<double> betas{-2000.0, -2000.0};
  PolicyDistribution pi = policy_cg(cg, {rho1.row(0), rho2.row(0)}, betas);
  // pi propto sqrt(rho1 * rho2); the flat factor cancels
  CHECK(pi[0] == doctest::Approx(0.6339745962155614).epsilon(1e-13));
  CHECK(pi[1] == doctest::Approx(0.12200846792814621).epsilon(1e-13));
  CHECK(pi[2] == doctest::Approx(pi[1]).epsilon(1e-13));
  double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("the fused policy matches the direct two-prior form") {
  std::vector<double> cg{0.2, -0.1, 0.0, 0.4};
  PriorPolicy rho1 = row_prior({0.5, 0.2, 0.2, 0.1});
  PriorPolicy rho2 = row_prior({0.1, 0.4, 0.25, 0.25});
  std::vector<double> betas{-7.0, -3.0};
  PolicyDistribution pi = policy_cg(cg, {rho1.row(0), rho2.row(0)}, betas);
  PolicyDistribution ref =
      two_prior_reference(cg, rho1.row(0), rho2.row(0), -7.0, -3.0);
  for (int a = 0; a < 4; ++a)
    CHECK(pi[a] == doctest::Approx(ref[a]).epsilon(1e-12));
  // frozen spot values for the same instance
  CHECK(pi[0] == doctest::Approx(0.20837134956108769).epsilon(1e-12));
  CHECK(pi[3] == doctest::Approx(0.37162822556212177).epsilon(1e-12));
}

TEST_CASE("a prior stated once at beta equals the same prior twice at 2*beta") {
  Rng rng(11);
  for (int it = 0; it < 50; ++it) {
    std::vector<double> cg(4), row(4);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) {
      cg[a] = 4.0 * rng.uniform() - 2.0;
      row[a] = 0.05 + rng.uniform();
      sum += row[a];
    }
    for (double& v : row) v /= sum;
    PriorPolicy rho = row_prior(row);
    double beta = -std::pow(10.0, 1.0 + 3.0 * rng.uniform());
    PolicyDistribution one =
        policy_cg(cg, {rho.row(0)}, std::vector<double>{beta});
    PolicyDistribution two =
        policy_cg(cg, {rho.row(0), rho.row(0)},
                  std::vector<double>{2.0 * beta, 2.0 * beta});
    for (int a = 0; a < 4; ++a)
      CHECK(one[a] == doctest::Approx(two[a]).epsilon(1e-12));
  }
}

TEST_CASE("soft value matches its closed form and vanishes on zero rows") {
  std::vector<double> cg{0.3, -0.2, 0.1, 0.0};
  PriorPolicy rho = row_prior({0.5, 0.2, 0.2, 0.1});
  std::vector<double> betas{-10.0};
  double v = soft_value(cg, {rho.row(0)}, betas);
  CHECK(v == doctest::Approx(0.23715038709032124).epsilon(1e-12));

  std::vector<double> zeros(4, 0.0);
  CHECK(std::abs(soft_value(zeros, {rho.row(0)}, betas)) <= 1e-12);
  std::vector<double> betas2{-2000.0, -700.0};
  CHECK(std::abs(soft_value(zeros, {rho.row(0), rho.row(0)}, betas2)) <= 1e-12);
}

TEST_CASE("soft value is monotone and shift-equivariant") {
  std::vector<double> cg{0.3, -0.2, 0.1, 0.0};
  PriorPolicy rho = row_prior({0.5, 0.2, 0.2, 0.1});
  std::vector<double> betas{-10.0};
  double base = soft_value(cg, {rho.row(0)}, betas);

  std::vector<double> raised = cg;
  raised[1] += 0.5;
  CHECK(soft_value(raised, {rho.row(0)}, betas) >= base);

  std::vector<double> shifted = cg;
  for (double& x : shifted) x += 3.25;
  CHECK(soft_value(shifted, {rho.row(0)}, betas) ==
        doctest::Approx(base + 3.25).epsilon(1e-12));
}

TEST_CASE("soft backup approaches the hard maximum as beta grows") {
  std::vector<double> cg{0.3, -0.2, 0.9, 0.0};
  PriorPolicy rho = row_prior({0.4, 0.3, 0.2, 0.1});
  std::vector<double> betas{-1e8};
  double backup = soft_backup(cg, {rho.row(0)}, betas, 0.9);
  CHECK(backup == doctest::Approx(0.9 * 0.9).epsilon(1e-4));
  CHECK(std::isfinite(soft_backup(cg, {rho.row(0)}, betas, 0.0)));
  CHECK(soft_backup(cg, {rho.row(0)}, betas, 0.0) == 0.0);
}

TEST_CASE("the policy stays normalized under extreme inputs") {
  PriorPolicy rho = row_prior({1e-9, 1.0 - 3e-9, 1e-9, 1e-9});
  std::vector<double> cg{500.0, -500.0, 0.0, 250.0};
  std::vector<double> betas{-1e6, -1e6};
  PolicyDistribution pi = policy_cg(cg, {rho.row(0), rho.row(0)}, betas);
  double sum = 0.0;
  for (double v : pi) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("action sampling follows the distribution") {
  PolicyDistribution dist{0.2, 0.3, 0.5};
  Rng rng(123);
  std::vector<int> counts(3, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_action(dist, rng)];
  for (int a = 0; a < 3; ++a)
    CHECK(static_cast<double>(counts[a]) / draws ==
          doctest::Approx(dist[a]).epsilon(0.05));

  // chi-squared fit against the uniform distribution, 3 dof, alpha = 0.001
  PolicyDistribution flat{0.25, 0.25, 0.25, 0.25};
  std::vector<int> flat_counts(4, 0);
  for (int i = 0; i < draws; ++i) ++flat_counts[sample_action(flat, rng)];
  double chi2 = 0.0;
  for (int a = 0; a < 4; ++a) {
    double expected = draws * 0.25;
    chi2 += (flat_counts[a] - expected) * (flat_counts[a] - expected) /
            expected;
  }
  CHECK(chi2 < 16.266);
}

TEST_CASE("sampling consumes exactly one draw per call") {
  PolicyDistribution dist{0.5, 0.5};
  Rng a(99), b(99);
  sample_action(dist, a);
  b.uniform();
  // after one call each, the streams must still agree
  CHECK(a.uniform() == b.uniform());
}

TEST_CASE("exploration distribution splits ties over the argmax set") {
  std::vector<double> q{0.1, 0.5, 0.5, 0.2};
  PolicyDistribution dist = epsilon_greedy(q, 0.2);
  CHECK(dist[0] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(dist[1] == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(dist[2] == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(dist[3] == doctest::Approx(0.05).epsilon(1e-14));

  PolicyDistribution pure = epsilon_greedy(q, 0.0);
  CHECK(pure[0] == 0.0);
  CHECK(pure[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pure[2] == doctest::Approx(0.5).epsilon(1e-14));

  PolicyDistribution random = epsilon_greedy(q, 1.0);
  for (double v : random) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("a unique maximizer is exploited at rate 1 - eps + eps/|A|") {
  std::vector<double> q{1.0, 2.0, 3.0, 0.0};
  Rng rng(5);
  int hits = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) hits += epsilon_greedy(q, 0.1, rng) == 2;
  CHECK(static_cast<double>(hits) / draws == doctest::Approx(0.925).epsilon(0.012));
}

TEST_CASE("the action-value update blends toward the bootstrapped target") {
  Hyperparams hp;
  hp.w = 1.0;  // alpha = 1/n, so the second visit uses exactly 0.5
  hp.gamma = 0.9;
  ValueTable table(2, 2);
  table.value(0, 0) = 0.4;
  table.value(1, 0) = 0.8;
  table.value(1, 1) = 0.3;
  table.visit(0, 0) = 2;

  Transition t{0, 0, 0.0, 1, false};
  double updated = q_update(table, t, hp);
  CHECK(updated == doctest::Approx(0.56).epsilon(1e-15));
  CHECK(table.value(0, 0) == updated);

  // terminal transitions bootstrap nothing
  table.value(0, 0) = 0.4;
  Transition done{0, 0, 1.0, 1, true};
  CHECK(q_update(table, done, hp) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("the fused update follows the visit-indexed blend exactly") {
  // repeated terminal transition with reward 1: after visits n = 2..6
  // the value is 1 - prod(1 - n^-0.6), tracked here independently
  Hyperparams hp;
  ValueTable table(2, 2);
  std::vector<PriorPolicy> priors{PriorPolicy::uniform(2, 2)};
  hp.betas = {-2000.0};
  Transition t{0, 0, 1.0, 1, true};

  const double expect[] = {0.6597539553864471, 0.83575706151169715,
                           0.90724795282089854, 0.94256151280819001,
                           0.96216404802496425};
  for (int k = 0; k < 5; ++k) {
    table.visit(0, 0) = k + 2;
    cg_update(table, t, priors, hp);
    CHECK(table.value(0, 0) == doctest::Approx(expect[k]).epsilon(1e-13));
  }
}

TEST_CASE("non-terminal updates bootstrap the soft continuation") {
  Hyperparams hp;
  hp.betas = {-2000.0};
  ValueTable table(2, 4);
  std::vector<PriorPolicy> priors{PriorPolicy::uniform(2, 4)};
  Transition t{0, 1, 0.0, 1, false};
  table.visit(0, 1) = 1;  // alpha = 1
  cg_update(table, t, priors, hp);
  CHECK(std::abs(table.value(0, 1)) <= 1e-12);  // zero next row, zero target

  for (ActionId a = 0; a < 4; ++a) table.value(1, a) = 2.0;
  table.visit(0, 1) = 1;
  table.value(0, 1) = 0.0;
  cg_update(table, t, priors, hp);
  CHECK(table.value(0, 1) == doctest::Approx(1.8).epsilon(1e-12));
}

TEST_CASE("information cost is a divergence") {
  PolicyDistribution uniform{0.25, 0.25, 0.25, 0.25};
  PriorPolicy rho = row_prior({0.25, 0.25, 0.25, 0.25});
  CHECK(std::abs(info_cost_diagnostic(uniform, rho.row(0))) <= 1e-15);

  PolicyDistribution peaked{1.0, 0.0, 0.0, 0.0};
  CHECK(info_cost_diagnostic(peaked, rho.row(0)) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-14));

  PolicyDistribution other{0.4, 0.3, 0.2, 0.1};
  CHECK(info_cost_diagnostic(other, rho.row(0)) >= 0.0);

  std::vector<double> bad{0.5, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(info_cost_diagnostic(peaked, std::span<const double>(bad)),
                  std::invalid_argument);
}

TEST_CASE("an episode from a terminal start does nothing") {
  class Done final : public Environment {
   public:
    int num_states() const override { return 1; }
    int num_actions() const override { return 2; }
    StateId initial_state() const override { return 0; }
    bool is_terminal(StateId) const override { return true; }
    Transition step(StateId s, ActionId a) const override {
      return Transition{s, a, 0.0, s, true};
    }
    std::string describe_state(StateId) const override { return "done"; }
  } env;
  ValueTable table(1, 2);
  Hyperparams hp;
  Rng rng(1);
  EpisodeLog log = run_episode(env, LearnerKind::q_learning(), table, hp, rng);
  CHECK(log.actions_taken == 0);
  CHECK(log.reached_goal);
}

TEST_CASE("episodes are capped at iter_max when no goal is reachable") {
  NoExitEnv env;
  ValueTable table(2, 2);
  Hyperparams hp;
  hp.iter_max = 17;
  Rng rng(3);
  EpisodeLog log = run_episode(env, LearnerKind::q_learning(), table, hp, rng);
  CHECK(log.actions_taken == 17);
  CHECK_FALSE(log.reached_goal);
}

TEST_CASE("the random baseline learns nothing") {
  GridWorld env{GridWorldSpec{}};
  ValueTable table(env.num_states(), 4);
  Hyperparams hp;
  Rng rng(9);
  run_episode(env, LearnerKind::random_policy(), table, hp, rng);
  for (StateId s = 0; s < env.num_states(); ++s)
    for (ActionId a = 0; a < 4; ++a) {
      CHECK(table.value(s, a) == 0.0);
      CHECK(table.visit(s, a) == 0);
    }
}

TEST_CASE("recorded trajectories chain consistently") {
  GridWorld env{GridWorldSpec{}};
  ValueTable table(env.num_states(), 4);
  Hyperparams hp;
  Rng rng(4);
  EpisodeLog log = run_episode(env, LearnerKind::random_policy(), table, hp,
                               rng, true);
  REQUIRE(log.trajectory.size() == static_cast<size_t>(log.actions_taken));
  CHECK(log.trajectory.front().state == env.initial_state());
  for (size_t k = 1; k < log.trajectory.size(); ++k)
    CHECK(log.trajectory[k].state == log.trajectory[k - 1].next_state);
  if (log.reached_goal) {
    CHECK(log.trajectory.back().terminal);
    CHECK(log.trajectory.back().reward == 1.0);
  }
}

TEST_CASE("on a blank table every method consumes one draw per step") {
  // with all values at zero, the exploration distribution is uniform for
  // every method, so a shared stream must produce the same first episode
  GridWorld env{GridWorldSpec{}};
  Hyperparams hp;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    ValueTable t_rp(env.num_states(), 4), t_ql(env.num_states(), 4);
    Rng r1(seed), r2(seed);
    EpisodeLog a =
        run_episode(env, LearnerKind::random_policy(), t_rp, hp, r1);
    EpisodeLog b = run_episode(env, LearnerKind::q_learning(), t_ql, hp, r2);
    CHECK(a.actions_taken == b.actions_taken);
  }
}

TEST_CASE("training runs the requested number of episodes") {
  GridWorld env{GridWorldSpec{}};
  Hyperparams hp;
  hp.episodes = 7;
  Rng rng(21);
  TrainResult result =
      train(env, LearnerKind::q_learning(), hp, rng);
  CHECK(result.logs.size() == 7);
  CHECK(result.sup_change.size() == 7);
  CHECK(result.table.all_finite());
  CHECK(result.sup_change[0] > 0.0);  // the first episode moves the table

  hp.episodes = 0;
  Rng rng2(21);
  TrainResult empty = train(env, LearnerKind::q_learning(), hp, rng2);
  CHECK(empty.logs.empty());
  CHECK(empty.table.sup_diff(ValueTable(env.num_states(), 4)) == 0.0);
}

TEST_CASE("value-guided learners beat the random baseline") {
  GridWorld env{GridWorldSpec{}};
  Hyperparams hp;
  Rng rng_rp(77), rng_ql(77);
  long long rp_total = 0, ql_total = 0;
  for (const EpisodeLog& log :
       train(env, LearnerKind::random_policy(), hp, rng_rp).logs)
    rp_total += log.actions_taken;
  for (const EpisodeLog& log :
       train(env, LearnerKind::q_learning(), hp, rng_ql).logs)
    ql_total += log.actions_taken;
  CHECK(ql_total < rp_total);
}

TEST_CASE("training rejects a learner whose betas disagree with the run") {
  TwoStateChain env;
  Hyperparams hp;
  hp.betas = {-700.0};
  hp.episodes = 1;
  Rng rng(3);
  LearnerKind gl = LearnerKind::g_learning(PriorPolicy::uniform(2, 2), -2000.0);
  CHECK_THROWS_AS(train(env, gl, hp, rng), std::invalid_argument);
}

TEST_CASE("the fused learner solves the two-state chain") {
  TwoStateChain env;
  Hyperparams hp;
  hp.betas = {-2000.0};
  hp.episodes = 50;
  Rng rng(13);
  LearnerKind gl = LearnerKind::g_learning(PriorPolicy::uniform(2, 2), -2000.0);
  TrainResult result = train(env, gl, hp, rng);
  // the finishing action's value approaches the terminal reward
  CHECK(result.table.value(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(result.table.value(0, 1) < result.table.value(0, 0));
  CHECK(result.logs.back().reached_goal);
}
