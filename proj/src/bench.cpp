#include "cgl/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "cgl/planner.hpp"
#include "cgl/rng.hpp"

namespace cgl {

namespace {

// Stream-derivation tokens. Grid cells hash (domain, method, size, case,
// replication); the process experiments hash (domain, geometry, replication)
// only, so all three experiment arms of a replication share streams.
enum : std::uint64_t { kGridDomain = 1, kAmDomain = 2 };

std::uint64_t method_token(Method m) {
  switch (m) {
    case Method::kRandomPolicy: return 1;
    case Method::kQLearning: return 2;
    case Method::kGLearning: return 3;
    case Method::kContinualG: return 4;
  }
  return 0;
}

std::uint64_t case_token(Method m, char case_ab) {
  // RP and QL never consume priors; a fixed token keeps their streams — and
  // therefore their results — identical across cases.
  if (m == Method::kRandomPolicy || m == Method::kQLearning) return 0;
  return case_ab == 'a' ? 1 : 2;
}

LearnerKind make_grid_learner(Method m, const GridWorld& env,
                              const Hyperparams& hp) {
  switch (m) {
    case Method::kRandomPolicy: return LearnerKind::random_policy();
    case Method::kQLearning: return LearnerKind::q_learning();
    case Method::kGLearning: {
      auto [offline, online] = gridworld_priors(env);
      (void)online;
      return LearnerKind::g_learning(std::move(offline), hp.betas.at(0));
    }
    case Method::kContinualG: {
      auto [offline, online] = gridworld_priors(env);
      std::vector<double> betas = hp.betas;
      if (betas.size() != 2) betas.assign(2, hp.betas.at(0));
      return LearnerKind::continual_g({std::move(offline), std::move(online)},
                                      std::move(betas));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

long long CellResult::total() const {
  return std::accumulate(episode_actions.begin(), episode_actions.end(), 0LL);
}

BenchResult run_grid_benchmark(const GridBenchConfig& cfg, bool parallel) {
  cfg.hp.validate();
  if (cfg.sizes.empty())
    throw std::invalid_argument("grid benchmark: no sizes given");
  if (cfg.methods.empty())
    throw std::invalid_argument("grid benchmark: no methods given");
  for (int n : cfg.sizes)
    if (n < 5 || n > 12)
      throw std::invalid_argument("grid benchmark: sizes must be in 5..12");
  struct Task {
    Method method;
    int size;
    int rep;
  };
  std::vector<Task> tasks;
  for (Method m : cfg.methods)
    for (int n : cfg.sizes)
      for (int r = 0; r < cfg.hp.replications; ++r) tasks.push_back({m, n, r});

  BenchResult result;
  result.cells.resize(tasks.size());
  const int count = static_cast<int>(tasks.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int k = 0; k < count; ++k) {
    const Task& task = tasks[k];
    GridWorldSpec spec;
    spec.n = task.size;
    spec.case_ab = cfg.case_ab;
    spec.reward_goal = cfg.hp.reward_goal;
    spec.reward_other = cfg.hp.reward_other;
    GridWorld env(spec);
    LearnerKind learner = make_grid_learner(task.method, env, cfg.hp);
    Rng rng(derive_seed(cfg.hp.seed,
                        {kGridDomain, method_token(task.method),
                         static_cast<std::uint64_t>(task.size),
                         case_token(task.method, cfg.case_ab),
                         static_cast<std::uint64_t>(task.rep)}));
    Hyperparams hp = cfg.hp;
    if (!learner.betas.empty()) hp.betas = learner.betas;
    TrainResult trained = train(env, learner, hp, rng);
    CellResult& cell = result.cells[k];
    cell.method = task.method;
    cell.case_ab = cfg.case_ab;
    cell.size_or_geometry = task.size;
    cell.replication = task.rep;
    cell.episode_actions.reserve(trained.logs.size());
    for (const auto& log : trained.logs)
      cell.episode_actions.push_back(log.actions_taken);
  }
  return result;
}

int AmRepResult::g1_total() const {
  return std::accumulate(g1_episode_actions.begin(), g1_episode_actions.end(),
                         0);
}

int AmRepResult::g2_total() const {
  return std::accumulate(g2_episode_actions.begin(), g2_episode_actions.end(),
                         0);
}

int AmRepResult::total() const { return g1_total() + g2_total(); }

AmBenchResult run_am_experiment(const AmExperimentConfig& cfg, bool parallel) {
  if (cfg.experiment_id < 1 || cfg.experiment_id > 3)
    throw std::invalid_argument("am experiment: id must be 1, 2 or 3");
  if (cfg.replications < 1)
    throw std::invalid_argument("am experiment: replications must be >= 1");
  cfg.hp.validate();

  AmBenchResult result;
  result.experiment_id = cfg.experiment_id;
  result.g1_method =
      cfg.experiment_id == 1 ? Method::kGLearning : Method::kQLearning;
  result.g2_method = cfg.experiment_id == 1   ? Method::kContinualG
                     : cfg.experiment_id == 2 ? Method::kGLearning
                                              : Method::kQLearning;
  result.reps.resize(cfg.replications);

  const double beta = cfg.hp.betas.at(0);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int r = 0; r < cfg.replications; ++r) {
    AmProcess g1(AmProcessSpec{1, cfg.hp.reward_goal, cfg.hp.reward_other});
    AmProcess g2(AmProcessSpec{2, cfg.hp.reward_goal, cfg.hp.reward_other});

    Hyperparams hp1 = cfg.hp;
    hp1.episodes = cfg.g1_episodes;
    hp1.betas = {beta};
    LearnerKind l1 = cfg.experiment_id == 1
                         ? LearnerKind::g_learning(
                               am_priors(g1, Knowledge::kOffline), beta)
                         : LearnerKind::q_learning();
    Rng rng1(derive_seed(cfg.hp.seed,
                         {kAmDomain, 1, static_cast<std::uint64_t>(r)}));
    TrainResult t1 = train(g1, l1, hp1, rng1);

    Hyperparams hp2 = cfg.hp;
    hp2.episodes = cfg.g2_episodes;
    LearnerKind l2 = LearnerKind::q_learning();
    if (cfg.experiment_id == 1) {
      // lift the learned greedy trajectory into geometry-2 indices (same
      // parameter levels, fan at level 1) and distil it into the online prior
      GreedyTrace trace = greedy_trajectory(g1, t1.table.values());
      std::vector<std::pair<StateId, ActionId>> lifted;
      lifted.reserve(trace.steps.size());
      for (const auto& [s, a] : trace.steps) {
        auto levels = g1.levels_of(s);
        levels.push_back(1);
        lifted.push_back({g2.index_of_levels(levels), a});
      }
      PriorPolicy online = extract_online_prior(lifted, g2, 0.9);
      hp2.betas = {beta, beta};
      l2 = LearnerKind::continual_g(
          {am_priors(g2, Knowledge::kOffline), std::move(online)},
          {beta, beta});
    } else if (cfg.experiment_id == 2) {
      hp2.betas = {beta};
      l2 = LearnerKind::g_learning(am_priors(g2, Knowledge::kOffline), beta);
    }
    Rng rng2(derive_seed(cfg.hp.seed,
                         {kAmDomain, 2, static_cast<std::uint64_t>(r)}));
    TrainResult t2 = train(g2, l2, hp2, rng2);

    AmRepResult& rep = result.reps[r];
    rep.replication = r;
    for (const auto& log : t1.logs)
      rep.g1_episode_actions.push_back(log.actions_taken);
    for (const auto& log : t2.logs)
      rep.g2_episode_actions.push_back(log.actions_taken);
    GreedyTrace g2_trace = greedy_trajectory(g2, t2.table.values());
    StateId end = g2.initial_state();
    for (const auto& [s, a] : g2_trace.steps) end = g2.step(s, a).next_state;
    rep.g2_greedy_end = end;
  }
  return result;
}

BenchResult to_bench_result(const AmBenchResult& am) {
  BenchResult out;
  const char case_digit = static_cast<char>('0' + am.experiment_id);
  for (const auto& rep : am.reps) {
    CellResult g1;
    g1.method = am.g1_method;
    g1.case_ab = case_digit;
    g1.size_or_geometry = 1;
    g1.replication = rep.replication;
    g1.episode_actions = rep.g1_episode_actions;
    out.cells.push_back(std::move(g1));
    CellResult g2;
    g2.method = am.g2_method;
    g2.case_ab = case_digit;
    g2.size_or_geometry = 2;
    g2.replication = rep.replication;
    g2.episode_actions = rep.g2_episode_actions;
    out.cells.push_back(std::move(g2));
  }
  return out;
}

std::vector<SummaryRow> aggregate(const BenchResult& result) {
  // deterministic grouping: method order rp, ql, gl, cgl, then size, then case
  auto method_rank = [](Method m) { return static_cast<int>(method_token(m)); };
  std::map<std::tuple<int, int, char>, std::vector<const CellResult*>> groups;
  for (const auto& cell : result.cells)
    groups[{method_rank(cell.method), cell.size_or_geometry, cell.case_ab}]
        .push_back(&cell);

  std::vector<SummaryRow> rows;
  for (const auto& [key, cells] : groups) {
    SummaryRow row;
    row.method = method_name(cells.front()->method);
    row.case_ab = cells.front()->case_ab;
    row.size_or_geometry = cells.front()->size_or_geometry;
    row.replications = static_cast<int>(cells.size());

    std::vector<double> totals;
    totals.reserve(cells.size());
    size_t episodes = 0;
    for (const CellResult* c : cells) {
      totals.push_back(static_cast<double>(c->total()));
      episodes = std::max(episodes, c->episode_actions.size());
    }
    const double n = static_cast<double>(totals.size());
    row.mean_total = std::accumulate(totals.begin(), totals.end(), 0.0) / n;
    if (totals.size() > 1) {
      double ss = 0.0;
      for (double t : totals) ss += (t - row.mean_total) * (t - row.mean_total);
      row.sd_total = std::sqrt(ss / (n - 1.0));
    }
    row.episode_mean_curve.assign(episodes, 0.0);
    for (size_t e = 0; e < episodes; ++e) {
      double sum = 0.0;
      int cnt = 0;
      for (const CellResult* c : cells)
        if (e < c->episode_actions.size()) {
          sum += c->episode_actions[e];
          ++cnt;
        }
      row.episode_mean_curve[e] = cnt ? sum / cnt : 0.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cgl
