#pragma once

#include <string>
#include <vector>

#include "cgl/core.hpp"
#include "cgl/learners.hpp"

namespace cgl {

// ---------------------------------------------------------------------------
// Grid benchmark: every (method, size, replication) cell trains a fresh
// learner for hp.episodes episodes. Replication streams are derived from
// (seed, method, size, case, replication); for RandomPolicy and Q-Learning
// the case token is fixed, because neither consumes priors — their results
// are identical across cases by construction.
// ---------------------------------------------------------------------------

struct GridBenchConfig {
  std::vector<int> sizes = {6};
  char case_ab = 'a';
  std::vector<Method> methods = {Method::kRandomPolicy, Method::kQLearning,
                                 Method::kGLearning, Method::kContinualG};
  Hyperparams hp;
};

struct CellResult {
  Method method = Method::kRandomPolicy;
  char case_ab = 'a';
  int size_or_geometry = 0;
  int replication = 0;
  std::vector<int> episode_actions;
  long long total() const;
};

struct BenchResult {
  std::vector<CellResult> cells;
};

BenchResult run_grid_benchmark(const GridBenchConfig& cfg, bool parallel = true);

// ---------------------------------------------------------------------------
// Fabrication-process experiments (protocol per experiment id):
//   1: geometry 1 with G-Learning(offline), then geometry 2 with
//      Continual G(offline, online extracted from the learned greedy path)
//   2: geometry 1 with Q-Learning, then geometry 2 with G-Learning(offline)
//   3: Q-Learning in both geometries
// 3 episodes in geometry 1, 6 in geometry 2. Replication streams are derived
// from (seed, geometry, replication) — shared across experiment ids, so the
// three arms of one replication face common random numbers.
// ---------------------------------------------------------------------------

struct AmExperimentConfig {
  int experiment_id = 1;  // 1, 2 or 3
  int replications = 200;
  int g1_episodes = 3;
  int g2_episodes = 6;
  Hyperparams hp = Hyperparams::am_defaults();
};

struct AmRepResult {
  int replication = 0;
  std::vector<int> g1_episode_actions;
  std::vector<int> g2_episode_actions;
  StateId g2_greedy_end = -1;  // where the learned greedy trajectory stops
  int g1_total() const;
  int g2_total() const;
  int total() const;
};

struct AmBenchResult {
  int experiment_id = 0;
  Method g1_method = Method::kQLearning;
  Method g2_method = Method::kQLearning;
  std::vector<AmRepResult> reps;
};

AmBenchResult run_am_experiment(const AmExperimentConfig& cfg,
                                bool parallel = true);

// Flattens an AM result into the common row shape: one cell per
// (geometry, replication), method = that geometry's learner, case = the
// experiment id digit.
BenchResult to_bench_result(const AmBenchResult& am);

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct SummaryRow {
  std::string method;
  char case_ab = 'a';
  int size_or_geometry = 0;
  int replications = 0;
  double mean_total = 0.0;
  double sd_total = 0.0;  // sample sd (n-1); 0 when n = 1
  std::vector<double> episode_mean_curve;
};

// Means over replications, per episode index and in total, grouped by
// (method, size, case) in deterministic order: methods rp, ql, gl, cgl
// first, then size ascending, then case.
std::vector<SummaryRow> aggregate(const BenchResult& result);

}  // namespace cgl
