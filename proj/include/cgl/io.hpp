#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cgl/bench.hpp"

namespace cgl {

// ---------------------------------------------------------------------------
// Run configuration file (JSON). Every field is optional; defaults are the
// benchmark hyperparameters of the numerical study for grid mode and of the
// process study for am mode. Unknown keys are an error. dump() is canonical
// (sorted keys, fixed indent), so parse(dump(cfg)) round-trips byte-wise.
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string mode = "grid";  // "grid" | "am"
  std::vector<int> sizes = {6};
  char case_ab = 'a';
  std::vector<Method> methods = {Method::kRandomPolicy, Method::kQLearning,
                                 Method::kGLearning, Method::kContinualG};
  int experiment_id = 1;
  int g1_episodes = 3;
  int g2_episodes = 6;
  Hyperparams hp;          // grid defaults; am defaults applied when mode=="am"
  bool hp_given = false;   // true when the file set any hyperparams key

  static RunConfig from_json_text(const std::string& text);  // throws
  static RunConfig from_file(const std::string& path);       // throws
  std::string dump() const;

  GridBenchConfig grid_config() const;
  AmExperimentConfig am_config() const;
};

// 17-significant-digit decimal form; round-trips double bit patterns.
std::string format_g17(double v);

// summary.csv: method,case,size,mean_total,sd_total
void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows);

// episodes.csv: method,case,size_or_geometry,replication,episode,actions
void write_episodes_csv(const std::string& path, const BenchResult& result);

// Reload of episodes.csv (round-trip checks, re-aggregation).
BenchResult load_episodes_csv(const std::string& path);

// results.json mirroring the two CSVs 1:1.
void write_results_json(const std::string& path,
                        const std::vector<SummaryRow>& rows,
                        const BenchResult& result);

// Per-episode mean curves, one polyline per summary row, linear axes.
void write_curves_svg(const std::string& path,
                      const std::vector<SummaryRow>& rows);

// Command-line entry point. Subcommands: bench grid, bench am, plan, check,
// render. Exit codes: 0 success, 1 check/property failure, 2 usage or
// config error.
int cli_main(int argc, const char* const* argv, std::ostream& out);
int cli_main(int argc, const char* const* argv);

}  // namespace cgl
