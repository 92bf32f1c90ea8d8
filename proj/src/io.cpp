#include "cgl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgl/planner.hpp"
#include "cgl/rng.hpp"

namespace cgl {

namespace {

using nlohmann::json;

Method parse_method(const std::string& name) {
  if (name == "rp") return Method::kRandomPolicy;
  if (name == "ql") return Method::kQLearning;
  if (name == "gl") return Method::kGLearning;
  if (name == "cgl") return Method::kContinualG;
  throw std::invalid_argument("config: unknown method \"" + name + "\"");
}

char parse_case(const std::string& text) {
  if (text != "a" && text != "b")
    throw std::invalid_argument("config: case must be \"a\" or \"b\"");
  return text[0];
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty() || !parts.empty()) parts.push_back(cur);
  return parts;
}

std::vector<Method> parse_method_list(const std::string& text) {
  std::vector<Method> methods;
  for (const std::string& part : split(text, ','))
    if (!part.empty()) methods.push_back(parse_method(part));
  return methods;
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& scope) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const auto& k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("config: unknown key \"" + scope +
                                  item.key() + "\"");
  }
}

std::string fmt(const char* pattern, ...) {
  char buf[256];
  va_list args;
  va_start(args, pattern);
  vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config: expected an object");
  reject_unknown_keys(j,
                      {"mode", "sizes", "case", "methods", "experiment",
                       "g1_episodes", "g2_episodes", "hyperparams"},
                      "");

  RunConfig cfg;
  if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
  if (cfg.mode != "grid" && cfg.mode != "am")
    throw std::invalid_argument("config: mode must be \"grid\" or \"am\"");
  if (cfg.mode == "am") {
    std::uint64_t seed = cfg.hp.seed;
    cfg.hp = Hyperparams::am_defaults();
    cfg.hp.seed = seed;
  }
  if (j.contains("sizes")) cfg.sizes = j["sizes"].get<std::vector<int>>();
  if (j.contains("case")) cfg.case_ab = parse_case(j["case"].get<std::string>());
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j["methods"])
      cfg.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("experiment")) cfg.experiment_id = j["experiment"].get<int>();
  if (j.contains("g1_episodes")) cfg.g1_episodes = j["g1_episodes"].get<int>();
  if (j.contains("g2_episodes")) cfg.g2_episodes = j["g2_episodes"].get<int>();

  if (j.contains("hyperparams")) {
    const json& h = j["hyperparams"];
    if (!h.is_object())
      throw std::invalid_argument("config: hyperparams must be an object");
    reject_unknown_keys(h,
                        {"gamma", "w", "betas", "iter_max", "reward_goal",
                         "reward_other", "epsilon", "episodes", "replications",
                         "seed"},
                        "hyperparams.");
    cfg.hp_given = !h.empty();
    if (h.contains("gamma")) cfg.hp.gamma = h["gamma"].get<double>();
    if (h.contains("w")) cfg.hp.w = h["w"].get<double>();
    if (h.contains("betas"))
      cfg.hp.betas = h["betas"].get<std::vector<double>>();
    if (h.contains("iter_max")) cfg.hp.iter_max = h["iter_max"].get<int>();
    if (h.contains("reward_goal"))
      cfg.hp.reward_goal = h["reward_goal"].get<double>();
    if (h.contains("reward_other"))
      cfg.hp.reward_other = h["reward_other"].get<double>();
    if (h.contains("epsilon")) cfg.hp.epsilon = h["epsilon"].get<double>();
    if (h.contains("episodes")) cfg.hp.episodes = h["episodes"].get<int>();
    if (h.contains("replications"))
      cfg.hp.replications = h["replications"].get<int>();
    if (h.contains("seed")) cfg.hp.seed = h["seed"].get<std::uint64_t>();
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return from_json_text(text.str());
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
}

std::string RunConfig::dump() const {
  json h;
  h["gamma"] = hp.gamma;
  h["w"] = hp.w;
  h["betas"] = hp.betas;
  h["iter_max"] = hp.iter_max;
  h["reward_goal"] = hp.reward_goal;
  h["reward_other"] = hp.reward_other;
  h["epsilon"] = hp.epsilon;
  h["episodes"] = hp.episodes;
  h["replications"] = hp.replications;
  h["seed"] = hp.seed;

  json j;
  j["mode"] = mode;
  j["sizes"] = sizes;
  j["case"] = std::string(1, case_ab);
  json methods_json = json::array();
  for (Method m : methods) methods_json.push_back(method_name(m));
  j["methods"] = methods_json;
  j["experiment"] = experiment_id;
  j["g1_episodes"] = g1_episodes;
  j["g2_episodes"] = g2_episodes;
  j["hyperparams"] = h;
  return j.dump(2);
}

GridBenchConfig RunConfig::grid_config() const {
  GridBenchConfig cfg;
  cfg.sizes = sizes;
  cfg.case_ab = case_ab;
  cfg.methods = methods;
  cfg.hp = hp;
  return cfg;
}

AmExperimentConfig RunConfig::am_config() const {
  AmExperimentConfig cfg;
  cfg.experiment_id = experiment_id;
  cfg.replications = hp.replications;
  cfg.g1_episodes = g1_episodes;
  cfg.g2_episodes = g2_episodes;
  cfg.hp = hp;
  return cfg;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows) {
  std::ofstream out = open_for_write(path);
  out << "method,case,size,mean_total,sd_total\n";
  for (const auto& row : rows)
    out << row.method << ',' << row.case_ab << ',' << row.size_or_geometry
        << ',' << format_g17(row.mean_total) << ','
        << format_g17(row.sd_total) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_episodes_csv(const std::string& path, const BenchResult& result) {
  std::ofstream out = open_for_write(path);
  out << "method,case,size_or_geometry,replication,episode,actions\n";
  for (const auto& cell : result.cells)
    for (size_t e = 0; e < cell.episode_actions.size(); ++e)
      out << method_name(cell.method) << ',' << cell.case_ab << ','
          << cell.size_or_geometry << ',' << cell.replication << ',' << e
          << ',' << cell.episode_actions[e] << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

BenchResult load_episodes_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,case,size_or_geometry,replication,episode,actions")
    throw std::runtime_error(path + ": missing episodes header");

  BenchResult result;
  std::map<std::tuple<int, char, int, int>, size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != 6)
      throw std::runtime_error(path + ": malformed row: " + line);
    Method method = parse_method(f[0]);
    char case_ab = f[1].empty() ? '?' : f[1][0];
    int size = std::stoi(f[2]);
    int rep = std::stoi(f[3]);
    int episode = std::stoi(f[4]);
    int actions = std::stoi(f[5]);

    std::tuple<int, char, int, int> key{static_cast<int>(method), case_ab,
                                        size, rep};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, result.cells.size()).first;
      CellResult cell;
      cell.method = method;
      cell.case_ab = case_ab;
      cell.size_or_geometry = size;
      cell.replication = rep;
      result.cells.push_back(std::move(cell));
    }
    auto& actions_vec = result.cells[it->second].episode_actions;
    if (static_cast<size_t>(episode) >= actions_vec.size())
      actions_vec.resize(episode + 1, 0);
    actions_vec[episode] = actions;
  }
  return result;
}

void write_results_json(const std::string& path,
                        const std::vector<SummaryRow>& rows,
                        const BenchResult& result) {
  json summary = json::array();
  for (const auto& row : rows)
    summary.push_back({{"method", row.method},
                       {"case", std::string(1, row.case_ab)},
                       {"size", row.size_or_geometry},
                       {"mean_total", row.mean_total},
                       {"sd_total", row.sd_total}});
  json episodes = json::array();
  for (const auto& cell : result.cells)
    for (size_t e = 0; e < cell.episode_actions.size(); ++e)
      episodes.push_back({{"method", method_name(cell.method)},
                          {"case", std::string(1, cell.case_ab)},
                          {"size_or_geometry", cell.size_or_geometry},
                          {"replication", cell.replication},
                          {"episode", static_cast<int>(e)},
                          {"actions", cell.episode_actions[e]}});
  json j;
  j["summary"] = summary;
  j["episodes"] = episodes;
  std::ofstream out = open_for_write(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_curves_svg(const std::string& path,
                      const std::vector<SummaryRow>& rows) {
  size_t max_episodes = 0;
  double max_value = 0.0;
  for (const auto& row : rows) {
    max_episodes = std::max(max_episodes, row.episode_mean_curve.size());
    for (double v : row.episode_mean_curve) max_value = std::max(max_value, v);
  }
  if (rows.empty() || max_episodes == 0) return;  // nothing to plot, no file
  if (max_value <= 0.0) max_value = 1.0;
  max_value *= 1.05;

  const double width = 720, height = 480;
  const double left = 70, right = width - 170, top = 20, bottom = height - 50;
  auto sx = [&](double e) {
    return max_episodes > 1
               ? left + e / (static_cast<double>(max_episodes) - 1) *
                             (right - left)
               : (left + right) / 2;
  };
  auto sy = [&](double v) { return bottom - v / max_value * (bottom - top); };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const size_t palette_size = sizeof(kPalette) / sizeof(kPalette[0]);

  std::ofstream out = open_for_write(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
             "stroke=\"black\"/>\n",
             left, bottom, right, bottom);
  out << fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
             "stroke=\"black\"/>\n",
             left, bottom, left, top);
  for (int t = 0; t <= 4; ++t) {
    double v = max_value * t / 4;
    out << fmt("<line x1=\"%.1f\" y1=\"%.2f\" x2=\"%.1f\" y2=\"%.2f\" "
               "stroke=\"#cccccc\"/>\n",
               left, sy(v), right, sy(v));
    out << fmt("<text x=\"%.1f\" y=\"%.2f\" font-size=\"12\" "
               "text-anchor=\"end\">%.4g</text>\n",
               left - 6, sy(v) + 4, v);
  }
  for (int t = 0; t <= 4; ++t) {
    double e = (static_cast<double>(max_episodes) - 1) * t / 4;
    out << fmt("<text x=\"%.2f\" y=\"%.1f\" font-size=\"12\" "
               "text-anchor=\"middle\">%d</text>\n",
               sx(e), bottom + 18, static_cast<int>(e));
  }
  out << fmt("<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" "
             "text-anchor=\"middle\">episode</text>\n",
             (left + right) / 2, height - 12);
  out << fmt("<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" "
             "text-anchor=\"middle\" transform=\"rotate(-90 16 %.1f)\">mean "
             "actions</text>\n",
             16.0, (top + bottom) / 2, (top + bottom) / 2);

  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.episode_mean_curve.empty()) continue;
    const char* color = kPalette[r % palette_size];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t e = 0; e < row.episode_mean_curve.size(); ++e)
      out << fmt("%.2f,%.2f ", sx(static_cast<double>(e)),
                 sy(row.episode_mean_curve[e]));
    out << "\"/>\n";
    double ly = top + 16 + 18 * static_cast<double>(r);
    out << fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
               "stroke=\"%s\" stroke-width=\"2\"/>\n",
               right + 12, ly - 4, right + 36, ly - 4, color);
    out << fmt("<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">%s %c %d</text>\n",
               right + 42, ly, row.method.c_str(), row.case_ab,
               row.size_or_geometry);
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

namespace {

void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << std::left << std::setw(8) << "method" << std::setw(6) << "case"
      << std::setw(6) << "size" << std::setw(6) << "reps" << std::right
      << std::setw(14) << "mean_total" << std::setw(14) << "sd_total" << "\n";
  for (const auto& row : rows)
    out << std::left << std::setw(8) << row.method << std::setw(6)
        << row.case_ab << std::setw(6) << row.size_or_geometry << std::setw(6)
        << row.replications << std::right << std::setw(14)
        << fmt("%.2f", row.mean_total) << std::setw(14)
        << fmt("%.2f", row.sd_total) << "\n";
}

struct EnvSelector {
  bool is_grid = true;
  int grid_n = 6;
  char grid_case = 'a';
  int geometry = 1;
};

EnvSelector parse_env_token(const std::string& token) {
  std::vector<std::string> parts = split(token, ':');
  EnvSelector sel;
  if (parts.size() == 3 && parts[0] == "grid") {
    sel.is_grid = true;
    sel.grid_n = std::stoi(parts[1]);
    sel.grid_case = parse_case(parts[2]);
    return sel;
  }
  if (parts.size() == 2 && parts[0] == "am" &&
      (parts[1] == "g1" || parts[1] == "g2")) {
    sel.is_grid = false;
    sel.geometry = parts[1] == "g1" ? 1 : 2;
    return sel;
  }
  throw std::invalid_argument("--env expects grid:N:a|b or am:g1|g2, got \"" +
                              token + "\"");
}

std::string am_action_name(const AmProcess& env, ActionId a) {
  static const char* kNames[] = {"flow", "speed", "fan"};
  (void)env;
  return fmt("%s->%d", kNames[a / 2], a % 2 + 1);
}

void write_cg_csv(const std::string& path, const std::vector<double>& cg,
                  int num_states, int num_actions) {
  std::ofstream out = open_for_write(path);
  out << "state,action,value\n";
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a)
      out << s << ',' << a << ','
          << format_g17(cg[static_cast<size_t>(s) * num_actions + a]) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

int run_plan(std::ostream& out, const EnvSelector& sel, const Hyperparams& hp,
             const std::string& csv_path) {
  std::vector<double> betas = hp.betas;
  if (sel.is_grid) {
    GridWorldSpec spec;
    spec.n = sel.grid_n;
    spec.case_ab = sel.grid_case;
    spec.reward_goal = hp.reward_goal;
    spec.reward_other = hp.reward_other;
    GridWorld env(spec);
    auto [offline, online] = gridworld_priors(env);
    std::vector<PriorPolicy> priors{offline, online};
    if (betas.size() != 2) betas.assign(2, betas.at(0));

    ExplicitModel model = ExplicitModel::from_env(env);
    FixedPointReport report =
        solve_fixed_point(model, priors, betas, hp.gamma);
    out << fmt("environment: grid n=%d case %c (%d states, %d actions)\n",
               sel.grid_n, sel.grid_case, env.num_states(), env.num_actions());
    out << fmt("sweeps: %d\nresidual: %.3e\nconverged: %s\n",
               report.iterations, report.residual,
               report.converged ? "yes" : "no");
    out << "fixed-point values (state, cell, up, down, left, right):\n";
    for (int s = 0; s < env.num_states(); ++s) {
      auto [i, j] = env.cell_of(s);
      out << fmt("%4d  (%d,%d)  %10.6f %10.6f %10.6f %10.6f\n", s, i, j,
                 report.cg_star[static_cast<size_t>(s) * 4 + 0],
                 report.cg_star[static_cast<size_t>(s) * 4 + 1],
                 report.cg_star[static_cast<size_t>(s) * 4 + 2],
                 report.cg_star[static_cast<size_t>(s) * 4 + 3]);
    }
    std::vector<ActionId> greedy =
        greedy_policy(report.cg_star, env.num_states(), env.num_actions());
    out << "greedy policy:\n" << render_grid(env, &greedy);
    GreedyTrace trace = greedy_trajectory(env, report.cg_star);
    BfsResult bfs = bfs_shortest(env);
    out << fmt("greedy steps from start: %zu (reached goal: %s); shortest "
               "possible: %d\n",
               trace.steps.size(), trace.reached_goal ? "yes" : "no",
               bfs.length);
    if (!csv_path.empty()) {
      write_cg_csv(csv_path, report.cg_star, env.num_states(),
                   env.num_actions());
      out << "wrote " << csv_path << "\n";
    }
    return report.converged ? 0 : 1;
  }

  AmProcess env(AmProcessSpec{sel.geometry, hp.reward_goal, hp.reward_other});
  std::vector<PriorPolicy> priors{am_priors(env, Knowledge::kOffline)};
  if (sel.geometry == 2) {
    priors.push_back(am_priors(env, Knowledge::kOnline));
    if (betas.size() != 2) betas.assign(2, betas.at(0));
  } else {
    betas.assign(1, betas.at(0));
  }
  ExplicitModel model = ExplicitModel::from_env(env);
  FixedPointReport report = solve_fixed_point(model, priors, betas, hp.gamma);
  out << fmt("environment: fabrication geometry %d (%d states, %d actions)\n",
             sel.geometry, env.num_states(), env.num_actions());
  out << fmt("sweeps: %d\nresidual: %.3e\nconverged: %s\n", report.iterations,
             report.residual, report.converged ? "yes" : "no");
  std::vector<ActionId> greedy =
      greedy_policy(report.cg_star, env.num_states(), env.num_actions());
  out << "fixed-point values (state, actions..., greedy):\n";
  for (int s = 0; s < env.num_states(); ++s) {
    out << fmt("%4d  %-34s", s, env.describe_state(s).c_str());
    for (int a = 0; a < env.num_actions(); ++a)
      out << fmt(" %9.6f", report.cg_star[static_cast<size_t>(s) *
                                              env.num_actions() +
                                          a]);
    out << "  " << am_action_name(env, greedy[s]) << "\n";
  }
  GreedyTrace trace = greedy_trajectory(env, report.cg_star);
  out << "greedy path: " << env.describe_state(env.initial_state());
  for (const auto& [s, a] : trace.steps)
    out << " -[" << am_action_name(env, a) << "]-> "
        << env.describe_state(env.step(s, a).next_state);
  BfsResult bfs = bfs_shortest(env);
  out << fmt("\ngreedy steps from start: %zu (reached goal: %s); shortest "
             "possible: %d\n",
             trace.steps.size(), trace.reached_goal ? "yes" : "no", bfs.length);
  if (!csv_path.empty()) {
    write_cg_csv(csv_path, report.cg_star, env.num_states(),
                 env.num_actions());
    out << "wrote " << csv_path << "\n";
  }
  return report.converged ? 0 : 1;
}

// --- property self-checks ---------------------------------------------------

using CheckFn = std::optional<std::string> (*)(std::uint64_t);

std::vector<double> random_row(Rng& rng, int n, double lo, double hi) {
  std::vector<double> row(n);
  for (double& v : row) v = lo + (hi - lo) * rng.uniform();
  return row;
}

PriorPolicy random_prior(Rng& rng, int num_states, int num_actions) {
  PriorPolicy p(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    std::vector<double> row(num_actions);
    double sum = 0.0;
    for (double& v : row) {
      v = 0.05 + rng.uniform();
      sum += v;
    }
    for (double& v : row) v /= sum;
    p.set_row(s, row);
  }
  return p;
}

std::optional<std::string> check_prior_rows(std::uint64_t) {
  for (int n : {6, 8, 10})
    for (char cs : {'a', 'b'}) {
      GridWorldSpec spec;
      spec.n = n;
      spec.case_ab = cs;
      GridWorld env(spec);
      auto [offline, online] = gridworld_priors(env);
      for (const PriorPolicy* p : {&offline, &online})
        if (auto v = validate_prior(*p, env.num_states(), env.num_actions()))
          return fmt("grid n=%d case %c state %d action %d: %s", n, cs,
                     v->state, v->action, v->what.c_str());
    }
  for (int g : {1, 2}) {
    AmProcess env(AmProcessSpec{g, 1.0, 0.0});
    if (auto v = validate_prior(am_priors(env, Knowledge::kOffline),
                                env.num_states(), env.num_actions()))
      return fmt("am g%d offline state %d action %d: %s", g, v->state,
                 v->action, v->what.c_str());
  }
  AmProcess g2(AmProcessSpec{2, 1.0, 0.0});
  if (auto v = validate_prior(am_priors(g2, Knowledge::kOnline),
                              g2.num_states(), g2.num_actions()))
    return fmt("am g2 online state %d action %d: %s", v->state, v->action,
               v->what.c_str());
  return std::nullopt;
}

std::optional<std::string> check_g1_online_throws(std::uint64_t) {
  AmProcess g1(AmProcessSpec{1, 1.0, 0.0});
  try {
    am_priors(g1, Knowledge::kOnline);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  return std::string("an online prior for geometry 1 was produced; the "
                     "construction defines none");
}

std::optional<std::string> check_policy_normalization(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {101}));
  for (int it = 0; it < 1000; ++it) {
    int num_actions = 2 + static_cast<int>(rng.uniform() * 5);
    int m = 1 + static_cast<int>(rng.uniform() * 3);
    std::vector<double> cg =
        it % 7 == 0 ? std::vector<double>(num_actions, 0.0)
                    : random_row(rng, num_actions, -5.0, 5.0);
    std::vector<PriorPolicy> priors;
    std::vector<double> betas;
    for (int i = 0; i < m; ++i) {
      priors.push_back(random_prior(rng, 1, num_actions));
      betas.push_back(-std::pow(10.0, 1.0 + 3.0 * rng.uniform()));
    }
    std::vector<std::span<const double>> rows;
    for (const auto& p : priors) rows.push_back(p.row(0));
    PolicyDistribution pi = policy_cg(cg, rows, betas);
    double sum = 0.0;
    for (double v : pi) {
      if (!(v >= 0.0 && v <= 1.0) || !std::isfinite(v))
        return fmt("it=%d: probability %g outside [0,1]", it, v);
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      return fmt("it=%d: row sums to %.17g", it, sum);
  }
  return std::nullopt;
}

std::optional<std::string> check_pair_halving(std::uint64_t seed) {
  // a single prior at beta must equal the same prior twice at 2*beta each
  Rng rng(derive_seed(seed, {102}));
  for (int it = 0; it < 200; ++it) {
    int num_actions = 2 + static_cast<int>(rng.uniform() * 5);
    std::vector<double> cg = random_row(rng, num_actions, -5.0, 5.0);
    PriorPolicy prior = random_prior(rng, 1, num_actions);
    double beta = -std::pow(10.0, 1.0 + 3.0 * rng.uniform());
    PolicyDistribution one =
        policy_cg(cg, {prior.row(0)}, std::vector<double>{beta});
    PolicyDistribution two = policy_cg(
        cg, {prior.row(0), prior.row(0)}, std::vector<double>{2 * beta, 2 * beta});
    for (int a = 0; a < num_actions; ++a)
      if (std::abs(one[a] - two[a]) > 1e-12)
        return fmt("it=%d action %d: %.17g vs %.17g", it, a, one[a], two[a]);
  }
  return std::nullopt;
}

std::optional<std::string> check_shift_invariance(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {103}));
  for (int it = 0; it < 200; ++it) {
    int num_actions = 2 + static_cast<int>(rng.uniform() * 5);
    std::vector<double> cg = random_row(rng, num_actions, -5.0, 5.0);
    PriorPolicy prior = random_prior(rng, 1, num_actions);
    std::vector<double> betas{-std::pow(10.0, 1.0 + 3.0 * rng.uniform()),
                              -std::pow(10.0, 1.0 + 3.0 * rng.uniform())};
    double shift = -1000.0 + 2000.0 * rng.uniform();
    std::vector<double> shifted = cg;
    for (double& v : shifted) v += shift;
    std::vector<std::span<const double>> rows{prior.row(0), prior.row(0)};
    PolicyDistribution a = policy_cg(cg, rows, betas);
    PolicyDistribution b = policy_cg(shifted, rows, betas);
    for (int k = 0; k < num_actions; ++k)
      if (std::abs(a[k] - b[k]) > 1e-10)
        return fmt("it=%d: policy moved by %g under a constant shift", it,
                   std::abs(a[k] - b[k]));
    double va = soft_value(cg, rows, betas);
    double vb = soft_value(shifted, rows, betas);
    if (std::abs(vb - va - shift) > 1e-9 * std::max(1.0, std::abs(shift)))
      return fmt("it=%d: soft value shifted by %.17g, expected %.17g", it,
                 vb - va, shift);
  }
  return std::nullopt;
}

std::optional<std::string> check_hardmax_limit(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {104}));
  for (int it = 0; it < 100; ++it) {
    int num_actions = 2 + static_cast<int>(rng.uniform() * 5);
    std::vector<double> cg = random_row(rng, num_actions, -3.0, 3.0);
    PriorPolicy prior = random_prior(rng, 1, num_actions);
    std::vector<double> betas{-1e8};
    double gamma = 0.9;
    double backup =
        soft_backup(cg, {prior.row(0)}, betas, gamma);
    double hard = *std::max_element(cg.begin(), cg.end());
    if (std::abs(backup - gamma * hard) > 1e-4)
      return fmt("it=%d: backup %.10g vs hard limit %.10g", it, backup,
                 gamma * hard);
  }
  return std::nullopt;
}

struct CheckEnv {
  std::string name;
  ExplicitModel model;
  std::vector<PriorPolicy> priors;
  std::vector<double> betas;
  double gamma = 0.9;
};

std::vector<CheckEnv> check_envs() {
  std::vector<CheckEnv> envs;
  {
    GridWorld env(GridWorldSpec{});
    auto [offline, online] = gridworld_priors(env);
    envs.push_back({"grid:6:a", ExplicitModel::from_env(env),
                    {offline, online}, {-2000.0, -2000.0}, 0.9});
  }
  for (int g : {1, 2}) {
    AmProcess env(AmProcessSpec{g, 1.0, 0.0});
    std::vector<PriorPolicy> priors{am_priors(env, Knowledge::kOffline)};
    std::vector<double> betas{-700.0};
    if (g == 2) {
      priors.push_back(am_priors(env, Knowledge::kOnline));
      betas.push_back(-700.0);
    }
    envs.push_back({fmt("am:g%d", g), ExplicitModel::from_env(env),
                    std::move(priors), std::move(betas), 0.9});
  }
  return envs;
}

std::optional<std::string> check_contraction(std::uint64_t seed) {
  for (const CheckEnv& ce : check_envs()) {
    Rng rng(derive_seed(seed, {105, std::hash<std::string>{}(ce.name)}));
    const int S = ce.model.num_states, A = ce.model.num_actions;
    for (int it = 0; it < 100; ++it) {
      std::vector<double> cg1 = random_row(rng, S * A, -10.0, 10.0);
      std::vector<double> cg2 = random_row(rng, S * A, -10.0, 10.0);
      std::vector<PolicyDistribution> pi(S);
      for (int s = 0; s < S; ++s) {
        pi[s] = random_row(rng, A, 0.05, 1.0);
        double sum = 0.0;
        for (double v : pi[s]) sum += v;
        for (double& v : pi[s]) v /= sum;
      }
      std::vector<double> b1 =
          apply_b_pi(ce.model, pi, ce.priors, ce.betas, cg1, ce.gamma);
      std::vector<double> b2 =
          apply_b_pi(ce.model, pi, ce.priors, ce.betas, cg2, ce.gamma);
      double in_diff = 0.0, out_diff = 0.0;
      for (size_t k = 0; k < cg1.size(); ++k) {
        in_diff = std::max(in_diff, std::abs(cg1[k] - cg2[k]));
        out_diff = std::max(out_diff, std::abs(b1[k] - b2[k]));
      }
      if (out_diff > ce.gamma * in_diff + 1e-9)
        return fmt("%s it=%d: output gap %.12g exceeds %.12g", ce.name.c_str(),
                   it, out_diff, ce.gamma * in_diff);
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_bstar_monotone(std::uint64_t seed) {
  for (const CheckEnv& ce : check_envs()) {
    Rng rng(derive_seed(seed, {106, std::hash<std::string>{}(ce.name)}));
    const int S = ce.model.num_states, A = ce.model.num_actions;
    for (int it = 0; it < 50; ++it) {
      std::vector<double> lo = random_row(rng, S * A, -10.0, 10.0);
      std::vector<double> hi = lo;
      for (double& v : hi) v += 5.0 * rng.uniform();
      std::vector<double> blo =
          apply_b_star(ce.model, ce.priors, ce.betas, lo, ce.gamma);
      std::vector<double> bhi =
          apply_b_star(ce.model, ce.priors, ce.betas, hi, ce.gamma);
      for (size_t k = 0; k < blo.size(); ++k)
        if (blo[k] > bhi[k] + 1e-12)
          return fmt("%s it=%d cell %zu: %.17g > %.17g after raising inputs",
                     ce.name.c_str(), it, k, blo[k], bhi[k]);
    }
  }
  return std::nullopt;
}

std::optional<std::string> check_fixed_point(std::uint64_t) {
  for (const CheckEnv& ce : check_envs()) {
    FixedPointReport report =
        solve_fixed_point(ce.model, ce.priors, ce.betas, ce.gamma);
    if (!report.converged || report.residual > 1e-10)
      return fmt("%s: residual %.3e, converged %s", ce.name.c_str(),
                 report.residual, report.converged ? "yes" : "no");
  }
  return std::nullopt;
}

std::optional<std::string> check_serial_parallel(std::uint64_t seed) {
  for (const CheckEnv& ce : check_envs()) {
    Rng rng(derive_seed(seed, {107, std::hash<std::string>{}(ce.name)}));
    std::vector<double> cg = random_row(
        rng, ce.model.num_states * ce.model.num_actions, -10.0, 10.0);
    std::vector<double> par =
        apply_b_star(ce.model, ce.priors, ce.betas, cg, ce.gamma, true);
    std::vector<double> ser =
        apply_b_star(ce.model, ce.priors, ce.betas, cg, ce.gamma, false);
    if (par != ser)
      return fmt("%s: parallel and serial sweeps differ", ce.name.c_str());
    FixedPointReport rp = solve_fixed_point(ce.model, ce.priors, ce.betas,
                                            ce.gamma, 1e-10, 10000, true);
    FixedPointReport rs = solve_fixed_point(ce.model, ce.priors, ce.betas,
                                            ce.gamma, 1e-10, 10000, false);
    if (rp.cg_star != rs.cg_star)
      return fmt("%s: parallel and serial fixed points differ",
                 ce.name.c_str());
  }
  return std::nullopt;
}

std::optional<std::string> check_epsilon_greedy(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {108}));
  for (int it = 0; it < 500; ++it) {
    int num_actions = 2 + static_cast<int>(rng.uniform() * 5);
    std::vector<double> q = random_row(rng, num_actions, -1.0, 1.0);
    if (it % 3 == 0) q.assign(num_actions, 0.25);  // full tie
    double eps = rng.uniform();
    PolicyDistribution dist = epsilon_greedy(q, eps);
    double sum = 0.0, floor = eps / num_actions;
    for (double v : dist) {
      sum += v;
      if (v < floor - 1e-15)
        return fmt("it=%d: mass %g below the exploration floor %g", it, v,
                   floor);
    }
    if (std::abs(sum - 1.0) > 1e-12)
      return fmt("it=%d: distribution sums to %.17g", it, sum);
  }
  return std::nullopt;
}

int run_check(std::ostream& out, std::uint64_t seed) {
  struct Entry {
    const char* name;
    CheckFn fn;
  };
  const Entry entries[] = {
      {"prior-rows-valid", check_prior_rows},
      {"g1-online-prior-throws", check_g1_online_throws},
      {"policy-normalization", check_policy_normalization},
      {"pair-halving-identity", check_pair_halving},
      {"shift-invariance", check_shift_invariance},
      {"hardmax-limit", check_hardmax_limit},
      {"policy-backup-contraction", check_contraction},
      {"optimal-backup-monotone", check_bstar_monotone},
      {"fixed-point-residual", check_fixed_point},
      {"serial-parallel-bitwise", check_serial_parallel},
      {"epsilon-greedy-distribution", check_epsilon_greedy},
  };
  int failures = 0;
  for (const Entry& entry : entries) {
    std::optional<std::string> failure;
    try {
      failure = entry.fn(seed);
    } catch (const std::exception& e) {
      failure = std::string("unexpected exception: ") + e.what();
    }
    if (failure) {
      ++failures;
      out << "FAIL " << entry.name << " seed=" << seed << ": " << *failure
          << "\n";
    } else {
      out << "ok " << entry.name << "\n";
    }
  }
  out << (failures ? fmt("%d properties violated\n", failures)
                   : std::string("all properties hold\n"));
  return failures ? 1 : 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"continual multi-prior tabular reinforcement-learning "
               "benchmark"};
  app.name("cgl");
  app.require_subcommand(0, 1);

  std::string config_path, format = "csv";
  std::uint64_t seed = 42;
  bool dump_config = false;
  app.add_option("--config", config_path, "run configuration file (JSON)");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--dump-config", dump_config,
               "print the resolved configuration and exit");

  CLI::App* bench_cmd = app.add_subcommand("bench", "run a benchmark");
  bench_cmd->require_subcommand(0, 1);
  bench_cmd->fallthrough();

  std::vector<int> size_flag;
  std::string case_flag = "a", methods_flag, out_dir = ".";
  int reps_flag = 0, episodes_flag = 0;
  bool curves_flag = false;
  CLI::App* grid_cmd =
      bench_cmd->add_subcommand("grid", "gridworld benchmark");
  grid_cmd->fallthrough();
  CLI::Option* size_opt = grid_cmd->add_option(
      "--size", size_flag, "grid side length(s), 5..12 (repeatable)");
  CLI::Option* case_opt =
      grid_cmd->add_option("--case", case_flag, "prior layout case")
          ->check(CLI::IsMember({"a", "b"}));
  CLI::Option* grid_reps_opt =
      grid_cmd->add_option("--reps", reps_flag, "replications");
  CLI::Option* episodes_opt =
      grid_cmd->add_option("--episodes", episodes_flag, "episodes per run");
  CLI::Option* methods_opt = grid_cmd->add_option(
      "--methods", methods_flag, "comma list of rp,ql,gl,cgl");
  grid_cmd->add_option("--out", out_dir, "output directory");
  grid_cmd->add_flag("--curves", curves_flag, "also write curves.svg");

  int experiment_flag = 0;
  std::string am_out_dir = ".";
  CLI::App* am_cmd =
      bench_cmd->add_subcommand("am", "fabrication-process experiments");
  am_cmd->fallthrough();
  CLI::Option* experiment_opt = am_cmd->add_option(
      "--experiment", experiment_flag, "experiment id (1, 2 or 3)");
  CLI::Option* am_reps_opt =
      am_cmd->add_option("--reps", reps_flag, "replications");
  am_cmd->add_option("--out", am_out_dir, "output directory");

  std::string env_token, plan_csv;
  CLI::App* plan_cmd =
      app.add_subcommand("plan", "exact fixed-point planning oracle");
  plan_cmd->fallthrough();
  plan_cmd->add_option("--env", env_token, "grid:N:a|b or am:g1|g2")
      ->required();
  plan_cmd->add_option("--csv", plan_csv, "also write the values as CSV");

  CLI::App* check_cmd =
      app.add_subcommand("check", "run the property self-checks");
  check_cmd->fallthrough();

  std::string render_token;
  CLI::App* render_cmd =
      app.add_subcommand("render", "print an ASCII map of an environment");
  render_cmd->fallthrough();
  render_cmd->add_option("--env", render_token, "grid:N:a|b or am:g1|g2")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, out);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, out);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, out);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_file(config_path);

    if (grid_cmd->parsed()) cfg.mode = "grid";
    if (am_cmd->parsed()) cfg.mode = "am";
    if (cfg.mode == "am" && !cfg.hp_given) {
      std::uint64_t keep = cfg.hp.seed;
      cfg.hp = Hyperparams::am_defaults();
      cfg.hp.seed = keep;
    }
    if (size_opt->count()) cfg.sizes = size_flag;
    if (case_opt->count()) cfg.case_ab = case_flag[0];
    if (methods_opt->count()) cfg.methods = parse_method_list(methods_flag);
    if (grid_reps_opt->count() || am_reps_opt->count())
      cfg.hp.replications = reps_flag;
    if (episodes_opt->count()) cfg.hp.episodes = episodes_flag;
    if (experiment_opt->count()) cfg.experiment_id = experiment_flag;
    if (seed_opt->count()) cfg.hp.seed = seed;

    if (dump_config) {
      out << cfg.dump() << "\n";
      return 0;
    }

    if (plan_cmd->parsed()) {
      EnvSelector sel = parse_env_token(env_token);
      Hyperparams hp = cfg.hp;
      if (!sel.is_grid && !cfg.hp_given && cfg.mode != "am") {
        std::uint64_t keep = hp.seed;
        hp = Hyperparams::am_defaults();
        hp.seed = keep;
      }
      return run_plan(out, sel, hp, plan_csv);
    }
    if (check_cmd->parsed()) return run_check(out, cfg.hp.seed);
    if (render_cmd->parsed()) {
      EnvSelector sel = parse_env_token(render_token);
      if (sel.is_grid) {
        GridWorldSpec spec;
        spec.n = sel.grid_n;
        spec.case_ab = sel.grid_case;
        out << render_grid(GridWorld(spec));
      } else {
        out << render_am(AmProcess(AmProcessSpec{sel.geometry, 1.0, 0.0}));
      }
      return 0;
    }
    if (bench_cmd->parsed()) {
      if (cfg.mode == "grid") {
        BenchResult result = run_grid_benchmark(cfg.grid_config());
        std::vector<SummaryRow> rows = aggregate(result);
        std::filesystem::create_directories(out_dir);
        if (format == "csv") {
          write_summary_csv(out_dir + "/summary.csv", rows);
          write_episodes_csv(out_dir + "/episodes.csv", result);
          out << "wrote " << out_dir << "/summary.csv and " << out_dir
              << "/episodes.csv\n";
        } else {
          write_results_json(out_dir + "/results.json", rows, result);
          out << "wrote " << out_dir << "/results.json\n";
        }
        if (curves_flag && !rows.empty()) {
          write_curves_svg(out_dir + "/curves.svg", rows);
          out << "wrote " << out_dir << "/curves.svg\n";
        }
        print_summary(out, rows);
        return 0;
      }
      AmBenchResult am = run_am_experiment(cfg.am_config());
      BenchResult result = to_bench_result(am);
      std::vector<SummaryRow> rows = aggregate(result);
      std::filesystem::create_directories(am_out_dir);
      if (format == "csv") {
        write_summary_csv(am_out_dir + "/summary.csv", rows);
        write_episodes_csv(am_out_dir + "/episodes.csv", result);
        out << "wrote " << am_out_dir << "/summary.csv and " << am_out_dir
            << "/episodes.csv\n";
      } else {
        write_results_json(am_out_dir + "/results.json", rows, result);
        out << "wrote " << am_out_dir << "/results.json\n";
      }
      AmProcess g2(AmProcessSpec{2, cfg.hp.reward_goal, cfg.hp.reward_other});
      int hits = 0;
      for (const auto& rep : am.reps)
        if (rep.g2_greedy_end == g2.target_state()) ++hits;
      print_summary(out, rows);
      out << fmt("geometry-2 greedy endpoint at target: %d/%zu\n", hits,
                 am.reps.size());
      return 0;
    }

    out << app.help();
    return 0;
  } catch (const std::invalid_argument& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout);
}

}  // namespace cgl
