#include "cgl/envs.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cgl {

namespace {

std::vector<double> single_arrow_row(int num_actions, ActionId arrow,
                                     double strength) {
  std::vector<double> row(num_actions, (1.0 - strength) / (num_actions - 1));
  row[arrow] = strength;
  return row;
}

std::vector<double> double_arrow_row(int num_actions, ActionId first,
                                     ActionId second) {
  std::vector<double> row(num_actions, 0.2 / (num_actions - 2));
  row[first] = 0.4;
  row[second] = 0.4;
  return row;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridWorld
// ---------------------------------------------------------------------------

GridWorld::GridWorld(const GridWorldSpec& spec) : spec_(spec) {
  if (spec.n < 5)
    throw std::invalid_argument("gridworld: n must be >= 5 (wall rows exist)");
  if (spec.case_ab != 'a' && spec.case_ab != 'b')
    throw std::invalid_argument("gridworld: case must be 'a' or 'b'");
  const int n = spec.n;
  cell_index_.assign(static_cast<size_t>(n) * n, -1);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (!cell_available(i, j)) continue;
      cell_index_[static_cast<size_t>(i - 1) * n + (j - 1)] =
          static_cast<StateId>(cells_.size());
      cells_.emplace_back(i, j);
    }
  }
  initial_ = index_of(1, 1);
  goal_ = index_of(n, n);
}

bool GridWorld::cell_available(int i, int j) const {
  const int n = spec_.n;
  if (i < 1 || i > n || j < 1 || j > n) return false;
  if (i == 2 && j <= n - 1) return false;
  if (i == 4 && j >= 2) return false;
  return true;
}

StateId GridWorld::index_of(int i, int j) const {
  const int n = spec_.n;
  if (i < 1 || i > n || j < 1 || j > n) return -1;
  return cell_index_[static_cast<size_t>(i - 1) * n + (j - 1)];
}

Transition GridWorld::step(StateId s, ActionId a) const {
  static const int di[4] = {-1, 1, 0, 0};  // up, down, left, right
  static const int dj[4] = {0, 0, -1, 1};
  if (s < 0 || s >= num_states()) throw std::out_of_range("gridworld: state");
  if (a < 0 || a >= 4) throw std::out_of_range("gridworld: action");
  Transition t;
  t.state = s;
  t.action = a;
  if (is_terminal(s)) {  // model enumeration only; episodes end before this
    t.next_state = s;
    t.reward = 0.0;
    t.terminal = true;
    return t;
  }
  auto [i, j] = cells_[s];
  StateId target = index_of(i + di[a], j + dj[a]);
  t.next_state = target >= 0 ? target : s;  // blocked or off-grid: stay put
  t.terminal = (t.next_state == goal_);
  t.reward = t.terminal ? spec_.reward_goal : spec_.reward_other;
  return t;
}

std::string GridWorld::describe_state(StateId s) const {
  auto [i, j] = cells_[s];
  std::ostringstream os;
  os << "(" << i << "," << j << ")";
  return os.str();
}

std::pair<PriorPolicy, PriorPolicy> gridworld_priors(const GridWorld& env) {
  const int n = env.side();
  const int S = env.num_states();
  PriorPolicy offline = PriorPolicy::uniform(S, 4);
  PriorPolicy online = PriorPolicy::uniform(S, 4);
  // offline: rightward guidance along the top corridor
  for (int j = 1; j <= n - 1; ++j)
    offline.set_row(env.index_of(1, j), single_arrow_row(4, kRight, 0.9));
  if (env.spec().case_ab == 'b')
    offline.set_row(env.index_of(3, 4), double_arrow_row(4, kUp, kRight));
  // online: leftward sweep along row 3, then down at its head
  for (int j = 2; j <= n; ++j)
    online.set_row(env.index_of(3, j), single_arrow_row(4, kLeft, 0.9));
  online.set_row(env.index_of(3, 1), single_arrow_row(4, kDown, 0.9));
  return {std::move(offline), std::move(online)};
}

// ---------------------------------------------------------------------------
// AmProcess
// ---------------------------------------------------------------------------

AmProcess::AmProcess(const AmProcessSpec& spec) : spec_(spec) {
  if (spec.geometry != 1 && spec.geometry != 2)
    throw std::invalid_argument("am process: geometry must be 1 or 2");
  num_params_ = spec.geometry == 1 ? 2 : 3;
  if (spec.geometry == 1) {
    initial_ = index_of_levels({1, 1});
    target_ = index_of_levels({2, 2});
  } else {
    initial_ = index_of_levels({2, 2, 1});
    target_ = index_of_levels({2, 2, 2});
  }
}

std::vector<int> AmProcess::levels_of(StateId s) const {
  std::vector<int> levels(num_params_);
  for (int p = 0; p < num_params_; ++p) levels[p] = ((s >> p) & 1) + 1;
  return levels;
}

StateId AmProcess::index_of_levels(const std::vector<int>& levels) const {
  if (static_cast<int>(levels.size()) != num_params_)
    throw std::invalid_argument("am process: wrong number of levels");
  StateId s = 0;
  for (int p = 0; p < num_params_; ++p) {
    if (levels[p] != 1 && levels[p] != 2)
      throw std::invalid_argument("am process: levels are 1 or 2");
    s |= (levels[p] - 1) << p;
  }
  return s;
}

Transition AmProcess::step(StateId s, ActionId a) const {
  if (s < 0 || s >= num_states()) throw std::out_of_range("am process: state");
  if (a < 0 || a >= num_actions())
    throw std::out_of_range("am process: action");
  Transition t;
  t.state = s;
  t.action = a;
  if (is_terminal(s)) {
    t.next_state = s;
    t.reward = 0.0;
    t.terminal = true;
    return t;
  }
  const int param = a / 2;
  const int bit = a % 2;  // level - 1
  StateId ns = (s & ~(1 << param)) | (bit << param);
  t.next_state = ns;  // self-loop when the parameter is already at the level
  t.terminal = (ns == target_);
  t.reward = t.terminal ? spec_.reward_goal : spec_.reward_other;
  return t;
}

std::string AmProcess::describe_state(StateId s) const {
  static const char* kFlow[2] = {"0.4", "1.0"};
  static const char* kSpeed[2] = {"7500", "2500"};
  static const char* kFan[2] = {"off", "on"};
  auto levels = levels_of(s);
  std::ostringstream os;
  os << "(flow=" << kFlow[levels[0] - 1] << ", speed=" << kSpeed[levels[1] - 1];
  if (num_params_ == 3) os << ", fan=" << kFan[levels[2] - 1];
  os << ")";
  return os.str();
}

PriorPolicy am_priors(const AmProcess& env, Knowledge knowledge) {
  const int geometry = env.spec().geometry;
  const int A = env.num_actions();
  PriorPolicy prior = PriorPolicy::uniform(env.num_states(), A);
  const ActionId flow_hi = 1;   // flow -> level 2
  const ActionId speed_hi = 3;  // speed -> level 2
  if (knowledge == Knowledge::kOffline) {
    if (geometry == 1) {
      prior.set_row(env.index_of_levels({1, 1}),
                    single_arrow_row(A, flow_hi, 0.9));
      prior.set_row(env.index_of_levels({1, 2}),
                    single_arrow_row(A, flow_hi, 0.9));
    } else {
      prior.set_row(env.index_of_levels({1, 1, 1}),
                    single_arrow_row(A, flow_hi, 0.9));
      prior.set_row(env.index_of_levels({1, 2, 1}),
                    single_arrow_row(A, flow_hi, 0.9));
    }
    return prior;
  }
  if (geometry == 1)
    throw std::invalid_argument(
        "am priors: geometry 1 has no online prior; it is the source task");
  prior.set_row(env.index_of_levels({1, 1, 1}),
                single_arrow_row(A, flow_hi, 0.9));
  prior.set_row(env.index_of_levels({2, 1, 1}),
                single_arrow_row(A, speed_hi, 0.9));
  return prior;
}

PriorPolicy extract_online_prior(
    const std::vector<std::pair<StateId, ActionId>>& greedy_path,
    const Environment& target_env, double strength) {
  if (!(strength > 0.5 && strength < 1.0))
    throw std::invalid_argument(
        "extract_online_prior: strength must be in (0.5, 1)");
  const int S = target_env.num_states();
  const int A = target_env.num_actions();
  PriorPolicy prior = PriorPolicy::uniform(S, A);
  for (const auto& [s, a] : greedy_path) {
    if (s < 0 || s >= S || a < 0 || a >= A)
      throw std::invalid_argument(
          "extract_online_prior: path entry outside the target environment");
    prior.set_row(s, single_arrow_row(A, a, strength));
  }
  return prior;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render_grid(const GridWorld& env,
                        const std::vector<ActionId>* greedy) {
  static const char kArrow[4] = {'^', 'v', '<', '>'};
  const int n = env.side();
  std::ostringstream os;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      StateId s = env.index_of(i, j);
      char c = '.';
      if (s < 0)
        c = '#';
      else if (s == env.initial_state())
        c = 'S';
      else if (env.is_terminal(s))
        c = 'G';
      else if (greedy)
        c = kArrow[(*greedy)[s]];
      os << c << (j < n ? " " : "");
    }
    os << "\n";
  }
  return os.str();
}

std::string render_am(const AmProcess& env) {
  std::ostringstream os;
  os << "geometry " << env.spec().geometry << ": " << env.num_states()
     << " states, " << env.num_actions() << " actions\n";
  os << "initial " << env.describe_state(env.initial_state()) << ", target "
     << env.describe_state(env.target_state()) << "\n";
  for (StateId s = 0; s < env.num_states(); ++s) {
    os << s << " " << env.describe_state(s) << (env.is_terminal(s) ? " *" : "")
       << ":";
    for (ActionId a = 0; a < env.num_actions(); ++a)
      os << " " << env.step(s, a).next_state;
    os << "\n";
  }
  return os.str();
}

}  // namespace cgl
