#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cgl/core.hpp"

namespace cgl {

// Deterministic episodic MDP contract. step is a pure function of (s, a).
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual StateId initial_state() const = 0;
  virtual bool is_terminal(StateId s) const = 0;
  virtual Transition step(StateId s, ActionId a) const = 0;
  virtual std::string describe_state(StateId s) const = 0;
};

// ---------------------------------------------------------------------------
// Obstacle gridworld. Cells are addressed (i, j), 1-based, i = row.
// Start (1,1), goal (n,n). Rows 2 and 4 are walls with one gap each:
// unavailable cells are {(2,j): j=1..n-1} and {(4,j): j=2..n}.
// Moving off-grid or into a wall leaves the agent in place (time advances).
// State ids index the available cells only, in row-major order.
// ---------------------------------------------------------------------------

enum GridAction : ActionId { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

struct GridWorldSpec {
  int n = 6;
  char case_ab = 'a';  // 'a' or 'b': prior layout variant (see gridworld_priors)
  double reward_goal = 1.0;
  double reward_other = 0.0;
};

class GridWorld final : public Environment {
 public:
  explicit GridWorld(const GridWorldSpec& spec);  // throws if n < 5

  int num_states() const override { return static_cast<int>(cells_.size()); }
  int num_actions() const override { return 4; }
  StateId initial_state() const override { return initial_; }
  bool is_terminal(StateId s) const override { return s == goal_; }
  Transition step(StateId s, ActionId a) const override;
  std::string describe_state(StateId s) const override;

  const GridWorldSpec& spec() const { return spec_; }
  int side() const { return spec_.n; }
  // -1 when (i, j) is out of range or a wall cell
  StateId index_of(int i, int j) const;
  std::pair<int, int> cell_of(StateId s) const { return cells_[s]; }
  bool cell_available(int i, int j) const;

 private:
  GridWorldSpec spec_;
  std::vector<std::pair<int, int>> cells_;  // state id -> (i, j)
  std::vector<StateId> cell_index_;         // (i-1)*n+(j-1) -> state id or -1
  StateId initial_ = 0;
  StateId goal_ = 0;
};

// Offline (first) and online (second) prior policies for the grid:
//   offline: right 0.9 along row 1 at (1,j), j = 1..n-1; case 'b' additionally
//            turns (3,4) into a two-arrow row (up 0.4, right 0.4).
//   online:  left 0.9 at (3,j), j = 2..n, and down 0.9 at (3,1).
// Single-arrow rows put 0.9 on the arrow and split 0.1 over the rest;
// two-arrow rows put 0.4+0.4 and split 0.2 over the rest. Other states are
// uniform.
std::pair<PriorPolicy, PriorPolicy> gridworld_priors(const GridWorld& env);

// ---------------------------------------------------------------------------
// Fabrication-process mock environment. A state is the tuple of parameter
// levels (two levels per parameter); an action sets one parameter to one
// level (a self-loop when it is already there).
//   geometry 1: parameters (flow, speed)      -> 4 states, 4 actions
//   geometry 2: parameters (flow, speed, fan) -> 8 states, 6 actions
// Levels: flow {0.4, 1.0}, speed {7500, 2500} mm/min, fan {off, on}.
// Targets: geometry 1 -> (flow 2, speed 2); geometry 2 -> (2, 2, 2).
// Initial states: geometry 1 -> (1, 1); geometry 2 -> (2, 2, 1).
// ---------------------------------------------------------------------------

struct AmProcessSpec {
  int geometry = 1;  // 1 or 2
  double reward_goal = 1.0;
  double reward_other = 0.0;
};

class AmProcess final : public Environment {
 public:
  explicit AmProcess(const AmProcessSpec& spec);  // throws on bad geometry

  int num_states() const override { return 1 << num_params_; }
  int num_actions() const override { return 2 * num_params_; }
  StateId initial_state() const override { return initial_; }
  bool is_terminal(StateId s) const override { return s == target_; }
  Transition step(StateId s, ActionId a) const override;
  std::string describe_state(StateId s) const override;

  const AmProcessSpec& spec() const { return spec_; }
  int num_params() const { return num_params_; }
  StateId target_state() const { return target_; }
  // levels are 1-based, one per parameter
  std::vector<int> levels_of(StateId s) const;
  StateId index_of_levels(const std::vector<int>& levels) const;

 private:
  AmProcessSpec spec_;
  int num_params_ = 2;
  StateId initial_ = 0;
  StateId target_ = 0;
};

enum class Knowledge { kOffline, kOnline };

// Prior policies for the fabrication mock, per the published constructions:
//   G1 offline: at (1,1) and (1,2), 0.9 on flow->2, rest split equally.
//   G2 offline: at (1,1,1) and (1,2,1), 0.9 on flow->2, 0.02 on the rest.
//   G2 online:  at (1,1,1) 0.9 on flow->2; at (2,1,1) 0.9 on speed->2.
// All other states uniform. Requesting an online prior for geometry 1 throws:
// there is none.
PriorPolicy am_priors(const AmProcess& env, Knowledge knowledge);

// Turns a greedy trajectory from a source task into a prior for the target
// environment: every (state, action) on the path gets `strength` on the
// recorded action and (1-strength)/(|A|-1) on the rest; all other states are
// uniform. The path must already be expressed in target-env indices.
// Requires 0.5 < strength < 1.
PriorPolicy extract_online_prior(
    const std::vector<std::pair<StateId, ActionId>>& greedy_path,
    const Environment& target_env, double strength);

// ASCII map of the grid: walls '#', start 'S', goal 'G'. When `greedy` is
// given (one action per state), available cells show the action arrow.
std::string render_grid(const GridWorld& env,
                        const std::vector<ActionId>* greedy = nullptr);

// State/transition listing for the fabrication mock.
std::string render_am(const AmProcess& env);

}  // namespace cgl
