#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planrft/catalog.hpp"

namespace planrft {

// ---------------------------------------------------------------------------
// Scene model: a handful of named receptacles, a handful of typed objects,
// and a single agent that can hold at most one object. Deterministic and
// fully symbolic.
// ---------------------------------------------------------------------------

struct ObjectState {
  std::string type;       // e.g. "apple"
  std::string location;   // receptacle name, or "agent" while held
  bool on = false;
  bool sliced = false;
  bool clean = false;
  bool hot = false;
  bool cold = false;

  bool operator==(const ObjectState&) const = default;
};

struct Receptacle {
  bool openable = false;
  bool open = true;

  bool operator==(const Receptacle&) const = default;
};

struct SceneState {
  std::map<std::string, ObjectState> objects;
  std::map<std::string, Receptacle> receptacles;
  std::string agent_location;
  std::optional<std::string> holding;

  bool operator==(const SceneState&) const = default;
};

enum class PredicateKind { Sliced, Hot, Cold, Clean, On, In, Near };

struct Condition {
  PredicateKind kind;
  std::string object;
  std::string target;  // receptacle for In, second object for Near, empty otherwise

  bool operator==(const Condition&) const = default;
};

struct TaskSpec {
  std::string task_id;
  std::string goal_text;
  std::vector<Condition> conditions;  // canonically sorted, non-empty
  std::uint64_t seed = 0;
  std::string category;  // "base" or "long_horizon"
};

struct Feedback {
  bool ok = false;
  std::string message;
};

bool condition_holds(const SceneState& state, const Condition& cond);

// (satisfied, total) over the task's goal conditions.
std::pair<int, int> check_goal(const SceneState& state, const TaskSpec& task);

// Applies one action; invalid actions leave the state unchanged and
// return a reason. Throws CatalogError for an unknown action name.
Feedback apply_action(SceneState& state, const Action& action);
Feedback apply_action_by_name(SceneState& state, const std::string& name,
                              const ActionCatalog& catalog);

// All grounded actions for a scene, in a deterministic order.
ActionCatalog ground_catalog(const SceneState& scene);

// Symbolic observation: agent location, open/closed status, visible
// objects there, and what the agent is holding.
std::string render_observation(const SceneState& state);

struct GeneratedTask {
  TaskSpec task;
  SceneState scene;
  ActionCatalog catalog;
};

// Deterministic in (seed, difficulty). The returned task is certified by
// the oracle: a valid solution exists with length in [2, 8] for "base"
// and in [15, 40] for "long_horizon".
GeneratedTask generate_task(std::uint64_t seed, const std::string& difficulty);

// ---------------------------------------------------------------------------
// Greedy oracle. next_goal_move recommends a single action advancing the
// given condition; oracle_plan chains it over the first unsatisfied
// condition until the goal holds.
// ---------------------------------------------------------------------------

enum class MovePhase {
  None,         // condition already satisfied
  GotoNeeded,   // walk to the object that must be acquired
  OpenBlocking, // open a closed receptacle in the way
  PickupNeeded,
  FreeHand,     // put down a non-needed held object
  GotoDest,
  Interact,     // the final put/slice/clean/heat/cool/toggle
};

struct GoalMove {
  std::string action;  // empty iff phase == None
  MovePhase phase = MovePhase::None;
};

GoalMove next_goal_move(const SceneState& state, const Condition& cond);

// Returns the action-name sequence solving the task from `state`.
// Throws NumericalError-free std::runtime_error if no progress is made
// within the safety cap (cannot happen for generated tasks).
std::vector<std::string> oracle_plan(const TaskSpec& task, SceneState state);

}  // namespace planrft
