#include "planrft/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "planrft/rng.hpp"

namespace planrft {

namespace {

struct ObjectTraits {
  bool sliceable = false;
  bool cleanable = false;
  bool heatable = false;
  bool coolable = false;
  bool toggleable = false;
};

const std::map<std::string, ObjectTraits>& object_traits() {
  static const std::map<std::string, ObjectTraits> traits = {
      {"apple", {true, true, true, true, false}},
      {"bread", {true, false, true, false, false}},
      {"tomato", {true, true, false, true, false}},
      {"potato", {true, true, true, true, false}},
      {"mug", {false, true, true, true, false}},
      {"cup", {false, true, false, true, false}},
      {"plate", {false, true, false, false, false}},
      {"handtowel", {false, true, false, false, false}},
      {"soapbar", {false, true, false, false, false}},
      {"desklamp", {false, false, false, false, true}},
      {"candle", {false, false, false, false, true}},
      {"book", {false, false, false, false, false}},
      {"keychain", {false, false, false, false, false}},
      {"knife", {false, true, false, false, false}},
  };
  return traits;
}

ObjectTraits traits_of(const std::string& type) {
  auto it = object_traits().find(type);
  return it == object_traits().end() ? ObjectTraits{} : it->second;
}

const std::vector<std::pair<std::string, bool>>& receptacle_pool() {
  // name, openable
  static const std::vector<std::pair<std::string, bool>> pool = {
      {"countertop", false}, {"sink", false},      {"fridge", true},
      {"microwave", false},  {"diningtable", false}, {"cabinet", true},
      {"drawer", true},      {"garbagecan", false}, {"shelf", false},
      {"box", true},
  };
  return pool;
}

bool receptacle_accessible(const SceneState& s, const std::string& rec) {
  auto it = s.receptacles.find(rec);
  return it != s.receptacles.end() && (!it->second.openable || it->second.open);
}

const char* predicate_verb(PredicateKind k) {
  switch (k) {
    case PredicateKind::Sliced: return "slice";
    case PredicateKind::Hot: return "heat";
    case PredicateKind::Cold: return "cool";
    case PredicateKind::Clean: return "clean";
    case PredicateKind::On: return "toggle";
    case PredicateKind::In: return "put";
    case PredicateKind::Near: return "near";
  }
  return "?";
}

}  // namespace

bool condition_holds(const SceneState& state, const Condition& cond) {
  auto it = state.objects.find(cond.object);
  if (it == state.objects.end()) return false;
  const ObjectState& o = it->second;
  switch (cond.kind) {
    case PredicateKind::Sliced: return o.sliced;
    case PredicateKind::Hot: return o.hot;
    case PredicateKind::Cold: return o.cold;
    case PredicateKind::Clean: return o.clean;
    case PredicateKind::On: return o.on;
    case PredicateKind::In: return o.location == cond.target;
    case PredicateKind::Near: {
      auto jt = state.objects.find(cond.target);
      if (jt == state.objects.end()) return false;
      return o.location != "agent" && o.location == jt->second.location;
    }
  }
  return false;
}

std::pair<int, int> check_goal(const SceneState& state, const TaskSpec& task) {
  int satisfied = 0;
  for (const Condition& c : task.conditions) {
    if (condition_holds(state, c)) ++satisfied;
  }
  return {satisfied, static_cast<int>(task.conditions.size())};
}

Feedback apply_action(SceneState& s, const Action& action) {
  auto invalid = [](std::string why) { return Feedback{false, std::move(why)}; };
  auto ok = []() { return Feedback{true, "success"}; };

  switch (action.skill) {
    case Skill::Goto: {
      if (!s.receptacles.count(action.object)) return invalid("no such place: " + action.object);
      s.agent_location = action.object;
      return ok();
    }
    case Skill::Pickup: {
      if (s.holding) return invalid("already holding " + *s.holding);
      auto it = s.objects.find(action.object);
      if (it == s.objects.end()) return invalid("no such object: " + action.object);
      if (it->second.location != s.agent_location)
        return invalid(action.object + " is not here");
      if (!receptacle_accessible(s, it->second.location))
        return invalid(it->second.location + " is closed");
      it->second.location = "agent";
      s.holding = action.object;
      return ok();
    }
    case Skill::Put: {
      if (!s.holding || *s.holding != action.object)
        return invalid("not holding " + action.object);
      if (!receptacle_accessible(s, s.agent_location))
        return invalid(s.agent_location + " is closed");
      s.objects.at(action.object).location = s.agent_location;
      s.holding.reset();
      return ok();
    }
    case Skill::Open: {
      auto it = s.receptacles.find(action.object);
      if (it == s.receptacles.end()) return invalid("no such place: " + action.object);
      if (s.agent_location != action.object) return invalid("not at " + action.object);
      if (!it->second.openable) return invalid(action.object + " cannot be opened");
      if (it->second.open) return invalid(action.object + " is already open");
      it->second.open = true;
      return ok();
    }
    case Skill::Close: {
      auto it = s.receptacles.find(action.object);
      if (it == s.receptacles.end()) return invalid("no such place: " + action.object);
      if (s.agent_location != action.object) return invalid("not at " + action.object);
      if (!it->second.openable) return invalid(action.object + " cannot be closed");
      if (!it->second.open) return invalid(action.object + " is already closed");
      it->second.open = false;
      return ok();
    }
    case Skill::Toggle: {
      auto it = s.objects.find(action.object);
      if (it == s.objects.end()) return invalid("no such object: " + action.object);
      if (!traits_of(it->second.type).toggleable)
        return invalid(action.object + " cannot be toggled");
      if (it->second.location != s.agent_location) return invalid(action.object + " is not here");
      if (!receptacle_accessible(s, it->second.location))
        return invalid(it->second.location + " is closed");
      it->second.on = !it->second.on;
      return ok();
    }
    case Skill::Slice: {
      auto it = s.objects.find(action.object);
      if (it == s.objects.end()) return invalid("no such object: " + action.object);
      if (!traits_of(it->second.type).sliceable)
        return invalid(action.object + " cannot be sliced");
      if (it->second.sliced) return invalid(action.object + " is already sliced");
      if (it->second.location != s.agent_location) return invalid(action.object + " is not here");
      if (!receptacle_accessible(s, it->second.location))
        return invalid(it->second.location + " is closed");
      if (!s.holding || s.objects.at(*s.holding).type != "knife")
        return invalid("need to hold a knife");
      it->second.sliced = true;
      return ok();
    }
    case Skill::Clean: {
      auto it = s.objects.find(action.object);
      if (it == s.objects.end()) return invalid("no such object: " + action.object);
      if (!traits_of(it->second.type).cleanable)
        return invalid(action.object + " cannot be cleaned");
      if (it->second.clean) return invalid(action.object + " is already clean");
      if (!s.holding || *s.holding != action.object)
        return invalid("not holding " + action.object);
      if (s.agent_location != "sink") return invalid("need to be at the sink");
      it->second.clean = true;
      return ok();
    }
    case Skill::Heat: {
      auto it = s.objects.find(action.object);
      if (it == s.objects.end()) return invalid("no such object: " + action.object);
      if (!traits_of(it->second.type).heatable)
        return invalid(action.object + " cannot be heated");
      if (!s.holding || *s.holding != action.object)
        return invalid("not holding " + action.object);
      if (s.agent_location != "microwave") return invalid("need to be at the microwave");
      it->second.hot = true;
      it->second.cold = false;
      return ok();
    }
    case Skill::Cool: {
      auto it = s.objects.find(action.object);
      if (it == s.objects.end()) return invalid("no such object: " + action.object);
      if (!traits_of(it->second.type).coolable)
        return invalid(action.object + " cannot be cooled");
      if (!s.holding || *s.holding != action.object)
        return invalid("not holding " + action.object);
      if (s.agent_location != "fridge") return invalid("need to be at the fridge");
      it->second.cold = true;
      it->second.hot = false;
      return ok();
    }
  }
  return invalid("unknown skill");
}

Feedback apply_action_by_name(SceneState& state, const std::string& name,
                              const ActionCatalog& catalog) {
  const Action* a = catalog.by_name(name);
  if (!a) throw CatalogError("unknown action '" + name + "'");
  return apply_action(state, *a);
}

ActionCatalog ground_catalog(const SceneState& scene) {
  std::vector<Action> actions;
  int id = 0;
  auto add = [&](const std::string& name) {
    Action a;
    a.id = id++;
    a.name = name;
    actions.push_back(std::move(a));
  };
  for (const auto& [rec, r] : scene.receptacles) add("goto " + rec);
  for (const auto& [obj, o] : scene.objects) add("pickup " + obj);
  for (const auto& [obj, o] : scene.objects) add("put " + obj);
  for (const auto& [rec, r] : scene.receptacles) {
    if (r.openable) {
      add("open " + rec);
      add("close " + rec);
    }
  }
  for (const auto& [obj, o] : scene.objects) {
    ObjectTraits t = traits_of(o.type);
    if (t.toggleable) add("toggle " + obj);
    if (t.sliceable) add("slice " + obj);
    if (t.cleanable) add("clean " + obj);
    if (t.heatable) add("heat " + obj);
    if (t.coolable) add("cool " + obj);
  }
  return ActionCatalog::from_actions(std::move(actions));
}

std::string render_observation(const SceneState& s) {
  std::ostringstream os;
  os << "You are at the " << s.agent_location;
  auto rec = s.receptacles.find(s.agent_location);
  if (rec != s.receptacles.end() && rec->second.openable) {
    os << " (" << (rec->second.open ? "open" : "closed") << ")";
  }
  os << ". ";
  if (receptacle_accessible(s, s.agent_location)) {
    std::vector<std::string> here;
    for (const auto& [name, o] : s.objects) {
      if (o.location == s.agent_location) here.push_back(name);
    }
    if (here.empty()) {
      os << "Nothing is here. ";
    } else {
      os << "You see:";
      for (const std::string& h : here) os << " " << h;
      os << ". ";
    }
  }
  if (s.holding) {
    os << "You are holding the " << *s.holding << ".";
  } else {
    os << "Your hands are empty.";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Greedy oracle
// ---------------------------------------------------------------------------

namespace {

std::optional<std::string> scene_knife(const SceneState& s) {
  for (const auto& [name, o] : s.objects) {
    if (o.type == "knife") return name;
  }
  return std::nullopt;
}

// Walk/open/pickup chain for acquiring `obj`. Returns None phase when the
// object is already in hand.
GoalMove acquire(const SceneState& s, const std::string& obj) {
  if (s.holding && *s.holding == obj) return {"", MovePhase::None};
  if (s.holding) {
    // Free the hand first, opening the current receptacle if it blocks.
    if (!receptacle_accessible(s, s.agent_location))
      return {"open " + s.agent_location, MovePhase::OpenBlocking};
    return {"put " + *s.holding, MovePhase::FreeHand};
  }
  const std::string& loc = s.objects.at(obj).location;
  if (s.agent_location != loc) return {"goto " + loc, MovePhase::GotoNeeded};
  if (!receptacle_accessible(s, loc)) return {"open " + loc, MovePhase::OpenBlocking};
  return {"pickup " + obj, MovePhase::PickupNeeded};
}

// Walk/open chain toward `dest`; None phase once standing there with the
// receptacle accessible.
GoalMove reach(const SceneState& s, const std::string& dest) {
  if (s.agent_location != dest) return {"goto " + dest, MovePhase::GotoDest};
  if (!receptacle_accessible(s, dest)) return {"open " + dest, MovePhase::OpenBlocking};
  return {"", MovePhase::None};
}

}  // namespace

GoalMove next_goal_move(const SceneState& s, const Condition& cond) {
  if (condition_holds(s, cond)) return {"", MovePhase::None};

  switch (cond.kind) {
    case PredicateKind::In:
    case PredicateKind::Near: {
      std::string dest = cond.kind == PredicateKind::In
                             ? cond.target
                             : s.objects.at(cond.target).location;
      if (dest == "agent") {
        // The anchor object of a near-goal is in hand; settle it first.
        if (!receptacle_accessible(s, s.agent_location))
          return {"open " + s.agent_location, MovePhase::OpenBlocking};
        return {"put " + cond.target, MovePhase::FreeHand};
      }
      GoalMove m = acquire(s, cond.object);
      if (m.phase != MovePhase::None) return m;
      m = reach(s, dest);
      if (m.phase != MovePhase::None) return m;
      return {"put " + cond.object, MovePhase::Interact};
    }
    case PredicateKind::Sliced: {
      std::optional<std::string> knife = scene_knife(s);
      if (!knife) throw std::runtime_error("slice goal without a knife in scene");
      GoalMove m = acquire(s, *knife);
      if (m.phase != MovePhase::None) return m;
      m = reach(s, s.objects.at(cond.object).location);
      if (m.phase != MovePhase::None) return m;
      return {"slice " + cond.object, MovePhase::Interact};
    }
    case PredicateKind::Clean:
    case PredicateKind::Hot:
    case PredicateKind::Cold: {
      const char* appliance = cond.kind == PredicateKind::Clean  ? "sink"
                              : cond.kind == PredicateKind::Hot ? "microwave"
                                                                : "fridge";
      GoalMove m = acquire(s, cond.object);
      if (m.phase != MovePhase::None) return m;
      m = reach(s, appliance);
      if (m.phase != MovePhase::None) return m;
      const char* verb = cond.kind == PredicateKind::Clean  ? "clean "
                         : cond.kind == PredicateKind::Hot ? "heat "
                                                           : "cool ";
      return {verb + cond.object, MovePhase::Interact};
    }
    case PredicateKind::On: {
      if (s.holding) {
        // Hands-free is not required to toggle, but a held knife etc. is
        // irrelevant; just walk over.
      }
      GoalMove m = reach(s, s.objects.at(cond.object).location);
      if (m.phase != MovePhase::None) return m;
      return {"toggle " + cond.object, MovePhase::Interact};
    }
  }
  return {"", MovePhase::None};
}

std::vector<std::string> oracle_plan(const TaskSpec& task, SceneState state) {
  std::vector<std::string> plan;
  ActionCatalog catalog = ground_catalog(state);
  const int cap = 120;
  for (int step = 0; step < cap; ++step) {
    const Condition* focus = nullptr;
    for (const Condition& c : task.conditions) {
      if (!condition_holds(state, c)) {
        focus = &c;
        break;
      }
    }
    if (!focus) return plan;
    GoalMove m = next_goal_move(state, *focus);
    if (m.phase == MovePhase::None || m.action.empty())
      throw std::runtime_error("oracle stalled on task " + task.task_id);
    Feedback fb = apply_action_by_name(state, m.action, catalog);
    if (!fb.ok)
      throw std::runtime_error("oracle emitted invalid action '" + m.action + "': " + fb.message);
    plan.push_back(m.action);
  }
  throw std::runtime_error("oracle exceeded step cap on task " + task.task_id);
}

// ---------------------------------------------------------------------------
// Procedural task generation
// ---------------------------------------------------------------------------

namespace {

std::string condition_phrase(const Condition& c) {
  switch (c.kind) {
    case PredicateKind::Sliced: return "slice the " + c.object;
    case PredicateKind::Hot: return "heat the " + c.object;
    case PredicateKind::Cold: return "chill the " + c.object;
    case PredicateKind::Clean: return "rinse the " + c.object;
    case PredicateKind::On: return "turn on the " + c.object;
    case PredicateKind::In: return "put the " + c.object + " in the " + c.target;
    case PredicateKind::Near: return "put the " + c.object + " next to the " + c.target;
  }
  return "";
}

bool condition_order_less(const Condition& a, const Condition& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  if (a.object != b.object) return a.object < b.object;
  return a.target < b.target;
}

struct Attempt {
  TaskSpec task;
  SceneState scene;
  int plan_len = -1;
};

std::optional<Attempt> try_generate(std::uint64_t seed, const std::string& difficulty,
                                    int attempt_index) {
  const bool long_horizon = difficulty == "long_horizon";
  Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(attempt_index), "task-gen");

  SceneState scene;
  // Core receptacles are always present so every predicate kind is
  // groundable; extras add navigation variety.
  std::vector<std::pair<std::string, bool>> pool = receptacle_pool();
  for (int i = 0; i < 4; ++i) scene.receptacles[pool[i].first] = {pool[i].second, true};
  std::vector<std::pair<std::string, bool>> extras(pool.begin() + 4, pool.end());
  const int n_extra = long_horizon ? 4 : 2 + static_cast<int>(rng.next_below(2));
  for (int i = 0; i < n_extra; ++i) {
    std::size_t pick = rng.next_below(extras.size());
    scene.receptacles[extras[pick].first] = {extras[pick].second, true};
    extras.erase(extras.begin() + static_cast<long>(pick));
  }
  for (auto& [name, r] : scene.receptacles) {
    if (r.openable) r.open = rng.next_double() < 0.5;
  }

  std::vector<std::string> rec_names;
  for (const auto& [name, r] : scene.receptacles) rec_names.push_back(name);

  std::vector<std::string> obj_pool;
  for (const auto& [type, t] : object_traits()) obj_pool.push_back(type);
  const int n_obj = long_horizon ? 7 + static_cast<int>(rng.next_below(2))
                                 : 4 + static_cast<int>(rng.next_below(3));
  std::vector<std::string> chosen;
  for (int i = 0; i < n_obj && !obj_pool.empty(); ++i) {
    std::size_t pick = rng.next_below(obj_pool.size());
    chosen.push_back(obj_pool[pick]);
    obj_pool.erase(obj_pool.begin() + static_cast<long>(pick));
  }
  for (const std::string& type : chosen) {
    ObjectState o;
    o.type = type;
    o.location = rec_names[rng.next_below(rec_names.size())];
    scene.objects[type] = o;  // one instance per type
  }
  scene.agent_location = rec_names[rng.next_below(rec_names.size())];

  const bool has_knife = scene.objects.count("knife") > 0;

  // Candidate conditions, one object each, knife reserved as a tool.
  std::vector<Condition> candidates;
  for (const auto& [name, o] : scene.objects) {
    if (o.type == "knife") continue;
    ObjectTraits t = traits_of(o.type);
    if (t.sliceable && has_knife) candidates.push_back({PredicateKind::Sliced, name, ""});
    if (t.cleanable) candidates.push_back({PredicateKind::Clean, name, ""});
    if (t.heatable) candidates.push_back({PredicateKind::Hot, name, ""});
    if (t.coolable) candidates.push_back({PredicateKind::Cold, name, ""});
    if (t.toggleable) candidates.push_back({PredicateKind::On, name, ""});
    for (const std::string& rec : rec_names) {
      if (rec != o.location) candidates.push_back({PredicateKind::In, name, rec});
    }
  }
  for (const auto& [n1, o1] : scene.objects) {
    if (o1.type == "knife") continue;
    for (const auto& [n2, o2] : scene.objects) {
      if (n1 == n2 || o2.type == "knife") continue;
      if (o1.location != o2.location) candidates.push_back({PredicateKind::Near, n1, n2});
    }
  }

  const int want = long_horizon ? 4 + static_cast<int>(rng.next_below(3))
                                : 1 + static_cast<int>(rng.next_below(2));
  std::vector<Condition> conditions;
  std::vector<std::string> used_objects;
  int guard = 0;
  while (static_cast<int>(conditions.size()) < want && guard++ < 200 && !candidates.empty()) {
    std::size_t pick = rng.next_below(candidates.size());
    Condition c = candidates[pick];
    candidates.erase(candidates.begin() + static_cast<long>(pick));
    auto used = [&](const std::string& name) {
      return std::find(used_objects.begin(), used_objects.end(), name) != used_objects.end();
    };
    if (used(c.object)) continue;
    if (c.kind == PredicateKind::Near && used(c.target)) continue;
    if (condition_holds(scene, c)) continue;
    conditions.push_back(c);
    used_objects.push_back(c.object);
    if (c.kind == PredicateKind::Near) used_objects.push_back(c.target);
  }
  if (static_cast<int>(conditions.size()) < want) return std::nullopt;
  std::sort(conditions.begin(), conditions.end(), condition_order_less);

  TaskSpec task;
  task.seed = seed;
  task.category = long_horizon ? "long_horizon" : "base";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "task_%016llx", static_cast<unsigned long long>(seed));
  task.task_id = buf;
  task.conditions = conditions;
  std::string goal;
  for (const Condition& c : conditions) {
    if (!goal.empty()) goal += ", then ";
    goal += condition_phrase(c);
  }
  task.goal_text = goal;

  Attempt a;
  a.task = task;
  a.scene = scene;
  try {
    std::vector<std::string> plan = oracle_plan(task, scene);
    a.plan_len = static_cast<int>(plan.size());
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (long_horizon) {
    if (a.plan_len < 15 || a.plan_len > 40) return std::nullopt;
  } else {
    if (a.plan_len < 2 || a.plan_len > 8) return std::nullopt;
  }
  return a;
}

}  // namespace

GeneratedTask generate_task(std::uint64_t seed, const std::string& difficulty) {
  if (difficulty != "base" && difficulty != "long_horizon")
    throw std::invalid_argument("difficulty must be 'base' or 'long_horizon'");
  for (int attempt = 0; attempt < 500; ++attempt) {
    std::optional<Attempt> a = try_generate(seed, difficulty, attempt);
    if (!a) continue;
    GeneratedTask out;
    out.task = std::move(a->task);
    out.scene = std::move(a->scene);
    out.catalog = ground_catalog(out.scene);
    return out;
  }
  throw std::runtime_error("task generation failed for seed " + std::to_string(seed));
}

}  // namespace planrft
