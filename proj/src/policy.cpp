#include "planrft/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "planrft/response.hpp"

namespace planrft {

namespace {

constexpr char kMagic[8] = {'P', 'L', 'R', 'F', 'T', 'P', 'O', 'L'};
constexpr std::uint32_t kCheckpointVersion = 1;

double dot(const std::vector<double>& w, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
  return s;
}

// Stable log-softmax pieces for one decision point.
struct SoftmaxView {
  std::vector<double> logits;
  double log_z = 0.0;
};

SoftmaxView softmax_view(const std::vector<double>& w, double temperature,
                         const std::vector<std::vector<double>>& candidates) {
  SoftmaxView v;
  v.logits.reserve(candidates.size());
  const double inv_t = 1.0 / temperature;
  for (const auto& f : candidates) v.logits.push_back(dot(w, f) * inv_t);
  const double m = *std::max_element(v.logits.begin(), v.logits.end());
  double z = 0.0;
  for (double l : v.logits) z += std::exp(l - m);
  v.log_z = m + std::log(z);
  return v;
}

}  // namespace

LinearPolicy::LinearPolicy(std::size_t dim, double temperature)
    : w_(dim, 0.0), temperature_(temperature) {
  if (temperature <= 0.0) throw std::invalid_argument("policy temperature must be > 0");
}

double LinearPolicy::step_log_prob(const StepRecord& step) const {
  SoftmaxView v = softmax_view(w_, temperature_, step.candidate_features);
  return v.logits[static_cast<std::size_t>(step.chosen)] - v.log_z;
}

void LinearPolicy::add_step_log_prob_grad(const StepRecord& step, double weight,
                                          std::vector<double>& grad) const {
  SoftmaxView v = softmax_view(w_, temperature_, step.candidate_features);
  const double inv_t = weight / temperature_;
  const auto& chosen = step.candidate_features[static_cast<std::size_t>(step.chosen)];
  for (std::size_t j = 0; j < w_.size(); ++j) grad[j] += inv_t * chosen[j];
  for (std::size_t i = 0; i < step.candidate_features.size(); ++i) {
    const double p = std::exp(v.logits[i] - v.log_z);
    const auto& f = step.candidate_features[i];
    for (std::size_t j = 0; j < w_.size(); ++j) grad[j] -= inv_t * p * f[j];
  }
}

void LinearPolicy::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kCheckpointVersion;
  const std::uint32_t dim = static_cast<std::uint32_t>(w_.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(reinterpret_cast<const char*>(&temperature_), sizeof(temperature_));
  out.write(reinterpret_cast<const char*>(w_.data()),
            static_cast<std::streamsize>(w_.size() * sizeof(double)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

LinearPolicy LinearPolicy::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  char magic[8];
  std::uint32_t version = 0, dim = 0;
  double temperature = 0.0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(reinterpret_cast<char*>(&temperature), sizeof(temperature));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a policy checkpoint: " + path);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint version mismatch (got " + std::to_string(version) +
                             ", expected " + std::to_string(kCheckpointVersion) + ")");
  LinearPolicy p(dim, temperature);
  in.read(reinterpret_cast<char*>(p.w_.data()),
          static_cast<std::streamsize>(dim * sizeof(double)));
  if (!in || in.gcount() != static_cast<std::streamsize>(dim * sizeof(double)))
    throw std::runtime_error("checkpoint shape mismatch: " + path);
  return p;
}

int stop_index(const GeneratedTask& task) {
  return static_cast<int>(task.catalog.size());
}

std::vector<std::vector<double>> action_features(const GeneratedTask& task,
                                                 const SceneState& state,
                                                 const std::vector<std::string>& history,
                                                 int step_index) {
  const std::vector<Action>& actions = task.catalog.actions();
  std::vector<std::vector<double>> features(actions.size() + 1,
                                            std::vector<double>(kFeatureDim, 0.0));

  std::vector<bool> satisfied(task.task.conditions.size());
  bool all_satisfied = true;
  const Condition* focus = nullptr;
  for (std::size_t i = 0; i < task.task.conditions.size(); ++i) {
    satisfied[i] = condition_holds(state, task.task.conditions[i]);
    if (!satisfied[i]) {
      all_satisfied = false;
      if (!focus) focus = &task.task.conditions[i];
    }
  }

  GoalMove recommended;
  if (focus) recommended = next_goal_move(state, *focus);

  // Names an action may mention and still count as goal-relevant.
  std::set<std::string> relevant;
  bool slice_pending = false;
  for (std::size_t i = 0; i < task.task.conditions.size(); ++i) {
    if (satisfied[i]) continue;
    const Condition& c = task.task.conditions[i];
    relevant.insert(c.object);
    if (!c.target.empty()) relevant.insert(c.target);
    auto obj = state.objects.find(c.object);
    if (obj != state.objects.end()) relevant.insert(obj->second.location);
    switch (c.kind) {
      case PredicateKind::Sliced: slice_pending = true; break;
      case PredicateKind::Clean: relevant.insert("sink"); break;
      case PredicateKind::Hot: relevant.insert("microwave"); break;
      case PredicateKind::Cold: relevant.insert("fridge"); break;
      case PredicateKind::Near: {
        auto t = state.objects.find(c.target);
        if (t != state.objects.end()) relevant.insert(t->second.location);
        break;
      }
      default: break;
    }
  }
  if (slice_pending) {
    for (const auto& [name, o] : state.objects) {
      if (o.type == "knife") {
        relevant.insert(name);
        relevant.insert(o.location);
      }
    }
  }
  if (state.holding) relevant.insert(*state.holding);

  const std::string* last_action = history.empty() ? nullptr : &history.back();

  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    std::vector<double>& f = features[i];

    SceneState probe = state;
    Feedback fb = apply_action(probe, a);
    if (!fb.ok) {
      f[2] = 1.0;
    } else {
      int gained = 0, lost = 0;
      for (std::size_t c = 0; c < task.task.conditions.size(); ++c) {
        bool now = condition_holds(probe, task.task.conditions[c]);
        if (now && !satisfied[c]) ++gained;
        if (!now && satisfied[c]) ++lost;
      }
      if (gained > 0) f[3] = 1.0;
      if (lost > 0) f[4] = 1.0;
    }

    if (!recommended.action.empty() && a.name == recommended.action) {
      switch (recommended.phase) {
        case MovePhase::GotoNeeded: f[5] = 1.0; break;
        case MovePhase::OpenBlocking: f[6] = 1.0; break;
        case MovePhase::PickupNeeded: f[7] = 1.0; break;
        case MovePhase::FreeHand: f[8] = 1.0; break;
        case MovePhase::GotoDest: f[9] = 1.0; break;
        case MovePhase::Interact: f[10] = 1.0; break;
        case MovePhase::None: break;
      }
    }

    if (last_action && a.name == *last_action) f[11] = 1.0;
    if (!relevant.count(a.object)) f[12] = 1.0;
    if (a.skill == Skill::Goto && a.object == state.agent_location) f[13] = 1.0;
    if (a.skill == Skill::Goto) f[15] = 1.0;
  }

  std::vector<double>& stop = features.back();
  stop[0] = 1.0;
  if (all_satisfied) stop[1] = 1.0;
  stop[14] = static_cast<double>(step_index) / 20.0;
  return features;
}

SampledPlan sample_plan(const LinearPolicy& policy, const GeneratedTask& task, SceneState state,
                        std::vector<std::string> history, int max_len, double temperature,
                        Rng& rng) {
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  SampledPlan plan;
  const int stop = stop_index(task);
  const std::string initial_obs = render_observation(state);
  const int start_step = static_cast<int>(history.size());

  for (int t = 0; static_cast<int>(plan.actions.size()) < max_len; ++t) {
    StepRecord rec;
    rec.candidate_features = action_features(task, state, history, start_step + t);

    int chosen;
    double logp;
    if (temperature == 0.0) {
      SoftmaxView v = softmax_view(policy.params(), 1.0, rec.candidate_features);
      chosen = static_cast<int>(
          std::max_element(v.logits.begin(), v.logits.end()) - v.logits.begin());
      logp = 0.0;
    } else {
      SoftmaxView v = softmax_view(policy.params(), temperature, rec.candidate_features);
      const double u = rng.next_double();
      double acc = 0.0;
      chosen = static_cast<int>(v.logits.size()) - 1;
      for (std::size_t i = 0; i < v.logits.size(); ++i) {
        acc += std::exp(v.logits[i] - v.log_z);
        if (u < acc) {
          chosen = static_cast<int>(i);
          break;
        }
      }
      logp = v.logits[static_cast<std::size_t>(chosen)] - v.log_z;
    }

    rec.chosen = chosen;
    rec.logp_old = logp;
    plan.steps.push_back(std::move(rec));
    if (chosen == stop) break;

    const Action& action = task.catalog.actions()[static_cast<std::size_t>(chosen)];
    apply_action(state, action);  // invalid actions are no-ops but stay in the plan
    plan.actions.push_back(action.name);
    history.push_back(action.name);
  }

  PlanResponse resp;
  resp.reasoning_and_reflection =
      "Working toward: " + task.task.goal_text + " (" +
      std::to_string(history.size()) + " actions taken so far).";
  resp.visual_state_description = initial_obs;
  std::string lang;
  for (const std::string& a : plan.actions) {
    if (!lang.empty()) lang += ", then ";
    lang += a;
  }
  resp.language_plan = lang.empty() ? "stop" : lang;
  for (const std::string& a : plan.actions) {
    const Action* act = task.catalog.by_name(a);
    PlanStep step;
    step.action_id = act->id;
    step.action_name = act->name;
    step.well_formed = true;
    resp.executable_plan.push_back(std::move(step));
  }
  resp.has_all_top_level_fields = true;
  resp.parse_ok = true;
  plan.text = render_response(resp);
  return plan;
}

std::vector<double> log_prob_of(const LinearPolicy& policy, std::span<const StepRecord> steps) {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const StepRecord& s : steps) out.push_back(policy.step_log_prob(s));
  return out;
}

}  // namespace planrft
