#include "planrft/eval.hpp"

#include <cstdio>
#include <fstream>

#include "planrft/response.hpp"

namespace planrft {

EpisodeResult run_episode(Planner& planner, const GeneratedTask& task, const EvalLimits& limits) {
  EpisodeResult result;
  result.task_id = task.task.task_id;

  SceneState state = task.scene;
  std::vector<std::string> history;
  auto progress = [&] {
    auto [satisfied, total] = check_goal(state, task.task);
    return static_cast<double>(satisfied) / static_cast<double>(total);
  };

  int emissions = 0;
  bool done = progress() == 1.0;
  while (!done && result.env_steps < limits.max_env_steps && emissions <= limits.max_replans) {
    ++emissions;
    std::string text = planner.plan(task, state, history);
    PlanResponse resp = parse_response(text);

    int executed_this_plan = 0;
    for (const PlanStep& step : resp.executable_plan) {
      if (!step.well_formed) break;  // a hole ends the executable part
      if (executed_this_plan >= limits.max_plan_len) break;
      const Action* action = task.catalog.by_name(*step.action_name);
      if (!action) {
        history.push_back(*step.action_name + " -> invalid(unknown action)");
        result.transcript.push_back(history.back());
        break;
      }
      Feedback fb = apply_action(state, *action);
      ++result.env_steps;
      ++executed_this_plan;
      history.push_back(action->name + (fb.ok ? " -> ok" : " -> invalid(" + fb.message + ")"));
      result.transcript.push_back(history.back());
      if (!fb.ok) break;
      if (progress() == 1.0) {
        done = true;
        break;
      }
      if (result.env_steps >= limits.max_env_steps) break;
    }
    // Unparseable text or an empty plan simply falls through to a replan.
  }
  result.replans = emissions > 0 ? emissions - 1 : 0;
  result.progress_rate = progress();
  result.success = result.progress_rate == 1.0;
  return result;
}

std::pair<std::vector<EpisodeResult>, EvalAggregate> evaluate_policy(
    Planner& planner, std::span<const GeneratedTask> tasks, const EvalLimits& limits) {
  std::vector<EpisodeResult> results;
  EvalAggregate agg;
  for (const GeneratedTask& task : tasks) {
    results.push_back(run_episode(planner, task, limits));
    const EpisodeResult& r = results.back();
    agg.sr += r.success ? 1.0 : 0.0;
    agg.pr += r.progress_rate;
    agg.es += r.env_steps;
  }
  agg.episodes = static_cast<int>(results.size());
  if (agg.episodes > 0) {
    agg.sr /= agg.episodes;
    agg.pr /= agg.episodes;
    agg.es /= agg.episodes;
  }
  return {std::move(results), agg};
}

namespace {

std::string render_plan_text(const GeneratedTask& task, const SceneState& state,
                             std::span<const std::string> actions, const std::string& note) {
  PlanResponse resp;
  resp.reasoning_and_reflection = note;
  resp.visual_state_description = render_observation(state);
  std::string lang;
  for (const std::string& a : actions) {
    if (!lang.empty()) lang += ", then ";
    lang += a;
  }
  resp.language_plan = lang.empty() ? "nothing to do" : lang;
  for (const std::string& a : actions) {
    const Action* act = task.catalog.by_name(a);
    PlanStep step;
    step.action_id = act ? act->id : -1;
    step.action_name = a;
    step.well_formed = true;
    resp.executable_plan.push_back(std::move(step));
  }
  resp.has_all_top_level_fields = true;
  resp.parse_ok = true;
  return render_response(resp);
}

}  // namespace

std::string OraclePlanner::plan(const GeneratedTask& task, const SceneState& state,
                                const std::vector<std::string>& history) {
  std::vector<std::string> actions = oracle_plan(task.task, state);
  return render_plan_text(task, state, actions, "Greedy goal-directed plan.");
}

std::string RandomPlanner::plan(const GeneratedTask& task, const SceneState& state,
                                const std::vector<std::string>& history) {
  const auto& actions = task.catalog.actions();
  std::vector<std::string> plan;
  const int len = 1 + static_cast<int>(rng_.next_below(8));
  for (int i = 0; i < len; ++i) {
    plan.push_back(actions[rng_.next_below(actions.size())].name);
  }
  return render_plan_text(task, state, plan, "Random exploration.");
}

std::string ToyPolicyPlanner::plan(const GeneratedTask& task, const SceneState& state,
                                   const std::vector<std::string>& history) {
  Rng unused(0, "greedy");
  std::vector<std::string> plain;
  plain.reserve(history.size());
  for (const std::string& h : history) {
    std::size_t cut = h.find(" -> ");
    plain.push_back(cut == std::string::npos ? h : h.substr(0, cut));
  }
  SampledPlan sampled =
      sample_plan(policy_, task, state, plain, max_plan_len_, /*temperature=*/0.0, unused);
  return sampled.text;
}

void write_eval_csv(const std::string& path, std::span<const EpisodeResult> results,
                    const EvalAggregate& aggregate) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write eval report: " + path);
  out << "task_id,success,progress_rate,env_steps,replans\n";
  char buf[128];
  for (const EpisodeResult& r : results) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%d,%d\n", r.task_id.c_str(), r.success ? 1 : 0,
                  r.progress_rate, r.env_steps, r.replans);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "aggregate,%.6f,%.6f,%.6f,%d\n", aggregate.sr, aggregate.pr,
                aggregate.es, aggregate.episodes);
  out << buf;
}

}  // namespace planrft
