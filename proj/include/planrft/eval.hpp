#pragma once

#include <span>
#include <string>
#include <vector>

#include "planrft/policy.hpp"
#include "planrft/sim.hpp"

namespace planrft {

struct EvalLimits {
  int max_env_steps = 30;
  int max_plan_len = 20;  // actions executed per emission
  int max_replans = 5;
};

// Anything that can emit a structured plan for the current state.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::string plan(const GeneratedTask& task, const SceneState& state,
                           const std::vector<std::string>& history) = 0;
};

struct EpisodeResult {
  std::string task_id;
  bool success = false;
  double progress_rate = 0.0;
  int env_steps = 0;
  int replans = 0;
  std::vector<std::string> transcript;  // "action -> feedback" lines
};

struct EvalAggregate {
  double sr = 0.0;  // fraction of fully successful episodes
  double pr = 0.0;  // mean satisfied/total
  double es = 0.0;  // mean executed actions
  int episodes = 0;
};

// Replan-on-failure loop: executes each emitted plan step by step; an
// invalid action, unusable response, or exhausted plan triggers a
// re-prompt from the latest valid state with accumulated history.
std::pair<std::vector<EpisodeResult>, EvalAggregate> evaluate_policy(
    Planner& planner, std::span<const GeneratedTask> tasks, const EvalLimits& limits);

EpisodeResult run_episode(Planner& planner, const GeneratedTask& task, const EvalLimits& limits);

// Replans greedily from the current state; certifies SR = 100% on
// generated tasks.
class OraclePlanner final : public Planner {
 public:
  std::string plan(const GeneratedTask& task, const SceneState& state,
                   const std::vector<std::string>& history) override;
};

// Uniform-random baseline over the grounded catalog.
class RandomPlanner final : public Planner {
 public:
  explicit RandomPlanner(std::uint64_t seed) : rng_(seed, "random-planner") {}
  std::string plan(const GeneratedTask& task, const SceneState& state,
                   const std::vector<std::string>& history) override;

 private:
  Rng rng_;
};

// Greedy decoding from a trained policy checkpoint.
class ToyPolicyPlanner final : public Planner {
 public:
  explicit ToyPolicyPlanner(LinearPolicy policy, int max_plan_len = 20)
      : policy_(std::move(policy)), max_plan_len_(max_plan_len) {}
  std::string plan(const GeneratedTask& task, const SceneState& state,
                   const std::vector<std::string>& history) override;

 private:
  LinearPolicy policy_;
  int max_plan_len_;
};

void write_eval_csv(const std::string& path, std::span<const EpisodeResult> results,
                    const EvalAggregate& aggregate);

}  // namespace planrft
