#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "planrft/reward.hpp"

namespace planrft {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A reference trajectory: goal plus alternating (observation, action)
// steps. k = steps.size() >= 1.
struct Trajectory {
  std::string task_id;
  std::string goal;
  std::uint64_t seed = 0;
  std::string category;  // task difficulty, needed to regenerate the scene

  struct Step {
    std::string observation_ref;  // synthetic state id, e.g. "task_ab12#3"
    std::string action;           // normalized action name
    bool operator==(const Step&) const = default;
  };
  std::vector<Step> steps;

  int k() const { return static_cast<int>(steps.size()); }
  bool operator==(const Trajectory&) const = default;
};

struct TrainingSample {
  std::string id;           // "<task_id>_remain_<n-1>"
  std::string instruction;  // rendered prompt with goal + history
  std::string observation_ref;
  ReferenceAnswer answer;   // remaining actions from step n
  int source_step = 1;      // n, 1-based

  // Provenance needed to re-ground the sample in the simulator.
  std::string task_id;
  std::uint64_t seed = 0;
  std::string category;
  std::vector<std::string> history;  // the first n-1 actions

  bool operator==(const TrainingSample&) const = default;
};

// Prompt template with {goal}, {history} and {action_list} placeholders.
struct PromptTemplate {
  std::string text;

  static PromptTemplate load(const std::string& path);
  static PromptTemplate from_text(std::string text);  // validates placeholders
  std::string render(const std::string& goal, std::span<const std::string> history,
                     const std::string& action_list) const;
};

// Splits a k-action trajectory into k samples; sample n carries the first
// n-1 actions as history and the remaining k-n+1 actions as its answer.
std::vector<TrainingSample> decompose(const Trajectory& traj, const PromptTemplate& tmpl,
                                      const std::string& action_list);

// Python-style list-literal rendering used by the dataset files,
// e.g. ['goto sink', 'clean mug'].
std::string render_answer_literal(std::span<const std::string> actions);
std::vector<std::string> parse_answer_literal(const std::string& literal);

std::size_t write_samples_jsonl(std::span<const TrainingSample> samples, const std::string& path);

// Inverse of write_samples_jsonl. In lenient mode malformed lines are
// reported to `warnings` and skipped; in strict mode they are fatal with
// their line number.
std::vector<TrainingSample> read_samples_jsonl(const std::string& path, bool strict = true,
                                               std::ostream* warnings = nullptr);

void write_trajectory_json(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_json(const std::string& path);

}  // namespace planrft
