#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace planrft {

struct PlanStep {
  std::optional<long long> action_id;
  std::optional<std::string> action_name;
  bool well_formed = false;

  bool operator==(const PlanStep&) const = default;
};

// Structured view of a model response. parse_response is total: any string
// produces a PlanResponse, with parse_ok recording whether a JSON object
// could be extracted at all.
struct PlanResponse {
  std::optional<std::string> reasoning_and_reflection;
  std::optional<std::string> visual_state_description;
  std::optional<std::string> language_plan;
  std::vector<PlanStep> executable_plan;
  bool has_all_top_level_fields = false;
  bool parse_ok = false;

  bool operator==(const PlanResponse&) const = default;
};

PlanResponse parse_response(const std::string& raw);

// (action_id, normalized action_name) for each well-formed step, in order.
// Ill-formed steps are skipped here but still count toward step totals.
std::vector<std::pair<long long, std::string>> extract_action_sequence(const PlanResponse& resp);

// Serializes back to the required JSON schema. Reparsing the result yields
// an equal PlanResponse for any parse_ok input.
std::string render_response(const PlanResponse& resp);

}  // namespace planrft
