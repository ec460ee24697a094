#include "planrft/response.hpp"

#include <cmath>

#include <json.hpp>

#include "planrft/catalog.hpp"

namespace planrft {

namespace {

// Finds the first balanced {...} region starting at or after `from`,
// respecting JSON string literals and escapes. Returns npos-pair on failure.
std::pair<std::size_t, std::size_t> find_balanced_object(const std::string& s, std::size_t from) {
  std::size_t start = s.find('{', from);
  while (start != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
      char c = s[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) return {start, i + 1};
      }
    }
    start = s.find('{', start + 1);
  }
  return {std::string::npos, std::string::npos};
}

std::optional<std::string> field_as_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j[key];
  if (v.is_string()) return v.get<std::string>();
  // Non-string scalars count as present; keep their textual form so the
  // structure survives a render/parse round trip.
  return v.dump();
}

PlanStep parse_step(const nlohmann::json& e) {
  PlanStep step;
  if (!e.is_object()) return step;
  if (e.contains("action_id")) {
    const auto& v = e["action_id"];
    if (v.is_number_integer()) {
      step.action_id = v.get<long long>();
    } else if (v.is_number_float()) {
      double d = v.get<double>();
      if (std::trunc(d) == d) step.action_id = static_cast<long long>(d);
    }
  }
  if (e.contains("action_name") && e["action_name"].is_string()) {
    step.action_name = e["action_name"].get<std::string>();
  }
  step.well_formed = step.action_id.has_value() && step.action_name.has_value();
  return step;
}

}  // namespace

PlanResponse parse_response(const std::string& raw) {
  PlanResponse resp;
  std::size_t from = 0;
  while (true) {
    auto [start, end] = find_balanced_object(raw, from);
    if (start == std::string::npos) return resp;  // parse_ok stays false
    nlohmann::json j = nlohmann::json::parse(raw.substr(start, end - start), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      from = start + 1;
      continue;
    }
    resp.parse_ok = true;
    resp.reasoning_and_reflection = field_as_string(j, "reasoning_and_reflection");
    resp.visual_state_description = field_as_string(j, "visual_state_description");
    resp.language_plan = field_as_string(j, "language_plan");
    bool has_plan_key = j.contains("executable_plan");
    if (has_plan_key && j["executable_plan"].is_array()) {
      for (const auto& e : j["executable_plan"]) resp.executable_plan.push_back(parse_step(e));
    }
    resp.has_all_top_level_fields = resp.reasoning_and_reflection.has_value() &&
                                    resp.visual_state_description.has_value() &&
                                    resp.language_plan.has_value() && has_plan_key;
    return resp;
  }
}

std::vector<std::pair<long long, std::string>> extract_action_sequence(const PlanResponse& resp) {
  std::vector<std::pair<long long, std::string>> seq;
  for (const PlanStep& s : resp.executable_plan) {
    if (s.well_formed) seq.emplace_back(*s.action_id, normalize_name(*s.action_name));
  }
  return seq;
}

std::string render_response(const PlanResponse& resp) {
  nlohmann::json j = nlohmann::json::object();
  if (resp.reasoning_and_reflection) j["reasoning_and_reflection"] = *resp.reasoning_and_reflection;
  if (resp.visual_state_description) j["visual_state_description"] = *resp.visual_state_description;
  if (resp.language_plan) j["language_plan"] = *resp.language_plan;
  if (resp.has_all_top_level_fields || !resp.executable_plan.empty()) {
    nlohmann::json plan = nlohmann::json::array();
    for (const PlanStep& s : resp.executable_plan) {
      nlohmann::json e = nlohmann::json::object();
      if (s.action_id) e["action_id"] = *s.action_id;
      if (s.action_name) e["action_name"] = *s.action_name;
      plan.push_back(std::move(e));
    }
    j["executable_plan"] = std::move(plan);
  }
  return j.dump();
}

}  // namespace planrft
