#include "planrft/reward.hpp"

#include <algorithm>
#include <climits>

namespace planrft {

ReferenceAnswer ReferenceAnswer::from(std::vector<std::string> raw_actions) {
  if (raw_actions.empty()) throw std::invalid_argument("reference answer must have k >= 1");
  ReferenceAnswer ref;
  ref.actions.reserve(raw_actions.size());
  for (std::string& a : raw_actions) {
    std::string n = normalize_name(a);
    if (n.empty()) throw std::invalid_argument("reference answer contains an empty action");
    ref.actions.push_back(std::move(n));
  }
  return ref;
}

FormatReward format_reward(const PlanResponse& resp, const ActionCatalog& catalog) {
  FormatReward fr;
  if (resp.has_all_top_level_fields) fr.r_structure = 0.125;
  const std::size_t total = resp.executable_plan.size();
  if (total == 0) return fr;
  std::size_t valid = 0;
  std::size_t matched = 0;
  for (const PlanStep& s : resp.executable_plan) {
    if (!s.well_formed) continue;
    ++valid;
    if (*s.action_id >= INT_MIN && *s.action_id <= INT_MAX &&
        catalog.match_pair(static_cast<int>(*s.action_id), *s.action_name)) {
      ++matched;
    }
  }
  fr.r_valid = 0.125 * static_cast<double>(valid) / static_cast<double>(total);
  fr.r_match = 0.25 * static_cast<double>(matched) / static_cast<double>(total);
  return fr;
}

int prefix_match(std::span<const std::string> predicted, const ReferenceAnswer& reference) {
  const std::size_t limit = std::min(predicted.size(), reference.actions.size());
  std::size_t n = 0;
  while (n < limit && normalize_name(predicted[n]) == reference.actions[n]) ++n;
  return static_cast<int>(n);
}

double allocation_curve(int n, int k) {
  if (k < 1 || n < 0 || n > k) throw std::domain_error("allocation_curve requires 0 <= n <= k, k >= 1");
  return static_cast<double>(n) * (n + 1) / (static_cast<double>(k) * (k + 1));
}

AccuracyReward accuracy_reward(std::span<const std::string> predicted,
                               const ReferenceAnswer& reference, std::size_t emitted_steps) {
  AccuracyReward ar;
  ar.n = prefix_match(predicted, reference);
  ar.curve = allocation_curve(ar.n, reference.k());
  if (reference.k() == 1 && emitted_steps > 1) ar.penalty = -0.25;
  return ar;
}

RewardBreakdown total_reward(const PlanResponse& resp, const ReferenceAnswer& reference,
                             const ActionCatalog& catalog) {
  RewardBreakdown rb;
  FormatReward fr = format_reward(resp, catalog);
  rb.r_structure = fr.r_structure;
  rb.r_valid = fr.r_valid;
  rb.r_match = fr.r_match;

  // The predicted sequence for accuracy purposes ends at the first
  // ill-formed step: a plan with a hole is not executable past the hole.
  std::vector<std::string> predicted;
  for (const PlanStep& s : resp.executable_plan) {
    if (!s.well_formed) break;
    predicted.push_back(normalize_name(*s.action_name));
  }
  AccuracyReward ar = accuracy_reward(predicted, reference, resp.executable_plan.size());
  rb.matched_prefix_n = ar.n;
  rb.r_accuracy_curve = ar.curve;
  rb.single_step_penalty = ar.penalty;
  rb.total = rb.r_structure + rb.r_valid + rb.r_match + rb.r_accuracy_curve + rb.single_step_penalty;
  return rb;
}

RewardBreakdown total_reward(const std::string& raw_response, const ReferenceAnswer& reference,
                             const ActionCatalog& catalog) {
  return total_reward(parse_response(raw_response), reference, catalog);
}

}  // namespace planrft
