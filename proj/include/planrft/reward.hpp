#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "planrft/catalog.hpp"
#include "planrft/response.hpp"

namespace planrft {

// Gold action suffix the response is scored against. Names are stored
// normalized; k >= 1.
struct ReferenceAnswer {
  std::vector<std::string> actions;

  static ReferenceAnswer from(std::vector<std::string> raw_actions);
  int k() const { return static_cast<int>(actions.size()); }

  bool operator==(const ReferenceAnswer&) const = default;
};

struct RewardBreakdown {
  double r_structure = 0.0;       // {0, 0.125}
  double r_valid = 0.0;           // [0, 0.125]
  double r_match = 0.0;           // [0, 0.25]
  int matched_prefix_n = 0;
  double r_accuracy_curve = 0.0;  // [0, 1]
  double single_step_penalty = 0.0;  // {0, -0.25}
  double total = 0.0;
};

struct FormatReward {
  double r_structure = 0.0;
  double r_valid = 0.0;
  double r_match = 0.0;
};

FormatReward format_reward(const PlanResponse& resp, const ActionCatalog& catalog);

// Longest n such that predicted[i] == reference[i] for all i < n, under
// normalized-name comparison. Stops at the first mismatch.
int prefix_match(std::span<const std::string> predicted, const ReferenceAnswer& reference);

// R(n; k) = n(n+1) / (k(k+1)). Throws std::domain_error outside 0<=n<=k, k>=1.
double allocation_curve(int n, int k);

struct AccuracyReward {
  double curve = 0.0;
  double penalty = 0.0;
  int n = 0;
};

// emitted_steps is the total number of plan steps the model produced
// (including ill-formed ones); the k=1 redundancy penalty keys off it.
AccuracyReward accuracy_reward(std::span<const std::string> predicted,
                               const ReferenceAnswer& reference,
                               std::size_t emitted_steps);

inline AccuracyReward accuracy_reward(std::span<const std::string> predicted,
                                      const ReferenceAnswer& reference) {
  return accuracy_reward(predicted, reference, predicted.size());
}

RewardBreakdown total_reward(const std::string& raw_response, const ReferenceAnswer& reference,
                             const ActionCatalog& catalog);

// Same composition, starting from an already-parsed response.
RewardBreakdown total_reward(const PlanResponse& resp, const ReferenceAnswer& reference,
                             const ActionCatalog& catalog);

}  // namespace planrft
