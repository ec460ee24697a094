#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "planrft/grpo.hpp"

namespace planrft {

struct FilterConfig {
  bool enabled = true;            // enable_accuracy_filter
  double lower_bound = 0.1;       // accuracy_lower_bound
  double upper_bound = 0.9;       // accuracy_upper_bound
  int buffer_capacity = 16;       // N_B
  int updates_per_flush = 1;      // K2
  int group_size = 8;
};

// C_x = number of responses whose accuracy-curve component equals 1.0,
// plus the fraction C_x / G the band is compared against.
std::pair<int, double> group_accuracy(const RolloutGroup& group);

// Inclusive band test on the fraction of fully-correct responses.
bool accept(const RolloutGroup& group, const FilterConfig& cfg);

struct FlushReport {
  bool flushed = false;
  int steps_run = 0;
};

// Staging store for accepted groups. Reaching capacity runs the trainer
// callback K2 times over the buffered data and clears the buffer. A
// throwing callback leaves the buffer intact.
class MemoryBuffer {
 public:
  using Trainer = std::function<void(std::span<const RolloutGroup>)>;

  FlushReport push_and_maybe_flush(RolloutGroup group, const FilterConfig& cfg,
                                   const Trainer& trainer);

  void note_rejected() { ++total_seen_; }

  const std::vector<RolloutGroup>& accepted_groups() const { return groups_; }
  long total_seen() const { return total_seen_; }
  long total_accepted() const { return total_accepted_; }

  // Resume support: restore previously buffered groups and counters.
  void restore(std::vector<RolloutGroup> groups, long seen, long accepted) {
    groups_ = std::move(groups);
    total_seen_ = seen;
    total_accepted_ = accepted;
  }

 private:
  std::vector<RolloutGroup> groups_;
  long total_seen_ = 0;
  long total_accepted_ = 0;
};

}  // namespace planrft
