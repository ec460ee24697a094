#include "planrft/filter.hpp"

namespace planrft {

std::pair<int, double> group_accuracy(const RolloutGroup& group) {
  int full = 0;
  for (const ResponseRecord& r : group.responses) {
    if (r.accuracy_curve == 1.0) ++full;
  }
  const double g = static_cast<double>(group.responses.size());
  return {full, g > 0 ? full / g : 0.0};
}

bool accept(const RolloutGroup& group, const FilterConfig& cfg) {
  const double fraction = group_accuracy(group).second;
  return fraction >= cfg.lower_bound && fraction <= cfg.upper_bound;
}

FlushReport MemoryBuffer::push_and_maybe_flush(RolloutGroup group, const FilterConfig& cfg,
                                               const Trainer& trainer) {
  groups_.push_back(std::move(group));
  ++total_seen_;
  ++total_accepted_;

  FlushReport report;
  if (static_cast<int>(groups_.size()) < cfg.buffer_capacity) return report;

  for (int i = 0; i < cfg.updates_per_flush; ++i) {
    trainer(std::span<const RolloutGroup>(groups_));  // may throw; buffer kept
    ++report.steps_run;
  }
  groups_.clear();
  report.flushed = true;
  return report;
}

}  // namespace planrft
