#pragma once

#include <string>
#include <vector>

#include "planrft/grpo.hpp"
#include "planrft/rng.hpp"
#include "planrft/sim.hpp"

namespace planrft {

inline constexpr int kFeatureDim = 16;

// Linear-softmax policy over action-conditional indicator features:
// p(a) ∝ exp(w · φ(context, a) / temperature). One weight per feature,
// shared across the grounded action space, so the same parameters apply
// to any scene.
class LinearPolicy final : public DifferentiablePolicy {
 public:
  explicit LinearPolicy(std::size_t dim = kFeatureDim, double temperature = 1.0);

  std::size_t param_count() const override { return w_.size(); }
  std::vector<double>& params() override { return w_; }
  const std::vector<double>& params() const override { return w_; }
  double step_log_prob(const StepRecord& step) const override;
  void add_step_log_prob_grad(const StepRecord& step, double weight,
                              std::vector<double>& grad) const override;

  double temperature() const { return temperature_; }
  void set_temperature(double t) { temperature_ = t; }

  // Binary checkpoint: magic, version, dims, temperature, row-major weights.
  // load(save(p)) is bit-exact; version or shape mismatch throws.
  void save(const std::string& path) const;
  static LinearPolicy load(const std::string& path);

 private:
  std::vector<double> w_;
  double temperature_ = 1.0;
};

// Feature vectors for every candidate at the current decision point.
// Candidates are the scene catalog's actions in order, plus a final
// synthetic "stop" candidate at index catalog.size().
std::vector<std::vector<double>> action_features(const GeneratedTask& task,
                                                 const SceneState& state,
                                                 const std::vector<std::string>& history,
                                                 int step_index);

int stop_index(const GeneratedTask& task);

struct SampledPlan {
  std::string text;               // rendered four-field JSON response
  std::vector<StepRecord> steps;  // includes the terminating stop decision
  std::vector<std::string> actions;  // emitted action names (stop excluded)
};

// Autoregressive sampling: actions are applied to a scratch copy of the
// scene as they are drawn, so later decisions see their effects. Invalid
// sampled actions leave the state unchanged but still appear in the plan.
// temperature == 0 selects the argmax deterministically.
SampledPlan sample_plan(const LinearPolicy& policy, const GeneratedTask& task, SceneState state,
                        std::vector<std::string> history, int max_len, double temperature,
                        Rng& rng);

// Per-step log-probs of an already-recorded trajectory under the current
// parameters. Matches sampling-time values when parameters are unchanged.
std::vector<double> log_prob_of(const LinearPolicy& policy, std::span<const StepRecord> steps);

}  // namespace planrft
