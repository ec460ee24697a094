#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace planrft {

// One autoregressive decision: the feature vectors of every candidate
// action at that step, the index actually taken, and its log-probability
// under the sampling-time policy.
struct StepRecord {
  std::vector<std::vector<double>> candidate_features;
  int chosen = -1;
  double logp_old = 0.0;
};

struct ResponseRecord {
  std::string text;
  std::vector<StepRecord> steps;
  double reward = 0.0;
  double advantage = 0.0;
  double accuracy_curve = 0.0;  // the accuracy-reward component, used by the filter
  int plan_steps = 0;           // emitted executable-plan length
};

struct RolloutGroup {
  std::string prompt_id;
  std::vector<ResponseRecord> responses;
};

struct GrpoConfig {
  int group_size = 8;            // n_samples_per_prompt
  double clip_epsilon = 0.2;
  double kl_beta = 0.0;          // init_kl_coef
  double learning_rate = 0.05;   // actor_learning_rate at toy scale
  double temperature = 1.0;
  int updates_per_buffer = 1;    // K2
  int max_generate_len = 20;     // generate_max_len analog (plan steps)
  bool sequence_level_ratio = false;
};

// Abstract differentiable policy over StepRecords. Parameters are a flat
// real vector; gradients are accumulated additively.
class DifferentiablePolicy {
 public:
  virtual ~DifferentiablePolicy() = default;
  virtual std::size_t param_count() const = 0;
  virtual std::vector<double>& params() = 0;
  virtual const std::vector<double>& params() const = 0;
  // log pi(chosen | candidates) under current parameters.
  virtual double step_log_prob(const StepRecord& step) const = 0;
  // grad += weight * d/dtheta log pi(chosen | candidates).
  virtual void add_step_log_prob_grad(const StepRecord& step, double weight,
                                      std::vector<double>& grad) const = 0;
};

// (r_i - mean) / population-std. All-zero on degenerate groups (std < 1e-8).
// Throws std::invalid_argument for fewer than two rewards.
std::vector<double> compute_advantages(std::span<const double> rewards);

// Fills group.responses[i].advantage in place.
void normalize_group(RolloutGroup& group);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Clipped GRPO surrogate with optional KL penalty against a reference
// policy. Per-step ratios averaged over steps by default; the literal
// sequence-level ratio is available via cfg.sequence_level_ratio.
LossGrad grpo_loss(const RolloutGroup& group, const DifferentiablePolicy& policy,
                   const DifferentiablePolicy& ref_policy, const GrpoConfig& cfg);

struct UpdateReport {
  double mean_reward = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double param_delta_norm = 0.0;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One gradient-descent update over a batch of groups (losses averaged).
// Non-finite loss or gradient aborts without touching parameters and
// reports the offending group.
UpdateReport train_step(std::span<const RolloutGroup> batch, DifferentiablePolicy& policy,
                        const DifferentiablePolicy& ref_policy, const GrpoConfig& cfg);

// Gold sequence for behavior cloning; logp_old fields are unused.
struct BcSequence {
  std::vector<StepRecord> steps;
};

// One negative-log-likelihood gradient step on the gold sequences.
// Returns the mean per-step NLL before the update.
double behavior_clone_step(std::span<const BcSequence> samples, DifferentiablePolicy& policy,
                           double learning_rate);

}  // namespace planrft
