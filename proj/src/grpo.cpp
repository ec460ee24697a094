#include "planrft/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace planrft {

std::vector<double> compute_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw std::invalid_argument("group size must be >= 2");
  const double g = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / g;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= g;
  const double std_dev = std::sqrt(var);
  std::vector<double> adv(rewards.size(), 0.0);
  if (std_dev < 1e-8) return adv;  // degenerate group
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / std_dev;
  return adv;
}

void normalize_group(RolloutGroup& group) {
  std::vector<double> rewards;
  rewards.reserve(group.responses.size());
  for (const ResponseRecord& r : group.responses) rewards.push_back(r.reward);
  std::vector<double> adv = compute_advantages(rewards);
  for (std::size_t i = 0; i < adv.size(); ++i) group.responses[i].advantage = adv[i];
}

namespace {

// KL(theta || ref) estimator per step: exp(d) - d - 1 with d = logp_ref - logp_theta.
// Non-negative, zero at identity.
double kl_term(double logp_ref, double logp_theta) {
  const double d = logp_ref - logp_theta;
  return std::exp(d) - d - 1.0;
}

}  // namespace

LossGrad grpo_loss(const RolloutGroup& group, const DifferentiablePolicy& policy,
                   const DifferentiablePolicy& ref_policy, const GrpoConfig& cfg) {
  const std::size_t g = group.responses.size();
  if (g < 2) throw std::invalid_argument("group must contain >= 2 responses");
  const double eps = cfg.clip_epsilon;
  const double beta = cfg.kl_beta;

  LossGrad out;
  out.grad.assign(policy.param_count(), 0.0);
  double objective = 0.0;

  for (const ResponseRecord& resp : group.responses) {
    const std::size_t t_count = resp.steps.size();
    if (t_count == 0) continue;
    const double inv_t = 1.0 / static_cast<double>(t_count);
    const double a = resp.advantage;

    if (cfg.sequence_level_ratio) {
      double logp_sum = 0.0, old_sum = 0.0;
      for (const StepRecord& s : resp.steps) {
        logp_sum += policy.step_log_prob(s);
        old_sum += s.logp_old;
      }
      const double ratio = std::exp(logp_sum - old_sum);
      const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
      objective += clipped * a;
      const bool inside = ratio > 1.0 - eps && ratio < 1.0 + eps;
      double kl_sum = 0.0;
      for (const StepRecord& s : resp.steps) {
        const double lp = policy.step_log_prob(s);
        const double lr = ref_policy.step_log_prob(s);
        kl_sum += kl_term(lr, lp);
        double w = 0.0;
        if (inside) w += a * ratio;
        if (beta != 0.0) w -= beta * inv_t * (1.0 - std::exp(lr - lp));
        // Loss is the negated objective averaged over the group.
        policy.add_step_log_prob_grad(s, -w / static_cast<double>(g), out.grad);
      }
      objective -= beta * kl_sum * inv_t;
    } else {
      double surrogate = 0.0, kl_sum = 0.0;
      for (const StepRecord& s : resp.steps) {
        const double lp = policy.step_log_prob(s);
        const double lr = ref_policy.step_log_prob(s);
        const double ratio = std::exp(lp - s.logp_old);
        surrogate += std::clamp(ratio, 1.0 - eps, 1.0 + eps) * a;
        kl_sum += kl_term(lr, lp);
        double w = 0.0;
        if (ratio > 1.0 - eps && ratio < 1.0 + eps) w += a * ratio * inv_t;
        if (beta != 0.0) w -= beta * inv_t * (1.0 - std::exp(lr - lp));
        policy.add_step_log_prob_grad(s, -w / static_cast<double>(g), out.grad);
      }
      objective += surrogate * inv_t - beta * kl_sum * inv_t;
    }
  }
  out.loss = -objective / static_cast<double>(g);
  return out;
}

UpdateReport train_step(std::span<const RolloutGroup> batch, DifferentiablePolicy& policy,
                        const DifferentiablePolicy& ref_policy, const GrpoConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("train_step requires a non-empty batch");

  UpdateReport report;
  std::vector<double> grad(policy.param_count(), 0.0);
  double reward_sum = 0.0;
  std::size_t response_count = 0;

  for (const RolloutGroup& group : batch) {
    LossGrad lg = grpo_loss(group, policy, ref_policy, cfg);
    if (!std::isfinite(lg.loss)) {
      throw NumericalError("non-finite loss in group '" + group.prompt_id + "'");
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (!std::isfinite(lg.grad[i])) {
        throw NumericalError("non-finite gradient in group '" + group.prompt_id + "'");
      }
      grad[i] += lg.grad[i];
    }
    report.loss += lg.loss;
    for (const ResponseRecord& r : group.responses) {
      reward_sum += r.reward;
      ++response_count;
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  report.loss *= inv_b;
  report.mean_reward = response_count ? reward_sum / static_cast<double>(response_count) : 0.0;

  double grad_sq = 0.0;
  std::vector<double>& params = policy.params();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] *= inv_b;
    grad_sq += grad[i] * grad[i];
    params[i] -= cfg.learning_rate * grad[i];
  }
  report.grad_norm = std::sqrt(grad_sq);
  report.param_delta_norm = cfg.learning_rate * report.grad_norm;
  return report;
}

double behavior_clone_step(std::span<const BcSequence> samples, DifferentiablePolicy& policy,
                           double learning_rate) {
  if (samples.empty()) throw std::invalid_argument("behavior cloning requires samples");
  std::size_t total_steps = 0;
  for (const BcSequence& s : samples) total_steps += s.steps.size();
  if (total_steps == 0) throw std::invalid_argument("behavior cloning requires non-empty sequences");

  std::vector<double> grad(policy.param_count(), 0.0);
  double nll = 0.0;
  const double inv_n = 1.0 / static_cast<double>(total_steps);
  for (const BcSequence& seq : samples) {
    for (const StepRecord& s : seq.steps) {
      nll -= policy.step_log_prob(s);
      policy.add_step_log_prob_grad(s, -inv_n, grad);
    }
  }
  nll *= inv_n;
  if (!std::isfinite(nll)) throw NumericalError("non-finite behavior-cloning loss");
  std::vector<double>& params = policy.params();
  for (std::size_t i = 0; i < grad.size(); ++i) params[i] -= learning_rate * grad[i];
  return nll;
}

}  // namespace planrft
