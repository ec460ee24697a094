#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "planrft/dataset.hpp"
#include "planrft/filter.hpp"
#include "planrft/grpo.hpp"
#include "planrft/policy.hpp"
#include "planrft/sim.hpp"

namespace planrft {

struct TrainConfig {
  std::uint64_t seed = 1;

  int sft_epochs = 0;
  double sft_learning_rate = 0.2;
  int sft_batch_size = 8;

  int rft_steps = 0;
  GrpoConfig grpo;
  FilterConfig filter;

  int checkpoint_interval = 50;
  int curve_window = 50;

  std::optional<std::string> init_checkpoint;  // warm start, e.g. an SFT model

  // Keys mirror the published hyperparameter names where one exists
  // (n_samples_per_prompt, temperature, generate_max_len,
  // actor_learning_rate, init_kl_coef, enable_accuracy_filter,
  // accuracy_lower_bound, accuracy_upper_bound).
  static TrainConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// A training sample grounded in the simulator: the regenerated task plus
// the scene state after replaying the sample's action history.
struct GroundedSample {
  const TrainingSample* sample = nullptr;
  const GeneratedTask* task = nullptr;
  SceneState state;
};

// Regenerates tasks from sample provenance and replays histories.
// Tasks are cached per task_id; lifetime is owned by the returned holder.
struct GroundedData {
  std::vector<GeneratedTask> tasks;
  std::vector<GroundedSample> grounded;
};
GroundedData ground_samples(const std::vector<TrainingSample>& samples);

struct TrainResult {
  std::string checkpoint_path;
  int final_step = 0;
  double final_mean_reward = 0.0;
  bool resumed = false;
};

// Runs the optional SFT warm start followed by the filtered GRPO loop,
// logging curves.csv and filter_stats.csv and checkpointing into out_dir.
// If out_dir holds a train_state from an earlier interrupted run with the
// same config, training resumes from it and reproduces the uninterrupted
// run exactly.
TrainResult run_training(const TrainConfig& cfg, const std::vector<TrainingSample>& samples,
                         const std::string& out_dir);

// Builds the behavior-cloning sequence (gold actions plus terminating
// stop) for one grounded sample.
BcSequence make_bc_sequence(const GroundedSample& gs);

}  // namespace planrft
