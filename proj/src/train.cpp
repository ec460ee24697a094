#include "planrft/train.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>

#include "planrft/reward.hpp"

namespace planrft {

namespace fs = std::filesystem;

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.seed = j.value("seed", c.seed);
  c.sft_epochs = j.value("sft_epochs", c.sft_epochs);
  c.sft_learning_rate = j.value("sft_learning_rate", c.sft_learning_rate);
  c.sft_batch_size = j.value("sft_batch_size", c.sft_batch_size);
  c.rft_steps = j.value("rft_steps", c.rft_steps);
  c.grpo.group_size = j.value("n_samples_per_prompt", c.grpo.group_size);
  c.grpo.temperature = j.value("temperature", c.grpo.temperature);
  c.grpo.max_generate_len = j.value("generate_max_len", c.grpo.max_generate_len);
  c.grpo.learning_rate = j.value("actor_learning_rate", c.grpo.learning_rate);
  c.grpo.kl_beta = j.value("init_kl_coef", c.grpo.kl_beta);
  c.grpo.clip_epsilon = j.value("clip_epsilon", c.grpo.clip_epsilon);
  c.grpo.sequence_level_ratio = j.value("sequence_level_ratio", c.grpo.sequence_level_ratio);
  c.filter.enabled = j.value("enable_accuracy_filter", c.filter.enabled);
  c.filter.lower_bound = j.value("accuracy_lower_bound", c.filter.lower_bound);
  c.filter.upper_bound = j.value("accuracy_upper_bound", c.filter.upper_bound);
  c.filter.buffer_capacity = j.value("buffer_capacity", c.filter.buffer_capacity);
  c.filter.updates_per_flush = j.value("updates_per_flush", c.filter.updates_per_flush);
  c.filter.group_size = c.grpo.group_size;
  c.grpo.updates_per_buffer = c.filter.updates_per_flush;
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
  c.curve_window = j.value("curve_window", c.curve_window);
  if (j.contains("init_checkpoint")) c.init_checkpoint = j["init_checkpoint"].get<std::string>();
  return c;
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["sft_epochs"] = sft_epochs;
  j["sft_learning_rate"] = sft_learning_rate;
  j["sft_batch_size"] = sft_batch_size;
  j["rft_steps"] = rft_steps;
  j["n_samples_per_prompt"] = grpo.group_size;
  j["temperature"] = grpo.temperature;
  j["generate_max_len"] = grpo.max_generate_len;
  j["actor_learning_rate"] = grpo.learning_rate;
  j["init_kl_coef"] = grpo.kl_beta;
  j["clip_epsilon"] = grpo.clip_epsilon;
  j["sequence_level_ratio"] = grpo.sequence_level_ratio;
  j["enable_accuracy_filter"] = filter.enabled;
  j["accuracy_lower_bound"] = filter.lower_bound;
  j["accuracy_upper_bound"] = filter.upper_bound;
  j["buffer_capacity"] = filter.buffer_capacity;
  j["updates_per_flush"] = filter.updates_per_flush;
  j["checkpoint_interval"] = checkpoint_interval;
  j["curve_window"] = curve_window;
  if (init_checkpoint) j["init_checkpoint"] = *init_checkpoint;
  return j;
}

GroundedData ground_samples(const std::vector<TrainingSample>& samples) {
  GroundedData data;
  std::map<std::string, std::size_t> task_index;
  data.tasks.reserve(samples.size());
  // Two passes so task pointers stay stable.
  for (const TrainingSample& s : samples) {
    if (task_index.count(s.task_id)) continue;
    task_index[s.task_id] = data.tasks.size();
    data.tasks.push_back(generate_task(s.seed, s.category.empty() ? "base" : s.category));
  }
  for (const TrainingSample& s : samples) {
    GroundedSample gs;
    gs.sample = &s;
    gs.task = &data.tasks[task_index.at(s.task_id)];
    gs.state = gs.task->scene;
    for (const std::string& action : s.history) {
      Feedback fb = apply_action_by_name(gs.state, action, gs.task->catalog);
      if (!fb.ok)
        throw DataError("sample " + s.id + ": history action '" + action +
                        "' is invalid: " + fb.message);
    }
    data.grounded.push_back(std::move(gs));
  }
  return data;
}

BcSequence make_bc_sequence(const GroundedSample& gs) {
  BcSequence seq;
  SceneState state = gs.state;
  std::vector<std::string> history = gs.sample->history;
  int step_index = static_cast<int>(history.size());
  for (const std::string& action : gs.sample->answer.actions) {
    StepRecord rec;
    rec.candidate_features = action_features(*gs.task, state, history, step_index);
    const Action* a = gs.task->catalog.by_name(action);
    if (!a) throw DataError("gold action '" + action + "' is outside the grounded action space");
    rec.chosen = a->id;  // grounded ids are dense indices
    seq.steps.push_back(std::move(rec));
    apply_action(state, *a);
    history.push_back(action);
    ++step_index;
  }
  StepRecord stop;
  stop.candidate_features = action_features(*gs.task, state, history, step_index);
  stop.chosen = stop_index(*gs.task);
  seq.steps.push_back(std::move(stop));
  return seq;
}

// ---------------------------------------------------------------------------
// Resume state serialization (binary, exact doubles)
// ---------------------------------------------------------------------------

namespace {

constexpr char kStateMagic[8] = {'P', 'L', 'R', 'F', 'T', 'T', 'R', 'N'};
constexpr std::uint32_t kStateVersion = 1;

struct WindowEntry {
  double mean_total = 0.0;
  double fraction_full = 0.0;
  double mean_len = 0.0;
  bool accepted = false;
};

struct LoopState {
  int step = 0;
  std::vector<double> params;
  std::vector<double> ref_params;
  std::string rng_sample;
  std::string rng_rollout;
  std::vector<RolloutGroup> buffer;
  long buffer_seen = 0;
  long buffer_accepted = 0;
  std::deque<WindowEntry> window;
  double last_loss = 0.0;
};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <typename T>
void get(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
}
void put_string(std::ofstream& out, const std::string& s) {
  put(out, static_cast<std::uint64_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string get_string(std::ifstream& in) {
  std::uint64_t n = 0;
  get(in, n);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}
void put_doubles(std::ofstream& out, const std::vector<double>& v) {
  put(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}
std::vector<double> get_doubles(std::ifstream& in) {
  std::uint64_t n = 0;
  get(in, n);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}

void save_state(const LoopState& st, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write train state: " + path);
  out.write(kStateMagic, sizeof(kStateMagic));
  put(out, kStateVersion);
  put(out, static_cast<std::int64_t>(st.step));
  put_doubles(out, st.params);
  put_doubles(out, st.ref_params);
  put_string(out, st.rng_sample);
  put_string(out, st.rng_rollout);
  put(out, static_cast<std::uint64_t>(st.buffer.size()));
  for (const RolloutGroup& g : st.buffer) {
    put_string(out, g.prompt_id);
    put(out, static_cast<std::uint64_t>(g.responses.size()));
    for (const ResponseRecord& r : g.responses) {
      put_string(out, r.text);
      put(out, r.reward);
      put(out, r.advantage);
      put(out, r.accuracy_curve);
      put(out, static_cast<std::int64_t>(r.plan_steps));
      put(out, static_cast<std::uint64_t>(r.steps.size()));
      for (const StepRecord& s : r.steps) {
        put(out, static_cast<std::uint64_t>(s.candidate_features.size()));
        for (const auto& f : s.candidate_features) put_doubles(out, f);
        put(out, static_cast<std::int64_t>(s.chosen));
        put(out, s.logp_old);
      }
    }
  }
  put(out, static_cast<std::int64_t>(st.buffer_seen));
  put(out, static_cast<std::int64_t>(st.buffer_accepted));
  put(out, static_cast<std::uint64_t>(st.window.size()));
  for (const WindowEntry& e : st.window) {
    put(out, e.mean_total);
    put(out, e.fraction_full);
    put(out, e.mean_len);
    put(out, static_cast<std::uint8_t>(e.accepted ? 1 : 0));
  }
  put(out, st.last_loss);
  if (!out) throw std::runtime_error("train state write failed: " + path);
}

std::optional<LoopState> load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint32_t version = 0;
  in.read(magic, sizeof(magic));
  get(in, version);
  if (!in || std::memcmp(magic, kStateMagic, sizeof(magic)) != 0 || version != kStateVersion)
    throw std::runtime_error("unrecognized train state file: " + path);
  LoopState st;
  std::int64_t step = 0;
  get(in, step);
  st.step = static_cast<int>(step);
  st.params = get_doubles(in);
  st.ref_params = get_doubles(in);
  st.rng_sample = get_string(in);
  st.rng_rollout = get_string(in);
  std::uint64_t n_groups = 0;
  get(in, n_groups);
  for (std::uint64_t i = 0; i < n_groups; ++i) {
    RolloutGroup g;
    g.prompt_id = get_string(in);
    std::uint64_t n_resp = 0;
    get(in, n_resp);
    for (std::uint64_t r = 0; r < n_resp; ++r) {
      ResponseRecord resp;
      resp.text = get_string(in);
      get(in, resp.reward);
      get(in, resp.advantage);
      get(in, resp.accuracy_curve);
      std::int64_t plan_steps = 0;
      get(in, plan_steps);
      resp.plan_steps = static_cast<int>(plan_steps);
      std::uint64_t n_steps = 0;
      get(in, n_steps);
      for (std::uint64_t s = 0; s < n_steps; ++s) {
        StepRecord rec;
        std::uint64_t n_cand = 0;
        get(in, n_cand);
        for (std::uint64_t c = 0; c < n_cand; ++c) rec.candidate_features.push_back(get_doubles(in));
        std::int64_t chosen = 0;
        get(in, chosen);
        rec.chosen = static_cast<int>(chosen);
        get(in, rec.logp_old);
        resp.steps.push_back(std::move(rec));
      }
      g.responses.push_back(std::move(resp));
    }
    st.buffer.push_back(std::move(g));
  }
  std::int64_t seen = 0, accepted = 0;
  get(in, seen);
  get(in, accepted);
  st.buffer_seen = seen;
  st.buffer_accepted = accepted;
  std::uint64_t n_window = 0;
  get(in, n_window);
  for (std::uint64_t i = 0; i < n_window; ++i) {
    WindowEntry e;
    get(in, e.mean_total);
    get(in, e.fraction_full);
    get(in, e.mean_len);
    std::uint8_t acc = 0;
    get(in, acc);
    e.accepted = acc != 0;
    st.window.push_back(e);
  }
  get(in, st.last_loss);
  if (!in) throw std::runtime_error("truncated train state file: " + path);
  return st;
}

// Keeps only the header and the first `rows` data rows.
void truncate_csv(const std::string& path, int rows) {
  std::ifstream in(path);
  if (!in) return;
  std::vector<std::string> keep;
  std::string line;
  while (std::getline(in, line) && static_cast<int>(keep.size()) < rows + 1) keep.push_back(line);
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const std::string& l : keep) out << l << '\n';
}

}  // namespace

TrainResult run_training(const TrainConfig& cfg, const std::vector<TrainingSample>& samples,
                         const std::string& out_dir) {
  if (samples.empty()) throw DataError("training requires at least one sample");
  fs::create_directories(out_dir);

  const std::string curves_path = out_dir + "/curves.csv";
  const std::string filter_path = out_dir + "/filter_stats.csv";
  const std::string checkpoint_path = out_dir + "/checkpoint.bin";
  const std::string state_path = out_dir + "/train_state.bin";

  {
    std::ofstream cfg_out(out_dir + "/config.json");
    cfg_out << cfg.to_json().dump(2) << '\n';
  }

  GroundedData data = ground_samples(samples);

  LinearPolicy policy(kFeatureDim, 1.0);
  if (cfg.init_checkpoint) policy = LinearPolicy::load(*cfg.init_checkpoint);

  std::optional<LoopState> resumed = load_state(state_path);
  TrainResult result;
  result.resumed = resumed.has_value();

  Rng rng_sample(cfg.seed, "rft-sample");
  Rng rng_rollout(cfg.seed, "rft-rollout");
  LinearPolicy ref_policy = policy;
  MemoryBuffer buffer;
  std::deque<WindowEntry> window;
  double last_loss = 0.0;
  int start_step = 0;

  if (resumed) {
    policy.params() = resumed->params;
    ref_policy.params() = resumed->ref_params;
    rng_sample.deserialize(resumed->rng_sample);
    rng_rollout.deserialize(resumed->rng_rollout);
    buffer.restore(std::move(resumed->buffer), resumed->buffer_seen, resumed->buffer_accepted);
    window = std::move(resumed->window);
    last_loss = resumed->last_loss;
    start_step = resumed->step;
    truncate_csv(curves_path, start_step);
    truncate_csv(filter_path, start_step);
  } else {
    // ---- SFT warm start (behavior cloning on the gold suffixes) ----
    if (cfg.sft_epochs > 0) {
      std::vector<BcSequence> sequences;
      sequences.reserve(data.grounded.size());
      for (const GroundedSample& gs : data.grounded) sequences.push_back(make_bc_sequence(gs));
      Rng rng_shuffle(cfg.seed, "sft-shuffle");
      std::vector<std::size_t> order(sequences.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (int epoch = 0; epoch < cfg.sft_epochs; ++epoch) {
        // Fisher-Yates with the substream rng.
        for (std::size_t i = order.size(); i > 1; --i) {
          std::size_t j = rng_shuffle.next_below(i);
          std::swap(order[i - 1], order[j]);
        }
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.sft_batch_size)) {
          std::vector<BcSequence> batch;
          for (std::size_t i = b;
               i < std::min(order.size(), b + static_cast<std::size_t>(cfg.sft_batch_size)); ++i)
            batch.push_back(sequences[order[i]]);
          behavior_clone_step(batch, policy, cfg.sft_learning_rate);
        }
      }
    }
    ref_policy = policy;
    std::ofstream curves(curves_path, std::ios::trunc);
    curves << "step,mean_total_reward,mean_accuracy_reward_filtered,"
              "mean_accuracy_reward_original,mean_response_length,loss\n";
    std::ofstream fstats(filter_path, std::ios::trunc);
    fstats << "step,accepted_total,rejected_total,acceptance_fraction\n";
  }

  std::ofstream curves(curves_path, std::ios::app);
  std::ofstream fstats(filter_path, std::ios::app);

  GrpoConfig grpo_cfg = cfg.grpo;

  for (int step = start_step + 1; step <= cfg.rft_steps; ++step) {
    const std::size_t idx = rng_sample.next_below(data.grounded.size());
    const GroundedSample& gs = data.grounded[idx];

    RolloutGroup group;
    group.prompt_id = gs.sample->id;
    double total_sum = 0.0, len_sum = 0.0;
    int full = 0;
    for (int g = 0; g < cfg.grpo.group_size; ++g) {
      SampledPlan plan = sample_plan(policy, *gs.task, gs.state, gs.sample->history,
                                     cfg.grpo.max_generate_len, cfg.grpo.temperature, rng_rollout);
      RewardBreakdown rb = total_reward(plan.text, gs.sample->answer, gs.task->catalog);
      ResponseRecord rec;
      rec.text = std::move(plan.text);
      rec.steps = std::move(plan.steps);
      rec.reward = rb.total;
      rec.accuracy_curve = rb.r_accuracy_curve;
      rec.plan_steps = static_cast<int>(plan.actions.size());
      total_sum += rb.total;
      len_sum += static_cast<double>(rec.plan_steps);
      if (rec.accuracy_curve == 1.0) ++full;
      group.responses.push_back(std::move(rec));
    }
    normalize_group(group);

    WindowEntry entry;
    entry.mean_total = total_sum / cfg.grpo.group_size;
    entry.fraction_full = static_cast<double>(full) / cfg.grpo.group_size;
    entry.mean_len = len_sum / cfg.grpo.group_size;
    entry.accepted = !cfg.filter.enabled || accept(group, cfg.filter);

    if (entry.accepted) {
      buffer.push_and_maybe_flush(
          std::move(group), cfg.filter,
          [&](std::span<const RolloutGroup> batch) {
            UpdateReport report = train_step(batch, policy, ref_policy, grpo_cfg);
            last_loss = report.loss;
          });
    } else {
      buffer.note_rejected();
    }

    window.push_back(entry);
    while (static_cast<int>(window.size()) > cfg.curve_window) window.pop_front();

    double w_total = 0.0, w_len = 0.0, w_orig = 0.0, w_filt = 0.0;
    int w_accepted = 0;
    for (const WindowEntry& e : window) {
      w_total += e.mean_total;
      w_len += e.mean_len;
      w_orig += e.fraction_full;
      if (e.accepted) {
        w_filt += e.fraction_full;
        ++w_accepted;
      }
    }
    const double n_w = static_cast<double>(window.size());
    const double mean_total = w_total / n_w;
    const double mean_len = w_len / n_w;
    const double mean_orig = w_orig / n_w;
    // With no accepted group in the window there is nothing filtered to
    // report; fall back to the unfiltered mean.
    const double mean_filt = w_accepted > 0 ? w_filt / w_accepted : mean_orig;

    char row[256];
    std::snprintf(row, sizeof(row), "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", step, mean_total,
                  mean_filt, mean_orig, mean_len, last_loss);
    curves << row;
    const long seen = buffer.total_seen();
    const long accepted_total = buffer.total_accepted();
    std::snprintf(row, sizeof(row), "%d,%ld,%ld,%.10g\n", step, accepted_total,
                  seen - accepted_total, seen > 0 ? static_cast<double>(accepted_total) / seen : 0.0);
    fstats << row;

    if (step % cfg.checkpoint_interval == 0 || step == cfg.rft_steps) {
      policy.save(checkpoint_path);
      curves.flush();
      fstats.flush();
      LoopState st;
      st.step = step;
      st.params = policy.params();
      st.ref_params = ref_policy.params();
      st.rng_sample = rng_sample.serialize();
      st.rng_rollout = rng_rollout.serialize();
      st.buffer = buffer.accepted_groups();
      st.buffer_seen = buffer.total_seen();
      st.buffer_accepted = buffer.total_accepted();
      st.window = window;
      st.last_loss = last_loss;
      save_state(st, state_path);
    }

    result.final_step = step;
    result.final_mean_reward = mean_total;
  }

  if (cfg.rft_steps == 0 || start_step >= cfg.rft_steps) {
    policy.save(checkpoint_path);
    result.final_step = std::max(start_step, 0);
  }
  result.checkpoint_path = checkpoint_path;
  return result;
}

}  // namespace planrft
