// planrft: data building, scoring, training, evaluation and reporting for
// the toy embodied-planning RFT pipeline.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "planrft/dataset.hpp"
#include "planrft/eval.hpp"
#include "planrft/plot.hpp"
#include "planrft/reward.hpp"
#include "planrft/sim.hpp"
#include "planrft/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace planrft;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

const char* kind_label(PredicateKind k) {
  switch (k) {
    case PredicateKind::Sliced: return "sliced";
    case PredicateKind::Hot: return "hot";
    case PredicateKind::Cold: return "cold";
    case PredicateKind::Clean: return "clean";
    case PredicateKind::On: return "on";
    case PredicateKind::In: return "in";
    case PredicateKind::Near: return "near";
  }
  return "?";
}

json task_to_json(const TaskSpec& t) {
  json conds = json::array();
  for (const Condition& c : t.conditions) {
    conds.push_back({{"kind", kind_label(c.kind)}, {"object", c.object}, {"target", c.target}});
  }
  return json{{"task_id", t.task_id}, {"goal", t.goal_text},   {"seed", t.seed},
              {"category", t.category}, {"conditions", conds}};
}

std::string render_action_list(const ActionCatalog& catalog) {
  std::string out;
  for (const Action& a : catalog.actions()) {
    out += std::to_string(a.id) + ". " + a.name + "\n";
  }
  return out;
}

std::vector<fs::path> sorted_json_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Tasks for evaluation are regenerated from (seed, category) provenance so
// the scene, catalog and oracle certificate all come from one code path.
std::vector<GeneratedTask> load_eval_tasks(const std::string& tasks_dir, int limit) {
  std::vector<GeneratedTask> tasks;
  for (const fs::path& p : sorted_json_files(tasks_dir)) {
    if (limit > 0 && static_cast<int>(tasks.size()) >= limit) break;
    std::ifstream in(p);
    json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw DataError("task parse failure in " + p.string() + ": " + e.what());
    }
    GeneratedTask task = generate_task(j.at("seed").get<std::uint64_t>(),
                                       j.value("category", std::string("base")));
    const std::string want_id = j.value("task_id", task.task.task_id);
    if (task.task.task_id != want_id)
      throw DataError("task file " + p.string() + " does not match its seed (got " +
                      task.task.task_id + ", file says " + want_id + ")");
    tasks.push_back(std::move(task));
  }
  if (tasks.empty()) throw DataError("no task files found in " + tasks_dir);
  return tasks;
}

// ---------------------------------------------------------------------------

int cmd_gen_tasks(int count, const std::string& difficulty, std::uint64_t seed,
                  const std::string& out_dir) {
  fs::create_directories(fs::path(out_dir) / "tasks");
  fs::create_directories(fs::path(out_dir) / "trajectories");
  Rng rng(seed, "task-gen");
  json manifest = json::array();
  for (int i = 0; i < count; ++i) {
    GeneratedTask gt = generate_task(rng.next_u64(), difficulty);
    {
      std::ofstream out(fs::path(out_dir) / "tasks" / (gt.task.task_id + ".json"));
      out << task_to_json(gt.task).dump(2) << '\n';
    }
    std::vector<std::string> plan = oracle_plan(gt.task, gt.scene);
    Trajectory traj;
    traj.task_id = gt.task.task_id;
    traj.goal = gt.task.goal_text;
    traj.seed = gt.task.seed;
    traj.category = gt.task.category;
    for (std::size_t n = 0; n < plan.size(); ++n) {
      traj.steps.push_back({gt.task.task_id + "#" + std::to_string(n + 1), plan[n]});
    }
    write_trajectory_json(traj, (fs::path(out_dir) / "trajectories" / (gt.task.task_id + ".json")).string());
    manifest.push_back(gt.task.task_id);
  }
  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  mf << manifest.dump(2) << '\n';
  std::cout << "generated " << count << " " << difficulty << " tasks into " << out_dir << '\n';
  return kExitOk;
}

int cmd_build_data(const std::string& trajectories_dir, const std::string& template_path,
                   const std::string& out_path) {
  PromptTemplate tmpl = PromptTemplate::load(template_path);
  std::vector<fs::path> files = sorted_json_files(trajectories_dir);
  if (files.empty()) throw DataError("no trajectory files found in " + trajectories_dir);
  std::vector<TrainingSample> samples;
  for (const fs::path& p : files) {
    Trajectory traj = read_trajectory_json(p.string());
    GeneratedTask gt = generate_task(traj.seed, traj.category);
    if (gt.task.task_id != traj.task_id)
      throw DataError("trajectory " + p.string() + " does not match its seed");
    std::vector<TrainingSample> part = decompose(traj, tmpl, render_action_list(gt.catalog));
    samples.insert(samples.end(), part.begin(), part.end());
  }
  std::size_t n = write_samples_jsonl(samples, out_path);
  std::cout << n << " training samples\n";
  return kExitOk;
}

int cmd_score(const std::string& input_path, const std::string& catalog_path,
              const std::string& out_path, bool lenient) {
  ActionCatalog catalog = ActionCatalog::load(catalog_path);
  std::ifstream in(input_path);
  if (!in) throw DataError("cannot open responses: " + input_path);
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write breakdowns: " + out_path);

  double sum_total = 0.0, sum_accuracy = 0.0;
  long scored = 0, format_failures = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    std::string id, response_text;
    ReferenceAnswer answer;
    try {
      j = json::parse(line);
      id = j.at("id").get<std::string>();
      response_text = j.at("response_text").get<std::string>();
      answer = ReferenceAnswer::from(j.at("answer").get<std::vector<std::string>>());
    } catch (const std::exception& e) {
      if (!lenient) throw DataError("line " + std::to_string(lineno) + ": " + e.what());
      std::cerr << "warning: line " << lineno << " skipped: " << e.what() << '\n';
      continue;
    }
    RewardBreakdown rb = total_reward(response_text, answer, catalog);
    json row = {{"id", id},
                {"r_structure", rb.r_structure},
                {"r_valid", rb.r_valid},
                {"r_match", rb.r_match},
                {"matched_prefix_n", rb.matched_prefix_n},
                {"r_accuracy_curve", rb.r_accuracy_curve},
                {"single_step_penalty", rb.single_step_penalty},
                {"total", rb.total}};
    out << row.dump() << '\n';
    sum_total += rb.total;
    sum_accuracy += rb.r_accuracy_curve + rb.single_step_penalty;
    if (rb.r_structure == 0.0) ++format_failures;
    ++scored;
  }
  if (scored == 0) throw DataError("no scoreable responses in " + input_path);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "mean_total=%.10g mean_accuracy=%.10g format_failure_rate=%.10g\n",
                sum_total / scored, sum_accuracy / scored,
                static_cast<double>(format_failures) / scored);
  std::cout << buf;
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir, const std::vector<std::string>& overrides) {
  json j;
  {
    std::ifstream in(config_path);
    if (!in) throw DataError("cannot open config: " + config_path);
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw DataError("config parse failure: " + std::string(e.what()));
    }
  }
  for (const std::string& kv : overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
      return kExitUsage;
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const std::exception&) {
      parsed = value;  // bare strings are fine unquoted
    }
    j[key] = parsed;
  }
  TrainConfig cfg = TrainConfig::from_json(j);
  std::vector<TrainingSample> samples = read_samples_jsonl(data_path);
  TrainResult result = run_training(cfg, samples, out_dir);
  std::cout << (result.resumed ? "resumed; " : "") << "finished at step " << result.final_step
            << ", mean reward " << result.final_mean_reward << ", checkpoint "
            << result.checkpoint_path << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, bool oracle, bool random_baseline,
             const std::string& tasks_dir, const std::string& out_path, std::uint64_t seed,
             const EvalLimits& limits, int limit_tasks) {
  std::vector<GeneratedTask> tasks = load_eval_tasks(tasks_dir, limit_tasks);

  std::unique_ptr<Planner> planner;
  if (oracle) {
    planner = std::make_unique<OraclePlanner>();
  } else if (random_baseline) {
    planner = std::make_unique<RandomPlanner>(seed);
  } else if (!checkpoint.empty()) {
    planner = std::make_unique<ToyPolicyPlanner>(LinearPolicy::load(checkpoint), limits.max_plan_len);
  } else {
    std::cerr << "error: one of --checkpoint, --oracle, --random is required\n";
    return kExitUsage;
  }

  auto [results, aggregate] = evaluate_policy(*planner, tasks, limits);
  if (!out_path.empty()) write_eval_csv(out_path, results, aggregate);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "SR=%.10g PR=%.10g ES=%.10g episodes=%d\n", aggregate.sr,
                aggregate.pr, aggregate.es, aggregate.episodes);
  std::cout << buf;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct Curves {
  std::vector<double> step, total, acc_filtered, acc_original, length, loss;
};

Curves read_curves(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open curves: " + path);
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty curves file: " + path);
  const std::string expected =
      "step,mean_total_reward,mean_accuracy_reward_filtered,mean_accuracy_reward_original,"
      "mean_response_length,loss";
  if (header != expected)
    throw DataError("unexpected curves header in " + path + ": " + header);
  Curves c;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != 6) throw DataError("bad curves row at line " + std::to_string(lineno));
    c.step.push_back(vals[0]);
    c.total.push_back(vals[1]);
    c.acc_filtered.push_back(vals[2]);
    c.acc_original.push_back(vals[3]);
    c.length.push_back(vals[4]);
    c.loss.push_back(vals[5]);
  }
  return c;
}

int cmd_report(const std::string& run_dir, const std::string& compare_dir,
               const std::string& format, std::string out_dir) {
  if (out_dir.empty()) out_dir = run_dir;
  fs::create_directories(out_dir);
  Curves main_curves = read_curves(run_dir + "/curves.csv");
  std::optional<Curves> other;
  if (!compare_dir.empty()) other = read_curves(compare_dir + "/curves.csv");

  const std::string reward_path = out_dir + "/reward_curve." + format;
  const std::string length_path = out_dir + "/length_curve." + format;
  const std::string ablation_path = out_dir + "/ablation." + format;

  if (main_curves.step.empty()) {
    plot_placeholder(reward_path, format, "no data");
    plot_placeholder(length_path, format, "no data");
    plot_placeholder(ablation_path, format, "no data");
    std::cout << "no data\n";
    return kExitOk;
  }

  std::vector<Series> reward_series = {
      {"mean total reward", main_curves.step, main_curves.total},
      {"accuracy (filtered)", main_curves.step, main_curves.acc_filtered},
      {"accuracy (original)", main_curves.step, main_curves.acc_original},
  };
  if (other) reward_series.push_back({"compare: mean total reward", other->step, other->total});
  plot_lines(reward_path, format, "Training reward", reward_series);

  std::vector<Series> length_series = {
      {"mean response length", main_curves.step, main_curves.length}};
  if (other) length_series.push_back({"compare: mean response length", other->step, other->length});
  plot_lines(length_path, format, "Response length", length_series);

  std::vector<Bar> bars = {{"acc filtered", main_curves.acc_filtered.back()},
                           {"acc original", main_curves.acc_original.back()},
                           {"mean reward", main_curves.total.back()}};
  if (other) {
    bars.push_back({"cmp acc filtered", other->acc_filtered.back()});
    bars.push_back({"cmp acc original", other->acc_original.back()});
    bars.push_back({"cmp mean reward", other->total.back()});
  }
  plot_bars(ablation_path, format, "Final-window metrics", bars);

  std::cout << "metric,final_value\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mean_total_reward,%.10g\n", main_curves.total.back());
  std::cout << buf;
  std::snprintf(buf, sizeof(buf), "mean_accuracy_reward_filtered,%.10g\n",
                main_curves.acc_filtered.back());
  std::cout << buf;
  std::snprintf(buf, sizeof(buf), "mean_accuracy_reward_original,%.10g\n",
                main_curves.acc_original.back());
  std::cout << buf;
  std::snprintf(buf, sizeof(buf), "mean_response_length,%.10g\n", main_curves.length.back());
  std::cout << buf;
  std::cout << "plots," << reward_path << " " << length_path << " " << ablation_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embodied multi-step planning: dataset building, reward scoring, "
               "SFT + filtered GRPO training, evaluation and reporting."};
  app.require_subcommand(1);

  // gen-tasks
  auto* gen = app.add_subcommand("gen-tasks", "Generate solvable tasks and oracle trajectories");
  int gen_count = 100;
  std::string gen_difficulty = "base";
  std::uint64_t gen_seed = 1;
  std::string gen_out = "runs/tasks";
  gen->add_option("--count", gen_count, "Number of tasks")->check(CLI::NonNegativeNumber);
  gen->add_option("--difficulty", gen_difficulty, "base or long_horizon")
      ->check(CLI::IsMember({"base", "long_horizon"}));
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // build-data
  auto* build = app.add_subcommand("build-data", "Decompose trajectories into training samples");
  std::string build_traj, build_template, build_out;
  build->add_option("--trajectories", build_traj, "Directory of trajectory JSON files")->required();
  build->add_option("--template", build_template, "Prompt template file")->required();
  build->add_option("--out", build_out, "Output JSONL path")->required();

  // score
  auto* score = app.add_subcommand("score", "Batch-score responses against reference answers");
  std::string score_in, score_catalog, score_out;
  bool score_lenient = false;
  score->add_option("--input", score_in, "JSONL of {id, response_text, answer}")->required();
  score->add_option("--catalog", score_catalog, "Action catalog file")->required();
  score->add_option("--out", score_out, "Breakdown JSONL output")->required();
  score->add_flag("--lenient", score_lenient, "Skip malformed lines instead of failing");

  // train
  auto* train = app.add_subcommand("train", "SFT warm start + filtered GRPO training");
  std::string train_config, train_data, train_out;
  std::vector<std::string> train_overrides;
  train->add_option("--config", train_config, "JSON config file")->required();
  train->add_option("--data", train_data, "Training samples JSONL")->required();
  train->add_option("--out", train_out, "Run directory")->required();
  train->add_option("--set", train_overrides, "Config override key=value (flags win)");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a planner with replan-on-failure");
  std::string eval_checkpoint, eval_tasks, eval_out;
  bool eval_oracle = false, eval_random = false;
  std::uint64_t eval_seed = 1;
  int eval_limit = 0;
  EvalLimits limits;
  eval->add_option("--checkpoint", eval_checkpoint, "Policy checkpoint");
  eval->add_flag("--oracle", eval_oracle, "Use the oracle planner");
  eval->add_flag("--random", eval_random, "Use the uniform-random planner");
  eval->add_option("--tasks", eval_tasks, "Directory of task JSON files")->required();
  eval->add_option("--out", eval_out, "Per-task CSV output");
  eval->add_option("--seed", eval_seed, "Seed for the random planner");
  eval->add_option("--limit", eval_limit, "Evaluate at most this many tasks (0 = all)");
  eval->add_option("--max-env-steps", limits.max_env_steps, "Environment step budget");
  eval->add_option("--max-plan-len", limits.max_plan_len, "Actions executed per emission");
  eval->add_option("--max-replans", limits.max_replans, "Replans allowed per episode");

  // report
  auto* report = app.add_subcommand("report", "Render curves and ablation plots from a run");
  std::string report_run, report_compare, report_format = "svg", report_out;
  report->add_option("--run", report_run, "Run directory with curves.csv")->required();
  report->add_option("--compare", report_compare, "Second run directory to overlay");
  report->add_option("--format", report_format, "svg or png")
      ->check(CLI::IsMember({"svg", "png"}));
  report->add_option("--out", report_out, "Output directory (defaults to the run dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return kExitOk;
    }
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_tasks(gen_count, gen_difficulty, gen_seed, gen_out);
    if (*build) return cmd_build_data(build_traj, build_template, build_out);
    if (*score) return cmd_score(score_in, score_catalog, score_out, score_lenient);
    if (*train) return cmd_train(train_config, train_data, train_out, train_overrides);
    if (*eval)
      return cmd_eval(eval_checkpoint, eval_oracle, eval_random, eval_tasks, eval_out, eval_seed,
                      limits, eval_limit);
    if (*report) return cmd_report(report_run, report_compare, report_format, report_out);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const CatalogError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
