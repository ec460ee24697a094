#include "planrft/dataset.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace planrft {

namespace {

const char* kSystemPrompt =
    "Solve the question. The user asks a question, and you solves it. You first thinks about "
    "the reasoning process in the mind and then provides the user with the answer.";

std::string render_history(std::span<const std::string> history) {
  std::string out = "[";
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i) out += ", ";
    out += "'" + history[i] + "'";
  }
  out += "]";
  return out;
}

}  // namespace

PromptTemplate PromptTemplate::from_text(std::string text) {
  for (const char* placeholder : {"{goal}", "{history}", "{action_list}"}) {
    if (text.find(placeholder) == std::string::npos)
      throw DataError(std::string("prompt template is missing placeholder ") + placeholder);
  }
  return PromptTemplate{std::move(text)};
}

PromptTemplate PromptTemplate::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open template: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_text(std::move(text));
}

std::string PromptTemplate::render(const std::string& goal, std::span<const std::string> history,
                                   const std::string& action_list) const {
  std::string out = text;
  auto replace_all = [&out](const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = out.find(from, pos)) != std::string::npos) {
      out.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all("{goal}", goal);
  replace_all("{history}", render_history(history));
  replace_all("{action_list}", action_list);
  return out;
}

std::vector<TrainingSample> decompose(const Trajectory& traj, const PromptTemplate& tmpl,
                                      const std::string& action_list) {
  if (traj.steps.empty()) throw DataError("cannot decompose an empty trajectory");
  std::vector<TrainingSample> samples;
  const int k = traj.k();
  for (int n = 1; n <= k; ++n) {
    TrainingSample s;
    s.id = traj.task_id + "_remain_" + std::to_string(n - 1);
    s.task_id = traj.task_id;
    s.seed = traj.seed;
    s.category = traj.category;
    s.source_step = n;
    s.observation_ref = traj.steps[static_cast<std::size_t>(n - 1)].observation_ref;
    for (int i = 0; i < n - 1; ++i) s.history.push_back(traj.steps[static_cast<std::size_t>(i)].action);
    std::vector<std::string> answer;
    for (int i = n - 1; i < k; ++i) answer.push_back(traj.steps[static_cast<std::size_t>(i)].action);
    s.answer = ReferenceAnswer::from(std::move(answer));
    s.instruction = tmpl.render(traj.goal, s.history, action_list);
    samples.push_back(std::move(s));
  }
  return samples;
}

std::string render_answer_literal(std::span<const std::string> actions) {
  std::string out = "[";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ", ";
    out += "'" + actions[i] + "'";
  }
  out += "]";
  return out;
}

std::vector<std::string> parse_answer_literal(const std::string& literal) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto skip_ws = [&] { while (i < literal.size() && std::isspace(static_cast<unsigned char>(literal[i]))) ++i; };
  skip_ws();
  if (i >= literal.size() || literal[i] != '[') throw DataError("answer literal must start with '['");
  ++i;
  skip_ws();
  if (i < literal.size() && literal[i] == ']') return out;
  while (i < literal.size()) {
    skip_ws();
    char quote = literal[i];
    if (quote != '\'' && quote != '"') throw DataError("expected quoted action in answer literal");
    ++i;
    std::string item;
    while (i < literal.size() && literal[i] != quote) item.push_back(literal[i++]);
    if (i >= literal.size()) throw DataError("unterminated string in answer literal");
    ++i;
    out.push_back(std::move(item));
    skip_ws();
    if (i < literal.size() && literal[i] == ',') {
      ++i;
      continue;
    }
    if (i < literal.size() && literal[i] == ']') return out;
    throw DataError("malformed answer literal");
  }
  throw DataError("unterminated answer literal");
}

namespace {

nlohmann::json sample_to_json(const TrainingSample& s) {
  nlohmann::json message = nlohmann::json::array();
  message.push_back({{"role", "system"}, {"content", kSystemPrompt}});
  nlohmann::json parts = nlohmann::json::array();
  parts.push_back({{"type", "image"}, {"image", s.observation_ref}});
  parts.push_back({{"type", "text"}, {"text", s.instruction}});
  message.push_back({{"role", "user"}, {"content", parts}});

  nlohmann::json j;
  j["id"] = s.id;
  j["question"] = s.instruction;
  j["answer"] = render_answer_literal(s.answer.actions);
  j["answer_list"] = s.answer.actions;
  j["message"] = message.dump();
  j["meta"] = {{"task_id", s.task_id},
               {"seed", s.seed},
               {"category", s.category},
               {"source_step", s.source_step},
               {"observation_ref", s.observation_ref},
               {"history", s.history}};
  return j;
}

TrainingSample sample_from_json(const nlohmann::json& j) {
  TrainingSample s;
  s.id = j.at("id").get<std::string>();
  s.instruction = j.at("question").get<std::string>();
  std::vector<std::string> answer;
  if (j.contains("answer_list")) {
    answer = j["answer_list"].get<std::vector<std::string>>();
  } else {
    answer = parse_answer_literal(j.at("answer").get<std::string>());
  }
  s.answer = ReferenceAnswer::from(std::move(answer));
  if (j.contains("meta")) {
    const auto& m = j["meta"];
    s.task_id = m.value("task_id", std::string());
    s.seed = m.value("seed", std::uint64_t{0});
    s.category = m.value("category", std::string());
    s.source_step = m.value("source_step", 1);
    s.observation_ref = m.value("observation_ref", std::string());
    if (m.contains("history")) s.history = m["history"].get<std::vector<std::string>>();
  }
  return s;
}

}  // namespace

std::size_t write_samples_jsonl(std::span<const TrainingSample> samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset: " + path);
  for (const TrainingSample& s : samples) out << sample_to_json(s).dump() << '\n';
  if (!out) throw DataError("dataset write failed: " + path);
  return samples.size();
}

std::vector<TrainingSample> read_samples_jsonl(const std::string& path, bool strict,
                                               std::ostream* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset: " + path);
  std::vector<TrainingSample> samples;
  std::string line;
  int lineno = 0;
  bool any_line = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    any_line = true;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      samples.push_back(sample_from_json(j));
    } catch (const std::exception& e) {
      if (strict) {
        throw DataError("line " + std::to_string(lineno) + ": " + e.what());
      }
      if (warnings) *warnings << "warning: line " << lineno << " skipped: " << e.what() << '\n';
    }
  }
  if (any_line && samples.empty()) throw DataError("no valid samples in " + path);
  return samples;
}

void write_trajectory_json(const Trajectory& traj, const std::string& path) {
  nlohmann::json steps = nlohmann::json::array();
  for (const Trajectory::Step& s : traj.steps) {
    steps.push_back({{"observation_ref", s.observation_ref}, {"action", s.action}});
  }
  nlohmann::json j = {{"task_id", traj.task_id}, {"goal", traj.goal},   {"seed", traj.seed},
                      {"category", traj.category}, {"steps", steps}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trajectory: " + path);
  out << j.dump(2) << '\n';
}

Trajectory read_trajectory_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trajectory: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError("trajectory parse failure in " + path + ": " + e.what());
  }
  Trajectory t;
  t.task_id = j.at("task_id").get<std::string>();
  t.goal = j.at("goal").get<std::string>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.category = j.value("category", std::string("base"));
  for (const auto& s : j.at("steps")) {
    t.steps.push_back({s.at("observation_ref").get<std::string>(), s.at("action").get<std::string>()});
  }
  return t;
}

}  // namespace planrft
