#include "planrft/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace planrft {

const char* skill_label(Skill s) {
  switch (s) {
    case Skill::Goto: return "goto";
    case Skill::Pickup: return "pickup";
    case Skill::Put: return "put";
    case Skill::Open: return "open";
    case Skill::Close: return "close";
    case Skill::Toggle: return "toggle";
    case Skill::Slice: return "slice";
    case Skill::Clean: return "clean";
    case Skill::Heat: return "heat";
    case Skill::Cool: return "cool";
  }
  return "?";
}

std::string normalize_name(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending_space = true;
    } else {
      if (pending_space) {
        out.push_back(' ');
        pending_space = false;
      }
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> toks;
  std::istringstream is(s);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

struct VerbRule {
  std::vector<std::string> verb;  // leading tokens
  Skill skill;
};

// Longest match first. Covers the toy catalog verbs and the ALFRED-style
// phrasings ("find a X", "pick up the X", "turn on the X", ...).
const std::vector<VerbRule>& verb_rules() {
  static const std::vector<VerbRule> rules = {
      {{"pick", "up"}, Skill::Pickup},
      {{"put", "down"}, Skill::Put},
      {{"turn", "on"}, Skill::Toggle},
      {{"turn", "off"}, Skill::Toggle},
      {{"go", "to"}, Skill::Goto},
      {{"goto"}, Skill::Goto},
      {{"find"}, Skill::Goto},
      {{"pickup"}, Skill::Pickup},
      {{"put"}, Skill::Put},
      {{"open"}, Skill::Open},
      {{"close"}, Skill::Close},
      {{"toggle"}, Skill::Toggle},
      {{"slice"}, Skill::Slice},
      {{"clean"}, Skill::Clean},
      {{"rinse"}, Skill::Clean},
      {{"heat"}, Skill::Heat},
      {{"cool"}, Skill::Cool},
  };
  return rules;
}

}  // namespace

std::pair<Skill, std::string> parse_skill(const std::string& normalized_name) {
  std::vector<std::string> toks = tokenize(normalized_name);
  if (toks.empty()) throw CatalogError("empty action name");
  for (const VerbRule& r : verb_rules()) {
    if (toks.size() < r.verb.size()) continue;
    if (!std::equal(r.verb.begin(), r.verb.end(), toks.begin())) continue;
    std::string object;
    for (std::size_t i = r.verb.size(); i < toks.size(); ++i) {
      if (toks[i] == "a" || toks[i] == "an" || toks[i] == "the") continue;
      if (!object.empty()) object.push_back(' ');
      object += toks[i];
    }
    return {r.skill, object};
  }
  throw CatalogError("unknown action verb in '" + normalized_name + "'");
}

ActionCatalog ActionCatalog::from_actions(std::vector<Action> actions) {
  if (actions.empty()) throw CatalogError("empty catalog");
  ActionCatalog cat;
  cat.actions_ = std::move(actions);
  for (std::size_t i = 0; i < cat.actions_.size(); ++i) {
    Action& a = cat.actions_[i];
    if (a.raw_name.empty()) a.raw_name = a.name;
    a.name = normalize_name(a.name);
    if (a.name.empty()) throw CatalogError("empty action name at entry " + std::to_string(i));
    auto parsed = parse_skill(a.name);
    a.skill = parsed.first;
    a.object = parsed.second;
    if (a.id < 0) throw CatalogError("negative action id " + std::to_string(a.id));
    if (!cat.by_id_.emplace(a.id, i).second)
      throw CatalogError("duplicate action id " + std::to_string(a.id));
    if (!cat.by_name_.emplace(a.name, i).second)
      throw CatalogError("duplicate action name '" + a.name + "'");
  }
  return cat;
}

ActionCatalog ActionCatalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot open catalog file: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  // Detect JSON by the first non-space character.
  std::size_t first = content.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw CatalogError("empty catalog");

  std::vector<Action> actions;
  if (content[first] == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
      throw CatalogError(std::string("catalog JSON parse failure: ") + e.what());
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
      const auto& e = j[i];
      if (!e.is_object() || !e.contains("id") || !e.contains("name") ||
          !e["id"].is_number_integer() || !e["name"].is_string()) {
        throw CatalogError("catalog entry " + std::to_string(i) +
                           " must be {id: int, name: string}");
      }
      Action a;
      a.id = e["id"].get<int>();
      a.raw_name = e["name"].get<std::string>();
      a.name = a.raw_name;
      actions.push_back(std::move(a));
    }
  } else {
    std::istringstream is(content);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw CatalogError("line " + std::to_string(lineno) + ": expected id<TAB>name");
      Action a;
      try {
        a.id = std::stoi(line.substr(0, tab));
      } catch (const std::exception&) {
        throw CatalogError("line " + std::to_string(lineno) + ": bad action id");
      }
      a.raw_name = line.substr(tab + 1);
      a.name = a.raw_name;
      actions.push_back(std::move(a));
    }
  }
  if (actions.empty()) throw CatalogError("empty catalog");
  return from_actions(std::move(actions));
}

const Action* ActionCatalog::by_id(int id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &actions_[it->second];
}

const Action* ActionCatalog::by_name(const std::string& raw_name) const {
  auto it = by_name_.find(normalize_name(raw_name));
  return it == by_name_.end() ? nullptr : &actions_[it->second];
}

bool ActionCatalog::match_pair(int id, const std::string& name) const {
  const Action* a = by_id(id);
  if (!a) return false;
  if (strict_) return a->raw_name == name;
  return a->name == normalize_name(name);
}

}  // namespace planrft
