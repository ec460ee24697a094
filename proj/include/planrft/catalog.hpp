#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace planrft {

enum class Skill { Goto, Pickup, Put, Open, Close, Toggle, Slice, Clean, Heat, Cool };

const char* skill_label(Skill s);

// Lowercase, collapse internal whitespace, trim ends. Idempotent.
std::string normalize_name(const std::string& raw);

struct Action {
  int id = -1;
  std::string name;      // normalized form
  std::string raw_name;  // as loaded, for strict matching
  Skill skill = Skill::Goto;
  std::string object;    // may be empty (e.g. "put down the object in hand" keeps its tail)
};

// Derives (skill, object) from a normalized action name. Throws CatalogError
// if the leading verb is not in the documented grammar.
std::pair<Skill, std::string> parse_skill(const std::string& normalized_name);

struct CatalogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable after construction; safe for concurrent reads.
class ActionCatalog {
 public:
  ActionCatalog() = default;

  // Validates uniqueness of ids and normalized names.
  static ActionCatalog from_actions(std::vector<Action> actions);

  // Auto-detects `id<TAB>name` lines or a JSON array of {id, name}.
  static ActionCatalog load(const std::string& path);

  std::size_t size() const { return actions_.size(); }
  const std::vector<Action>& actions() const { return actions_; }

  const Action* by_id(int id) const;
  const Action* by_name(const std::string& raw_name) const;  // normalizes first

  // True iff the catalog contains `id` and the (normalized) name equals the
  // catalog entry for that id. With strict matching, raw bytes must match.
  bool match_pair(int id, const std::string& name) const;

  void set_strict(bool strict) { strict_ = strict; }
  bool strict() const { return strict_; }

 private:
  std::vector<Action> actions_;
  std::map<int, std::size_t> by_id_;
  std::map<std::string, std::size_t> by_name_;
  bool strict_ = false;
};

}  // namespace planrft
