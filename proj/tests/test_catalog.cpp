#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "planrft/catalog.hpp"

using namespace planrft;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("normalize_name lowercases, collapses and trims") {
  CHECK(normalize_name("Goto handtowelholder") == "goto handtowelholder");
  CHECK(normalize_name("") == "");
  CHECK(normalize_name("  PickUp   Apple ") == "pickup apple");
  // idempotence
  for (const char* s : {"Goto handtowelholder", "", "  PickUp   Apple ", "a  B\t c"}) {
    CHECK(normalize_name(normalize_name(s)) == normalize_name(s));
  }
}

TEST_CASE("parse_skill covers the documented grammar") {
  CHECK(parse_skill("goto apple") == std::pair{Skill::Goto, std::string("apple")});
  CHECK(parse_skill("find a ladle") == std::pair{Skill::Goto, std::string("ladle")});
  CHECK(parse_skill("pick up the ladle") == std::pair{Skill::Pickup, std::string("ladle")});
  CHECK(parse_skill("turn on the desklamp") == std::pair{Skill::Toggle, std::string("desklamp")});
  CHECK(parse_skill("rinse mug") == std::pair{Skill::Clean, std::string("mug")});
  CHECK_THROWS_AS(parse_skill("defenestrate chair"), CatalogError);
  CHECK_THROWS_AS(parse_skill(""), CatalogError);
}

TEST_CASE("load of a 225-entry catalog") {
  std::string content;
  const char* verbs[] = {"goto", "pickup", "put", "open", "close"};
  for (int i = 0; i < 225; ++i) {
    content += std::to_string(i) + "\t" + verbs[i % 5] + " thing" + std::to_string(i) + "\n";
  }
  ActionCatalog cat = ActionCatalog::load(write_temp("cat225.tsv", content));
  CHECK(cat.size() == 225);
  CHECK(cat.by_id(0) != nullptr);
  CHECK(cat.by_id(224) != nullptr);
  CHECK(cat.by_id(225) == nullptr);
}

TEST_CASE("load rejects empty files and duplicate ids with context") {
  CHECK_THROWS_WITH_AS(ActionCatalog::load(write_temp("cat_empty.tsv", "")), "empty catalog",
                       CatalogError);
  std::string dup = "7\tgoto sink\n7\tgoto fridge\n";
  CHECK_THROWS_AS(ActionCatalog::load(write_temp("cat_dup.tsv", dup)), CatalogError);
  std::string dupname = "1\tgoto sink\n2\tGoto   Sink\n";
  CHECK_THROWS_AS(ActionCatalog::load(write_temp("cat_dupname.tsv", dupname)), CatalogError);
  std::string badline = "1\tgoto sink\nnot a pair\n";
  try {
    ActionCatalog::load(write_temp("cat_bad.tsv", badline));
    FAIL("expected CatalogError");
  } catch (const CatalogError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load auto-detects JSON catalogs") {
  std::string j = R"([{"id": 0, "name": "goto sink"}, {"id": 64, "name": "find a Ladle"}])";
  ActionCatalog cat = ActionCatalog::load(write_temp("cat.json", j));
  CHECK(cat.size() == 2);
  REQUIRE(cat.by_id(64) != nullptr);
  CHECK(cat.by_id(64)->name == "find a ladle");
  CHECK(cat.by_id(64)->raw_name == "find a Ladle");
  CHECK(cat.by_id(64)->skill == Skill::Goto);
  CHECK(cat.by_id(64)->object == "ladle");
}

TEST_CASE("match_pair semantics") {
  ActionCatalog cat = ActionCatalog::from_actions({
      {64, "find a Ladle", "", Skill::Goto, ""},
      {109, "pick up the Ladle", "", Skill::Pickup, ""},
  });
  CHECK(cat.match_pair(64, "find a Ladle"));
  CHECK(cat.match_pair(64, "FIND  a ladle"));
  CHECK_FALSE(cat.match_pair(64, "pick up the Ladle"));
  CHECK_FALSE(cat.match_pair(65, "find a Ladle"));
  // every catalog action satisfies match_pair with itself
  for (const Action& a : cat.actions()) CHECK(cat.match_pair(a.id, a.name));

  cat.set_strict(true);
  CHECK(cat.match_pair(64, "find a Ladle"));
  CHECK_FALSE(cat.match_pair(64, "find a ladle"));
}

TEST_CASE("by_name normalizes before lookup") {
  ActionCatalog cat = ActionCatalog::from_actions({{3, "goto garbagecan", "", Skill::Goto, ""}});
  REQUIRE(cat.by_name("Goto   GarbageCan") != nullptr);
  CHECK(cat.by_name("Goto   GarbageCan")->id == 3);
  CHECK(cat.by_name("goto sink") == nullptr);
}
