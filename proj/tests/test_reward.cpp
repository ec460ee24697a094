#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "planrft/reward.hpp"
#include "planrft/rng.hpp"

using namespace planrft;

namespace {

ActionCatalog toy_catalog() {
  return ActionCatalog::from_actions({
      {0, "goto handtowelholder", "", Skill::Goto, ""},
      {1, "pickup handtowel", "", Skill::Pickup, ""},
      {2, "goto garbagecan", "", Skill::Goto, ""},
      {3, "put handtowel", "", Skill::Put, ""},
      {4, "goto sink", "", Skill::Goto, ""},
  });
}

std::string render_plan(const std::vector<std::pair<int, std::string>>& steps) {
  std::string out =
      R"({"reasoning_and_reflection": "r", "visual_state_description": "v", "language_plan": "l", "executable_plan": [)";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += ", ";
    out += "{\"action_id\": " + std::to_string(steps[i].first) + ", \"action_name\": \"" +
           steps[i].second + "\"}";
  }
  out += "]}";
  return out;
}

}  // namespace

TEST_CASE("format_reward component values") {
  ActionCatalog cat = toy_catalog();

  SUBCASE("fully valid response hits the component maxima") {
    PlanResponse r = parse_response(render_plan({{0, "goto handtowelholder"},
                                                 {1, "pickup handtowel"},
                                                 {2, "goto garbagecan"},
                                                 {3, "put handtowel"}}));
    FormatReward fr = format_reward(r, cat);
    CHECK(fr.r_structure == 0.125);
    CHECK(fr.r_valid == 0.125);
    CHECK(fr.r_match == 0.25);
  }

  SUBCASE("unparseable text scores zero everywhere") {
    FormatReward fr = format_reward(parse_response("garbage"), cat);
    CHECK(fr.r_structure == 0.0);
    CHECK(fr.r_valid == 0.0);
    CHECK(fr.r_match == 0.0);
  }

  SUBCASE("4 well-formed steps, 3 of 4 pairs correct") {
    PlanResponse r = parse_response(render_plan({{0, "goto handtowelholder"},
                                                 {1, "pickup handtowel"},
                                                 {2, "goto sink"},  // wrong pair
                                                 {3, "put handtowel"}}));
    FormatReward fr = format_reward(r, cat);
    CHECK(fr.r_structure == 0.125);
    CHECK(fr.r_valid == 0.125);
    CHECK(fr.r_match == doctest::Approx(0.1875).epsilon(1e-12));
  }
}

TEST_CASE("prefix_match halts at the first mismatch") {
  ReferenceAnswer ref = ReferenceAnswer::from(
      {"Goto handtowelholder", "Pickup handtowel", "Goto garbagecan", "Put handtowel"});
  std::vector<std::string> full = ref.actions;
  CHECK(prefix_match(full, ref) == 4);

  std::vector<std::string> miss0 = {"goto sink"};
  CHECK(prefix_match(miss0, ref) == 0);

  std::vector<std::string> two = {"goto handtowelholder", "pickup handtowel", "goto sink",
                                  "put handtowel"};
  CHECK(prefix_match(two, ref) == 2);

  // Longer than the reference with all k matching → n = k.
  std::vector<std::string> longer = full;
  longer.push_back("goto sink");
  CHECK(prefix_match(longer, ref) == 4);

  // Case and whitespace are normalized away.
  std::vector<std::string> cased = {"GOTO   handtowelholder"};
  CHECK(prefix_match(cased, ref) == 1);
}

TEST_CASE("allocation_curve values and domain") {
  for (int k = 1; k <= 50; ++k) {
    CHECK(allocation_curve(0, k) == 0.0);
    CHECK(allocation_curve(k, k) == 1.0);
  }
  CHECK(allocation_curve(2, 4) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(allocation_curve(3, 5) == doctest::Approx(0.4).epsilon(1e-12));
  // Increments 2n/(k(k+1)) strictly increase in n.
  for (int k = 2; k <= 20; ++k) {
    double prev_inc = -1.0;
    for (int n = 1; n <= k; ++n) {
      double inc = allocation_curve(n, k) - allocation_curve(n - 1, k);
      CHECK(inc == doctest::Approx(2.0 * n / (static_cast<double>(k) * (k + 1))).epsilon(1e-12));
      CHECK(inc > prev_inc);
      prev_inc = inc;
    }
  }
  CHECK_THROWS_AS(allocation_curve(2, 1), std::domain_error);
  CHECK_THROWS_AS(allocation_curve(-1, 3), std::domain_error);
  CHECK_THROWS_AS(allocation_curve(0, 0), std::domain_error);
}

TEST_CASE("accuracy_reward and the single-step penalty") {
  ReferenceAnswer one = ReferenceAnswer::from({"goto sink"});

  std::vector<std::string> exact = {"goto sink"};
  AccuracyReward a = accuracy_reward(exact, one);
  CHECK(a.curve == 1.0);
  CHECK(a.penalty == 0.0);
  CHECK(a.n == 1);

  std::vector<std::string> redundant = {"goto sink", "goto garbagecan"};
  a = accuracy_reward(redundant, one);
  CHECK(a.curve == 1.0);
  CHECK(a.penalty == -0.25);
  CHECK(a.n == 1);

  // k=5, n=3 → 12/30.
  ReferenceAnswer five =
      ReferenceAnswer::from({"goto sink", "pickup handtowel", "goto garbagecan", "put handtowel",
                             "goto handtowelholder"});
  std::vector<std::string> three = {"goto sink", "pickup handtowel", "goto garbagecan",
                                    "goto sink"};
  a = accuracy_reward(three, five);
  CHECK(a.curve == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(a.penalty == 0.0);
  CHECK(a.n == 3);

  // No penalty for redundant steps when k > 1.
  std::vector<std::string> long_match = five.actions;
  long_match.push_back("goto sink");
  a = accuracy_reward(long_match, five);
  CHECK(a.curve == 1.0);
  CHECK(a.penalty == 0.0);
}

TEST_CASE("reference answers validate their invariants") {
  CHECK_THROWS_AS(ReferenceAnswer::from({}), std::invalid_argument);
  CHECK_THROWS_AS(ReferenceAnswer::from({"goto sink", "  "}), std::invalid_argument);
  ReferenceAnswer r = ReferenceAnswer::from({"Goto Sink"});
  CHECK(r.k() == 1);
  CHECK(r.actions[0] == "goto sink");
}

TEST_CASE("total_reward composition") {
  ActionCatalog cat = toy_catalog();
  ReferenceAnswer ref = ReferenceAnswer::from(
      {"goto handtowelholder", "pickup handtowel", "goto garbagecan", "put handtowel"});

  SUBCASE("perfect response, k > 1 → 1.5") {
    RewardBreakdown rb = total_reward(render_plan({{0, "goto handtowelholder"},
                                                   {1, "pickup handtowel"},
                                                   {2, "goto garbagecan"},
                                                   {3, "put handtowel"}}),
                                      ref, cat);
    CHECK(rb.total == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(rb.matched_prefix_n == 4);
  }

  SUBCASE("garbage → 0") {
    RewardBreakdown rb = total_reward("not even json", ref, cat);
    CHECK(rb.total == 0.0);
  }

  SUBCASE("perfect format, zero matched prefix → 0.5") {
    RewardBreakdown rb = total_reward(
        render_plan({{4, "goto sink"}, {4, "goto sink"}, {4, "goto sink"}, {4, "goto sink"}}), ref,
        cat);
    CHECK(rb.total == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rb.matched_prefix_n == 0);
  }

  SUBCASE("an ill-formed step terminates the accuracy prefix") {
    std::string raw =
        R"({"reasoning_and_reflection": "r", "visual_state_description": "v", "language_plan": "l",
            "executable_plan": [
              {"action_id": 0, "action_name": "goto handtowelholder"},
              {"action_name": "pickup handtowel"},
              {"action_id": 2, "action_name": "goto garbagecan"}
            ]})";
    RewardBreakdown rb = total_reward(raw, ref, cat);
    CHECK(rb.matched_prefix_n == 1);  // the hole at step 2 ends the prefix
    CHECK(rb.r_valid == doctest::Approx(0.125 * 2.0 / 3.0).epsilon(1e-12));
  }

  SUBCASE("breakdown fields always sum to total and stay in bounds") {
    Rng rng(99, "reward-fuzz");
    const char* names[] = {"goto handtowelholder", "pickup handtowel", "goto garbagecan",
                           "put handtowel", "goto sink"};
    for (int trial = 0; trial < 300; ++trial) {
      int k = 1 + static_cast<int>(rng.next_below(4));
      std::vector<std::string> answer;
      for (int i = 0; i < k; ++i) answer.push_back(names[rng.next_below(5)]);
      int len = static_cast<int>(rng.next_below(6));
      std::vector<std::pair<int, std::string>> steps;
      for (int i = 0; i < len; ++i) {
        steps.push_back({static_cast<int>(rng.next_below(7)), names[rng.next_below(5)]});
      }
      RewardBreakdown rb = total_reward(render_plan(steps), ReferenceAnswer::from(answer), cat);
      CHECK(rb.total ==
            doctest::Approx(rb.r_structure + rb.r_valid + rb.r_match + rb.r_accuracy_curve +
                            rb.single_step_penalty)
                .epsilon(1e-12));
      CHECK(rb.total >= -0.25);
      CHECK(rb.total <= 1.5);
      CHECK(rb.r_accuracy_curve >= 0.0);
      CHECK(rb.r_accuracy_curve <= 1.0);
      CHECK(rb.matched_prefix_n <= k);
    }
  }

  SUBCASE("determinism: identical inputs give bit-identical breakdowns") {
    std::string raw = render_plan({{0, "goto handtowelholder"}, {4, "goto sink"}});
    RewardBreakdown a = total_reward(raw, ref, cat);
    RewardBreakdown b = total_reward(raw, ref, cat);
    CHECK(a.total == b.total);
    CHECK(a.r_match == b.r_match);
    CHECK(a.matched_prefix_n == b.matched_prefix_n);
  }
}

TEST_CASE("monotonicity: longer matched prefix never lowers the total") {
  ActionCatalog cat = toy_catalog();
  ReferenceAnswer ref = ReferenceAnswer::from(
      {"goto handtowelholder", "pickup handtowel", "goto garbagecan", "put handtowel"});
  double prev = -1.0;
  const std::vector<std::pair<int, std::string>> gold = {{0, "goto handtowelholder"},
                                                         {1, "pickup handtowel"},
                                                         {2, "goto garbagecan"},
                                                         {3, "put handtowel"}};
  for (int n = 0; n <= 4; ++n) {
    // n matching steps followed by padding mismatches, fixed length 4.
    std::vector<std::pair<int, std::string>> steps(gold.begin(), gold.begin() + n);
    while (steps.size() < 4) steps.push_back({4, "goto sink"});
    double total = total_reward(render_plan(steps), ref, cat).total;
    CHECK(total >= prev);
    prev = total;
  }
}
