#include <doctest.h>

#include <string>

#include "planrft/response.hpp"

using namespace planrft;

namespace {

// An 11-step structured response in the required schema, in the style of
// a distilled planning trace.
std::string eleven_step_response() {
  return R"({
    "reasoning_and_reflection": "The ladle is by the stove; it must be rinsed and placed on the table.",
    "visual_state_description": "A kitchen with a stove, a sink, and a dining table.",
    "language_plan": "Find the ladle, rinse it in the sink, then carry it to the table.",
    "executable_plan": [
      {"action_id": 64, "action_name": "find a Ladle"},
      {"action_id": 109, "action_name": "pick up the Ladle"},
      {"action_id": 30, "action_name": "find a Sink"},
      {"action_id": 150, "action_name": "rinse the Ladle"},
      {"action_id": 109, "action_name": "pick up the Ladle"},
      {"action_id": 31, "action_name": "find a DiningTable"},
      {"action_id": 170, "action_name": "put down the Ladle"},
      {"action_id": 64, "action_name": "find a Ladle"},
      {"action_id": 109, "action_name": "pick up the Ladle"},
      {"action_id": 31, "action_name": "find a DiningTable"},
      {"action_id": 170, "action_name": "put down the Ladle"}
    ]
  })";
}

}  // namespace

TEST_CASE("full schema parses with all steps well-formed") {
  PlanResponse r = parse_response(eleven_step_response());
  CHECK(r.parse_ok);
  CHECK(r.has_all_top_level_fields);
  REQUIRE(r.executable_plan.size() == 11);
  for (const PlanStep& s : r.executable_plan) CHECK(s.well_formed);
  CHECK(r.executable_plan[0].action_id == 64);
  CHECK(r.executable_plan[0].action_name == "find a Ladle");
}

TEST_CASE("plain prose yields parse_ok = false") {
  PlanResponse r = parse_response("hello world");
  CHECK_FALSE(r.parse_ok);
  CHECK_FALSE(r.has_all_top_level_fields);
  CHECK(r.executable_plan.empty());
}

TEST_CASE("fenced JSON with one ill-formed step") {
  std::string raw =
      "Here is my plan:\n```json\n"
      R"({"reasoning_and_reflection": "r", "visual_state_description": "v",
          "language_plan": "l",
          "executable_plan": [
            {"action_id": 1, "action_name": "goto sink"},
            {"action_name": "pickup mug"}
          ]})"
      "\n```\nDone.";
  PlanResponse r = parse_response(raw);
  CHECK(r.parse_ok);
  CHECK(r.has_all_top_level_fields);
  REQUIRE(r.executable_plan.size() == 2);
  CHECK(r.executable_plan[0].well_formed);
  CHECK_FALSE(r.executable_plan[1].well_formed);
}

TEST_CASE("fractional action_id makes a step ill-formed") {
  std::string raw =
      R"({"reasoning_and_reflection": "r", "visual_state_description": "v",
          "language_plan": "l",
          "executable_plan": [{"action_id": 1.5, "action_name": "goto sink"}]})";
  PlanResponse r = parse_response(raw);
  REQUIRE(r.executable_plan.size() == 1);
  CHECK_FALSE(r.executable_plan[0].well_formed);
}

TEST_CASE("missing top-level field is recorded but steps still parse") {
  std::string raw =
      R"({"reasoning_and_reflection": "r", "language_plan": "l",
          "executable_plan": [{"action_id": 2, "action_name": "goto sink"}]})";
  PlanResponse r = parse_response(raw);
  CHECK(r.parse_ok);
  CHECK_FALSE(r.has_all_top_level_fields);
  REQUIRE(r.executable_plan.size() == 1);
  CHECK(r.executable_plan[0].well_formed);
}

TEST_CASE("extract_action_sequence normalizes and skips ill-formed steps") {
  std::string raw =
      R"({"reasoning_and_reflection": "r", "visual_state_description": "v",
          "language_plan": "l",
          "executable_plan": [
            {"action_id": 64, "action_name": "find a Ladle"},
            {"action_name": "lost id"},
            {"action_id": 109, "action_name": "pick up the Ladle"}
          ]})";
  PlanResponse r = parse_response(raw);
  auto seq = extract_action_sequence(r);
  REQUIRE(seq.size() == 2);
  CHECK(seq[0] == std::pair<long long, std::string>{64, "find a ladle"});
  CHECK(seq[1] == std::pair<long long, std::string>{109, "pick up the ladle"});
  CHECK(seq.size() <= r.executable_plan.size());

  CHECK(extract_action_sequence(parse_response("{}")).empty());
}

TEST_CASE("round trip: render then re-parse is identity") {
  for (const std::string& raw :
       {eleven_step_response(),
        std::string(R"({"reasoning_and_reflection": "r", "language_plan": "l",
                        "executable_plan": [{"action_id": 3, "action_name": "goto sink"},
                                            {"action_name": "no id"}]})"),
        std::string("{}")}) {
    PlanResponse first = parse_response(raw);
    PlanResponse second = parse_response(render_response(first));
    CHECK(first == second);
  }
}

TEST_CASE("parse_response is total on adversarial strings") {
  for (const std::string& raw : {std::string("{"), std::string("}{"), std::string("{\"a\": "),
                                 std::string("```json\n{\n```"), std::string(1000, '{'),
                                 std::string("text { \"executable_plan\": \"not a list\" } text")}) {
    PlanResponse r = parse_response(raw);  // must not throw
    if (!r.parse_ok) CHECK(r.executable_plan.empty());
  }
}
