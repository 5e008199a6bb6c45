#include <doctest.h>

#include "emosura/json_recovery.hpp"

using emosura::extract_json_array;
using emosura::first_balanced_array;

TEST_CASE("plain arrays parse directly") {
  const auto a = extract_json_array(R"([{"a":1},{"b":2}])");
  REQUIRE(a);
  CHECK(a->size() == 2);
  CHECK(extract_json_array("[]")->empty());
}

TEST_CASE("wrapped and fenced arrays are recovered") {
  const std::string body = R"([{"fact":"The speaker sounds calm.","attribute":"emotion","value":"calm"}])";
  const std::vector<std::string> wrappers = {
      "Sure! Here are the facts: " + body,
      "```json\n" + body + "\n```",
      "```\n" + body + "\n```",
      "Output:\n" + body + "\nLet me know if you need more.",
      "  \n" + body + "  ",
      "```json\n" + body + "\n```\nNote: [1] is a footnote",
  };
  for (const auto& w : wrappers) {
    CAPTURE(w);
    const auto a = extract_json_array(w);
    REQUIRE(a);
    CHECK(a->size() == 1);
    CHECK((*a)[0]["value"] == "calm");
  }
}

TEST_CASE("bracket scanning respects string literals") {
  CHECK(first_balanced_array(R"(x ["a]", "b\"]"] y)") == R"(["a]", "b\"]"])");
  CHECK(first_balanced_array("no array").empty());
  CHECK(first_balanced_array("[[1,2],[3]] tail") == "[[1,2],[3]]");
  CHECK(first_balanced_array("[unterminated").empty());
}

TEST_CASE("non-array input yields nothing") {
  CHECK_FALSE(extract_json_array("{\"a\":1}"));
  CHECK_FALSE(extract_json_array(""));
  CHECK_FALSE(extract_json_array("[not json"));
  CHECK_FALSE(extract_json_array("I cannot help with that."));
}
