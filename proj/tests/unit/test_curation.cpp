#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "emosura/bench/curation.hpp"
#include "test_support.hpp"

using namespace emosura;
using namespace emosura::bench;

namespace {

SampleRecord record(std::string id, double dur, double v, double vs, double a, double as) {
  SampleRecord r;
  r.sample_id = std::move(id);
  r.audio = "audio/" + r.sample_id + ".wav";
  r.duration_s = dur;
  r.valence = {v, vs};
  r.arousal = {a, as};
  r.reference_caption = "A calm voice.";
  return r;
}

}  // namespace

TEST_CASE("duration window is inclusive") {
  CHECK_FALSE(filter_duration(record("a", 2.9, 4, 1, 4, 1)));
  CHECK(filter_duration(record("a", 3.0, 4, 1, 4, 1)));
  CHECK(filter_duration(record("a", 8.0, 4, 1, 4, 1)));
  CHECK_FALSE(filter_duration(record("a", 8.1, 4, 1, 4, 1)));
}

TEST_CASE("consensus filter") {
  CHECK(filter_consensus(record("a", 4, 4, 1.5, 4, 1.5)));
  CHECK_FALSE(filter_consensus(record("a", 4, 4, 1.6, 4, 0.4)));
  CHECK(filter_consensus(record("a", 4, 4, 0.0, 4, 0.0)));
  auto missing = record("a", 4, 4, 1, 4, 1);
  missing.arousal.std.reset();
  CHECK_THROWS_AS(filter_consensus(missing), MissingAnnotationStats);
}

TEST_CASE("grid bins") {
  CHECK(assign_bin(1.0, 1.0) == GridBin{0, 0});
  CHECK(assign_bin(7.0, 7.0) == GridBin{9, 9});
  CHECK(assign_bin(4.0, 2.5) == GridBin{5, 2});
  CHECK(assign_bin(1.6, 6.99) == GridBin{1, 9});
  CHECK_THROWS_AS(assign_bin(0.9, 4.0), OutOfRange);
  CHECK_THROWS_AS(assign_bin(4.0, 7.01), OutOfRange);
}

TEST_CASE("stratified sampling keeps the lowest combined stds per bin") {
  std::vector<SampleRecord> records;
  for (int i = 0; i < 20; ++i) records.push_back(record("b" + std::to_string(100 + i), 4, 4.1, 0.05 * i, 4.1, 0.05 * i));
  for (int i = 0; i < 3; ++i) records.push_back(record("c" + std::to_string(i), 4, 1.2, 0.3, 1.2, 0.3));
  const auto selected = stratified_sample(records, 15);
  CHECK(selected.size() == 18);
  const auto in_bin = std::count_if(selected.begin(), selected.end(), [](const auto& r) { return r.sample_id[0] == 'b'; });
  CHECK(in_bin == 15);
  for (const auto& r : selected) {
    if (r.sample_id[0] == 'b') CHECK(r.sample_id < "b115");
  }
}

TEST_CASE("equal stds tie-break on sample id") {
  const auto selected = stratified_sample({record("zeta", 4, 4, 0.5, 4, 0.5), record("alpha", 4, 4, 0.5, 4, 0.5)}, 1);
  REQUIRE(selected.size() == 1);
  CHECK(selected[0].sample_id == "alpha");
}

TEST_CASE("curate rejects with reasons and is order independent") {
  std::vector<SampleRecord> records = {
      record("short", 2.0, 4, 0.5, 4, 0.5), record("noisy", 4.0, 4, 2.0, 4, 0.5),
      record("ok1", 4.0, 4, 0.5, 4, 0.5), record("ok2", 5.0, 2, 0.2, 6, 0.2)};
  auto no_std = record("nostd", 4.0, 4, 0.5, 4, 0.5);
  no_std.valence.std.reset();
  records.push_back(no_std);
  const auto result = curate(records);
  CHECK(result.selected.size() == 2);
  CHECK(result.rejects.size() == 3);
  std::set<std::string> rejected;
  for (const auto& r : result.rejects) {
    rejected.insert(r.sample_id);
    CHECK_FALSE(r.reason.empty());
  }
  CHECK(rejected == std::set<std::string>{"short", "noisy", "nostd"});
  std::size_t total = 0;
  for (const auto& row : result.bin_counts)
    for (const auto c : row) total += c;
  CHECK(total == 2);

  std::mt19937 rng(3);
  std::shuffle(records.begin(), records.end(), rng);
  const auto again = curate(records);
  REQUIRE(again.selected.size() == result.selected.size());
  for (std::size_t i = 0; i < again.selected.size(); ++i) CHECK(again.selected[i].sample_id == result.selected[i].sample_id);
  CHECK(bins_csv(again) == bins_csv(result));
  CHECK(bins_csv(result).starts_with("row,col,count"));
}

TEST_CASE("manifest lines: bad lines become errors, good lines round trip") {
  const auto good = record("s1", 4.0, 4, 0.5, 4, 0.5);
  std::stringstream in;
  in << to_jsonl_line(good) << "\n"
     << "{not json}\n"
     << R"({"sample_id":"s2","audio":"a.wav","duration_s":4,"valence":{"mean":9},"arousal":{"mean":4}})" << "\n"
     << "\n";
  const auto lines = read_manifest_lines(in);
  REQUIRE(lines.size() == 3);
  REQUIRE(lines[0].record);
  CHECK(lines[0].record->sample_id == "s1");
  CHECK(lines[0].record->valence.std == 0.5);
  CHECK_FALSE(lines[1].record);
  CHECK_FALSE(lines[2].record);
  CHECK(lines[2].sample_id == "s2");
  CHECK(lines[2].error.find("valence") != std::string::npos);
}

TEST_CASE("MOS accepts a list or a per-system object") {
  const auto j = json::parse(R"({"sample_id":"s","audio":"a.wav","duration_s":4,"valence":{"mean":4,"std":1},
      "arousal":{"mean":4,"std":1},"reference_caption":"x","generated_captions":{"a":"x","b":"y"},
      "human_mos":[4,5]})");
  const auto r = j.get<SampleRecord>();
  REQUIRE(r.mos_for("a"));
  CHECK(r.mos_for("b")->size() == 2);
  auto bad = j;
  bad["human_mos"] = json::array({6});
  CHECK_THROWS_AS(bad.get<SampleRecord>(), RecordError);
}

TEST_CASE("bundled toy manifest reads cleanly") {
  const auto records = read_manifest(testsupport::toy_dir() / "manifest.jsonl");
  CHECK(records.size() == 6);
  for (const auto& r : records) {
    CHECK(r.generated_captions.size() == 2);
    CHECK(filter_duration(r));
  }
}
