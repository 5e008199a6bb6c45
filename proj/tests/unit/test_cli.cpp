#include <doctest.h>

#include <cstdlib>
#include <random>

#include "emosura/csv.hpp"
#include "test_support.hpp"

namespace ts = testsupport;
using nlohmann::json;

namespace {

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::string toy_flags() {
  return "--mock " + q(ts::toy_dir() / "mock") + " --audio-root " + q(ts::toy_dir());
}

std::string manifest() { return q(ts::toy_dir() / "manifest.jsonl"); }

}  // namespace

TEST_CASE("score on the toy corpus writes the report set") {
  ts::TempDir dir("cli_score");
  const auto r = ts::run_cli("score -i " + manifest() + " -o " + q(dir / "run") + " " + toy_flags(), dir.path());
  REQUIRE(r.exit_code == 0);
  for (const char* f : {"run_manifest.json", "scores.csv", "summary.json", "scatter_final.svg"}) {
    CHECK(std::filesystem::exists(dir / "run" / f));
  }
  const auto rows = emosura::csv::parse(ts::slurp(dir / "run" / "scores.csv"));
  CHECK(rows.size() == 13);
  const auto summary = json::parse(ts::slurp(dir / "run" / "summary.json"));
  CHECK(summary["correlations"]["final"]["n"] == 12);
  const auto manifest_json = json::parse(ts::slurp(dir / "run" / "run_manifest.json"));
  CHECK(manifest_json["backends"]["text_endpoint"] == "mock");
  CHECK(json::parse(r.out)["samples"] == 6);
}

TEST_CASE("warm cache rerun gives identical scores and no new cache lines") {
  ts::TempDir dir("cli_cache");
  const auto args = [&](const char* out) {
    return "score -i " + manifest() + " -o " + q(dir / out) + " " + toy_flags() + " --cache-dir " + q(dir / "cache");
  };
  REQUIRE(ts::run_cli(args("a"), dir.path()).exit_code == 0);
  const auto cache_before = ts::slurp(dir / "cache" / "verify.jsonl");
  CHECK_FALSE(cache_before.empty());
  REQUIRE(ts::run_cli(args("b"), dir.path()).exit_code == 0);
  CHECK(ts::slurp(dir / "a" / "scores.csv") == ts::slurp(dir / "b" / "scores.csv"));
  CHECK(ts::slurp(dir / "cache" / "verify.jsonl") == cache_before);
}

TEST_CASE("the API key never reaches run artifacts") {
  ts::TempDir dir("cli_secret");
  const std::string secret = "sk-test-9f8e7d6c5b4a";
  ::setenv("EMOSURA_API_KEY", secret.c_str(), 1);
  const auto r = ts::run_cli("score -i " + manifest() + " -o " + q(dir / "run") + " " + toy_flags() +
                                 " --cache-dir " + q(dir / "cache") + " --log-level debug",
                             dir.path());
  ::unsetenv("EMOSURA_API_KEY");
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.find(secret) == std::string::npos);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
    if (!entry.is_regular_file()) continue;
    CAPTURE(entry.path().string());
    CHECK(ts::slurp(entry.path()).find(secret) == std::string::npos);
    ++files;
  }
  CHECK(files >= 5);
}

TEST_CASE("strict mock with an unknown sample exits 2 naming it") {
  ts::TempDir dir("cli_strict");
  auto line = json::parse(ts::slurp(ts::toy_dir() / "manifest.jsonl").substr(0, ts::slurp(ts::toy_dir() / "manifest.jsonl").find('\n')));
  line["sample_id"] = "zz_unknown";
  ts::spit(dir / "m.jsonl", line.dump() + "\n");
  const auto r = ts::run_cli("score -i " + q(dir / "m.jsonl") + " -o " + q(dir / "out") + " " + toy_flags(), dir.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("zz_unknown") != std::string::npos);
}

TEST_CASE("empty manifest is a successful no-op") {
  ts::TempDir dir("cli_empty");
  ts::spit(dir / "empty.jsonl", "");
  const auto r = ts::run_cli("score -i " + q(dir / "empty.jsonl") + " -o " + q(dir / "out") + " " + toy_flags(), dir.path());
  CHECK(r.exit_code == 0);
  CHECK(emosura::csv::parse(ts::slurp(dir / "out" / "scores.csv")).size() == 1);
}

TEST_CASE("missing backend configuration is a config error") {
  ts::TempDir dir("cli_nobackend");
  const auto r = ts::run_cli("score -i " + manifest() + " -o " + q(dir / "out"), dir.path());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("--mock") != std::string::npos);
}

TEST_CASE("curate writes selections, bins and rejects") {
  ts::TempDir dir("cli_curate");
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> mean(1.0, 7.0), sd(0.0, 2.0), dur(2.0, 9.0);
  std::string lines;
  for (int i = 0; i < 500; ++i) {
    json rec{{"sample_id", "x" + std::to_string(i)}, {"audio", "a.wav"}, {"duration_s", dur(rng)},
             {"valence", {{"mean", mean(rng)}, {"std", sd(rng)}}}, {"arousal", {{"mean", mean(rng)}, {"std", sd(rng)}}},
             {"reference_caption", "x"}};
    lines += rec.dump() + "\n";
  }
  lines += "{broken\n";
  ts::spit(dir / "m.jsonl", lines);
  const auto r = ts::run_cli("curate -i " + q(dir / "m.jsonl") + " -o " + q(dir / "out") + " --cap 3", dir.path());
  REQUIRE(r.exit_code == 0);
  const auto bins = emosura::csv::parse(ts::slurp(dir / "out" / "bins.csv"));
  std::size_t total = 0;
  for (std::size_t i = 1; i < bins.size(); ++i) {
    CHECK(std::stoul(bins[i][2]) <= 3);
    total += std::stoul(bins[i][2]);
  }
  const auto out = json::parse(r.out);
  CHECK(out["selected"] == total);
  CHECK(out["input"] == 501);
  const auto rejects = ts::slurp(dir / "out" / "rejects.jsonl");
  CHECK(rejects.find("line") != std::string::npos);
  CHECK(std::count(rejects.begin(), rejects.end(), '\n') == out["rejected"].get<long>());
}

TEST_CASE("perturb honours --types and --per-type") {
  ts::TempDir dir("cli_perturb");
  const auto r = ts::run_cli("perturb -i " + manifest() + " -o " + q(dir / "p.jsonl") + " --types B --per-type 5", dir.path());
  REQUIRE(r.exit_code == 0);
  const auto text = ts::slurp(dir / "p.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  const auto first = json::parse(text.substr(0, text.find('\n')));
  CHECK(first["sample_id"] == "s01__B");
  CHECK(first["perturbation"]["source_sample_id"] == "s01");
  CHECK(first["generated_captions"].contains("perturbed_B"));
}

TEST_CASE("correlate joins MOS and reports mismatches") {
  ts::TempDir dir("cli_corr");
  REQUIRE(ts::run_cli("score -i " + manifest() + " -o " + q(dir / "run") + " " + toy_flags(), dir.path()).exit_code == 0);
  const auto scores = q(dir / "run" / "scores.csv");
  const auto ok = ts::run_cli("correlate --scores " + scores + " --mos " + q(ts::toy_dir() / "mos.csv"), dir.path());
  REQUIRE(ok.exit_code == 0);
  CHECK(json::parse(ok.out)["correlations"]["final"]["n"] == 12);

  auto mos = ts::slurp(ts::toy_dir() / "mos.csv");
  ts::spit(dir / "extra.csv", mos + "s77,sys_concise,3.0\n");
  const auto bad = ts::run_cli("correlate --scores " + scores + " --mos " + q(dir / "extra.csv"), dir.path());
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("s77") != std::string::npos);

  std::string flat = "sample_id,system_id,mos\n";
  for (const char* s : {"s01", "s02", "s03", "s04", "s05", "s06"})
    for (const char* sys : {"sys_concise", "sys_verbose"}) flat += std::string(s) + "," + sys + ",3\n";
  ts::spit(dir / "flat.csv", flat);
  const auto constant = ts::run_cli("correlate --scores " + scores + " --mos " + q(dir / "flat.csv"), dir.path());
  CHECK(constant.exit_code == 0);
  CHECK(json::parse(constant.out)["correlations"]["final"]["pcc"] == "n/a");
}

TEST_CASE("report re-emits from a saved run") {
  ts::TempDir dir("cli_report");
  REQUIRE(ts::run_cli("score -i " + manifest() + " -o " + q(dir / "run") + " --no-svg " + toy_flags(), dir.path()).exit_code == 0);
  CHECK_FALSE(std::filesystem::exists(dir / "run" / "scatter_final.svg"));
  REQUIRE(ts::run_cli("report --run " + q(dir / "run" / "run_manifest.json") + " -o " + q(dir / "again"), dir.path()).exit_code == 0);
  CHECK(ts::slurp(dir / "again" / "scores.csv") == ts::slurp(dir / "run" / "scores.csv"));
  CHECK(ts::slurp(dir / "again" / "summary.json") == ts::slurp(dir / "run" / "summary.json"));
}

TEST_CASE("stage subcommands emit per-sample traces") {
  ts::TempDir dir("cli_stage");
  const auto r = ts::run_cli("match -i " + manifest() + " " + toy_flags(), dir.path());
  REQUIRE(r.exit_code == 0);
  const auto first = json::parse(r.out.substr(0, r.out.find('\n')));
  CHECK(first["sample_id"] == "s01");
  CHECK(first["systems"]["sys_concise"].contains("verdicts"));
  CHECK(first["systems"]["sys_concise"].contains("score"));
}

TEST_CASE("help lists every flag") {
  ts::TempDir dir("cli_help");
  const auto r = ts::run_cli("score --help", dir.path());
  CHECK(r.exit_code == 0);
  for (const char* flag : {"--manifest", "--out-dir", "--no-svg", "--config", "--mock", "--cache-dir", "--text-endpoint",
                           "--audio-endpoint", "--api-key-env", "--text-model", "--audio-model", "--timeout",
                           "--max-inflight", "--retries", "--max-attachment-bytes", "--audio-root",
                           "--descriptive-attrs", "--jobs", "--extended-attributes", "--no-gt-context", "--log-level"}) {
    CAPTURE(flag);
    CHECK(r.out.find(flag) != std::string::npos);
  }
  CHECK(ts::run_cli("frobnicate", dir.path()).exit_code == 2);
}
