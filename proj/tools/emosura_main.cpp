#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "emosura/backend.hpp"
#include "emosura/bench/curation.hpp"
#include "emosura/bench/perturb.hpp"
#include "emosura/bench/sample_record.hpp"
#include "emosura/config.hpp"
#include "emosura/hashing.hpp"
#include "emosura/log.hpp"
#include "emosura/mock_backend.hpp"
#include "emosura/pipeline.hpp"
#include "emosura/stats/report.hpp"

namespace fs = std::filesystem;
using namespace emosura;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSampleErrors = 1;
constexpr int kExitConfig = 2;

/// Raw option values; only flags the user actually passed reach the CLI layer.
struct BackendFlags {
  std::string config_file;
  ConfigLayer cli;
  bool no_gt_context = false;
  bool extended_attributes = false;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& flags) {
  const auto opt = [&](const std::string& name, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags.cli[key] = v; }, help);
  };
  cmd->add_option("--config", flags.config_file, "key=value configuration file");
  opt("--mock", "mock", "Use the mock backend with fixtures from this directory");
  opt("--cache-dir", "cache_dir", "Response cache directory ({decompose,verify,match}.jsonl)");
  opt("--text-endpoint", "text_endpoint", "Chat-completion URL for decomposition and matching");
  opt("--audio-endpoint", "audio_endpoint", "Chat-completion URL for audio verification");
  opt("--api-key-env", "api_key_env", "Name of the environment variable holding the API key");
  opt("--text-model", "text_model", "Model id for decomposition and matching");
  opt("--audio-model", "audio_model", "Model id for verification");
  opt("--timeout", "timeout_s", "Request timeout in seconds");
  opt("--max-inflight", "max_inflight", "Concurrent backend requests");
  opt("--retries", "retry_attempts", "Attempts per request, including the first");
  opt("--max-attachment-bytes", "max_attachment_bytes", "Audio attachment size cap");
  opt("--audio-root", "audio_root", "Directory that manifest audio paths are relative to");
  opt("--descriptive-attrs", "descriptive_attrs", "Comma list of attributes scored in the descriptive F1");
  opt("--jobs", "jobs", "Samples processed in parallel (0 = logical cores)");
  cmd->add_flag("--extended-attributes", flags.extended_attributes,
                "Allow vocal_event, texture and tempo_dynamics units in decomposition");
  cmd->add_flag("--no-gt-context", flags.no_gt_context, "Leave the ground-truth slot of the verification prompt empty");
}

EffectiveConfig resolve_config(BackendFlags& flags) {
  if (flags.no_gt_context) flags.cli["gt_context"] = "false";
  if (flags.extended_attributes) flags.cli["extended_attributes"] = "true";
  const ConfigLayer file = flags.config_file.empty() ? ConfigLayer{} : load_config_file(flags.config_file);
  return EffectiveConfig::merge(file, config_from_env(), flags.cli);
}

struct Backends {
  std::shared_ptr<ResponseCache> cache;
  std::unique_ptr<ModelClient> text;
  std::unique_ptr<ModelClient> audio;
  BackendIdentity identity;
};

Backends make_backends(const EffectiveConfig& cfg) {
  Backends b;
  if (!cfg.get("cache_dir").empty()) b.cache = std::make_shared<ResponseCache>(cfg.get("cache_dir"));
  RetryPolicy retry;
  retry.attempts = static_cast<int>(std::max<std::size_t>(1, cfg.get_size("retry_attempts")));
  const auto inflight = std::max<std::size_t>(1, cfg.get_size("max_inflight"));
  const auto cap = cfg.get_size("max_attachment_bytes");
  b.identity.text_model = cfg.get("text_model");
  b.identity.audio_model = cfg.get("audio_model");

  if (!cfg.get("mock").empty()) {
    auto mock = std::make_shared<MockBackend>(load_mock_fixture(cfg.get("mock")));
    b.text = std::make_unique<ModelClient>(mock, b.cache, retry, inflight, cap);
    b.audio = std::make_unique<ModelClient>(mock, b.cache, retry, inflight, cap);
    b.identity.text_endpoint = b.identity.audio_endpoint = "mock";
    return b;
  }
  const auto& text_url = cfg.get("text_endpoint");
  const auto& audio_url = cfg.get("audio_endpoint").empty() ? text_url : cfg.get("audio_endpoint");
  if (text_url.empty()) throw ConfigError("no backend configured: pass --mock or --text-endpoint");
  const auto make_http = [&](const std::string& url) {
    BackendConfig bc;
    bc.endpoint_url = url;
    bc.api_key_env = cfg.get("api_key_env");
    bc.timeout_s = cfg.get_double("timeout_s");
    bc.max_inflight = inflight;
    bc.retry = retry;
    bc.max_attachment_bytes = cap;
    return std::make_shared<HttpBackend>(bc);
  };
  b.text = std::make_unique<ModelClient>(make_http(text_url), b.cache, retry, inflight, cap);
  b.audio = std::make_unique<ModelClient>(make_http(audio_url), b.cache, retry, inflight, cap);
  b.identity.text_endpoint = endpoint_host(text_url);
  b.identity.audio_endpoint = endpoint_host(audio_url);
  return b;
}

PipelineOptions pipeline_options(const EffectiveConfig& cfg) {
  PipelineOptions o;
  o.decompose.model_id = cfg.get("text_model");
  o.decompose.allowed_attributes = cfg.get_bool("extended_attributes") ? extended_attributes() : base_attributes();
  o.verify.model_id = cfg.get("audio_model");
  o.verify.max_inflight = std::max<std::size_t>(1, cfg.get_size("max_inflight"));
  o.match.model_id = cfg.get("text_model");
  o.match.descriptive_attributes = parse_attribute_list(cfg.get("descriptive_attrs"));
  o.gt_context = cfg.get_bool("gt_context");
  o.audio_root = cfg.get("audio_root");
  o.jobs = cfg.get_size("jobs");
  if (o.jobs == 0) o.jobs = std::max(1u, std::thread::hardware_concurrency());
  return o;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_jsonl(const fs::path& path, const std::vector<json>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.dump() + "\n";
  report::write_text(path, out);
}

std::vector<bench::SampleRecord> load_records(const std::string& path) { return bench::read_manifest(path); }

// ---------------------------------------------------------------- curate

struct CurateArgs {
  std::string manifest;
  std::string out_dir;
  std::size_t cap = bench::kDefaultBinCap;
  std::string audio_root;
};

int cmd_curate(const CurateArgs& a) {
  std::ifstream in(a.manifest);
  if (!in) throw ConfigError("cannot open manifest " + a.manifest);
  std::vector<bench::SampleRecord> records;
  std::vector<bench::Reject> rejects;
  for (auto& line : bench::read_manifest_lines(in)) {
    if (!line.record) {
      rejects.push_back({line.sample_id, line.error, line.line});
      continue;
    }
    if (!a.audio_root.empty() && !fs::exists(fs::path(a.audio_root) / line.record->audio)) {
      rejects.push_back({line.record->sample_id, "audio file not found: " + line.record->audio, line.line});
      continue;
    }
    records.push_back(std::move(*line.record));
  }
  auto result = bench::curate(records, a.cap);
  rejects.insert(rejects.end(), result.rejects.begin(), result.rejects.end());

  const fs::path out(a.out_dir);
  bench::write_manifest(out / "curated.jsonl", result.selected);
  report::write_text(out / "bins.csv", bench::bins_csv(result));
  std::vector<json> reject_lines;
  for (const auto& r : rejects) reject_lines.push_back({{"sample_id", r.sample_id}, {"reason", r.reason}, {"line", r.line}});
  write_jsonl(out / "rejects.jsonl", reject_lines);
  std::cout << json{{"input", records.size() + (rejects.size() - result.rejects.size())},
                    {"selected", result.selected.size()},
                    {"rejected", rejects.size()}}
                   .dump()
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- stages

struct StageArgs {
  std::string manifest;
  std::string out;
  BackendFlags backend;
};

int cmd_stage(StageArgs& a, StopAfter stop) {
  const auto cfg = resolve_config(a.backend);
  const auto records = load_records(a.manifest);
  auto backends = make_backends(cfg);
  auto options = pipeline_options(cfg);
  options.stop_after = stop;
  options.baselines = false;
  const auto results = run_pipeline(records, {backends.text.get(), backends.audio.get()}, options);

  std::vector<json> lines;
  bool errored = false;
  for (const auto& s : results) {
    json line{{"sample_id", s.sample_id}, {"status", to_string(s.status)}};
    if (s.status == SampleStatus::Errored) errored = true;
    if (!s.error.empty()) line["error"] = s.error;
    if (s.reference) line["reference"] = *s.reference;
    json systems = json::object();
    for (const auto& sys : s.systems) {
      json js{{"status", to_string(sys.status)}};
      if (!sys.error.empty()) js["error"] = sys.error;
      js["units"] = sys.trace.generated;
      if (sys.trace.verification) {
        json verdicts = json::array();
        for (const auto& v : sys.trace.verification->verdicts) {
          verdicts.push_back({{"apu_id", v.apu_id}, {"decision", to_string(v.decision)}, {"raw", v.raw_response}});
        }
        js["verdicts"] = verdicts;
      }
      if (sys.trace.matches) {
        json pairs = json::array();
        for (const auto& p : sys.trace.matches->pairs) {
          pairs.push_back({{"generated_id", p.generated_id}, {"oracle_id", p.oracle_id ? json(*p.oracle_id) : json(nullptr)}});
        }
        js["matches"] = pairs;
        js["match_format_failed"] = sys.trace.matches->match_format_failed;
      }
      if (sys.score) {
        js["score"] = {{"s_p", sys.score->all.s_p}, {"s_r", sys.score->all.s_r}, {"s_f", sys.score->all.s_f},
                       {"s_f_prime", sys.score->descriptive.s_f}, {"final", sys.score->final_score}};
      }
      systems[sys.system_id] = std::move(js);
    }
    line["systems"] = std::move(systems);
    lines.push_back(std::move(line));
  }
  if (a.out.empty()) {
    for (const auto& l : lines) std::cout << l.dump() << "\n";
  } else {
    write_jsonl(a.out, lines);
  }
  return errored ? kExitSampleErrors : kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string manifest;
  std::string out_dir;
  bool no_svg = false;
  BackendFlags backend;
};

int cmd_score(ScoreArgs& a) {
  const auto cfg = resolve_config(a.backend);
  const auto records = load_records(a.manifest);
  auto backends = make_backends(cfg);

  RunManifest run;
  run.started_at = utc_now();
  run.config = cfg.to_json();
  // Endpoints are persisted as hosts only.
  for (const char* key : {"text_endpoint", "audio_endpoint"}) run.config[key] = endpoint_host(cfg.get(key));
  run.config_digest = cfg.digest();
  run.input_manifest_digest = digest_manifest_file(a.manifest);
  run.run_id = sha256_hex(run.config_digest + ":" + run.input_manifest_digest).substr(0, 16);
  run.backends = backends.identity;
  run.samples = run_pipeline(records, {backends.text.get(), backends.audio.get()}, pipeline_options(cfg));
  if (backends.cache) run.cache_digests = backends.cache->file_digests();
  run.finished_at = utc_now();

  const fs::path out(a.out_dir);
  report::write_text(out / "run_manifest.json", to_json(run).dump(2) + "\n");
  report::emit_report(run, out, {.scatter = !a.no_svg});

  std::size_t errored = 0;
  for (const auto& s : run.samples) errored += s.status == SampleStatus::Errored;
  std::cout << json{{"run_id", run.run_id}, {"samples", run.samples.size()}, {"errored", errored}}.dump() << "\n";
  return run.any_errored() ? kExitSampleErrors : kExitOk;
}

// ---------------------------------------------------------------- perturb

struct PerturbArgs {
  std::string manifest;
  std::string out;
  std::string types = "A,B,C,D";
  std::size_t per_type = 0;
  std::string lexicon_dir;
  bool audit = false;
  BackendFlags backend;
};

int cmd_perturb(PerturbArgs& a) {
  if (!a.lexicon_dir.empty()) a.backend.cli["lexicon_dir"] = a.lexicon_dir;
  const auto cfg = resolve_config(a.backend);
  const auto lexicon = bench::PerturbLexicon::load(cfg.get("lexicon_dir"));
  const auto types = bench::parse_perturbation_types(a.types);
  if (types.empty()) throw ConfigError("--types selects no perturbation type");
  auto records = load_records(a.manifest);
  std::sort(records.begin(), records.end(),
            [](const auto& x, const auto& y) { return x.sample_id < y.sample_id; });

  std::optional<Backends> backends;
  std::map<std::string, APUSet> reference_units;
  if (a.audit) {
    backends = make_backends(cfg);
    const auto options = pipeline_options(cfg);
    for (const auto& r : records) {
      const CaptionRef ref{r.sample_id, r.sample_id + "/ref", r.reference_caption, Origin::Reference};
      reference_units[r.sample_id] = decompose_caption(ref, *backends->text, options.decompose);
    }
  }

  std::vector<bench::SampleRecord> out;
  std::size_t audit_issues = 0;
  json counts = json::object();
  for (const auto type : types) {
    std::size_t made = 0;
    for (const auto& r : records) {
      if (a.per_type > 0 && made >= a.per_type) break;
      if (r.reference_caption.empty()) continue;
      const APUSet* apus = a.audit ? &reference_units[r.sample_id] : nullptr;
      bench::PerturbationResult p;
      try {
        p = bench::perturb(r.reference_caption, lexicon, type, apus);
      } catch (const bench::NoSubstitutableSpan&) {
        continue;
      }
      bench::SampleRecord rec = r;
      rec.sample_id = r.sample_id + "__" + std::string(bench::to_string(type));
      rec.generated_captions = {{"gt", r.reference_caption},
                                {"perturbed_" + std::string(bench::to_string(type)), p.caption}};
      rec.human_mos.clear();
      json pj = bench::to_json(p.spec);
      pj["source_sample_id"] = r.audio_sample_id();
      if (a.audit) {
        json issues = json::array();
        for (const auto& issue : p.audit) issues.push_back({{"substitution", issue.substitution}, {"reason", issue.reason}});
        pj["audit"] = issues;
        audit_issues += p.audit.size();
      }
      rec.perturbation = pj;
      out.push_back(std::move(rec));
      ++made;
    }
    counts[std::string(bench::to_string(type))] = made;
    if (a.per_type > 0 && made < a.per_type) {
      log::warn("fewer eligible samples than requested",
                {{"type", bench::to_string(type)}, {"requested", a.per_type}, {"made", made}});
    }
  }
  bench::write_manifest(a.out, out);
  json summary{{"written", out.size()}, {"per_type", counts}};
  if (a.audit) summary["audit_issues"] = audit_issues;
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- correlate / report

struct CorrelateArgs {
  std::string scores;
  std::string mos;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_correlate(const CorrelateArgs& a) {
  auto rows = report::parse_scores_csv(slurp(a.scores));
  if (!a.mos.empty()) report::join_mos(rows, slurp(a.mos));
  const auto summary = report::summary_from_rows(rows).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << summary;
  } else {
    report::write_text(a.out, summary);
  }
  return kExitOk;
}

struct ReportArgs {
  std::string run;
  std::string out_dir;
  bool no_svg = false;
};

int cmd_report(const ReportArgs& a) {
  const auto parsed = json::parse(slurp(a.run), nullptr, false);
  if (parsed.is_discarded()) throw ConfigError("run manifest is not valid JSON: " + a.run);
  const auto run = run_manifest_from_json(parsed);
  report::emit_report(run, a.out_dir, {.scatter = !a.no_svg});
  return run.any_errored() ? kExitSampleErrors : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emosura: audio-grounded evaluation of emotional speech captions"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "error|warn|info|debug (structured JSONL on stderr)")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.fallthrough();

  CurateArgs curate;
  auto* c = app.add_subcommand("curate", "Duration and consensus filters, then stratified sampling on the V-A grid");
  c->add_option("-i,--manifest", curate.manifest, "Input JSONL manifest")->required();
  c->add_option("-o,--out-dir", curate.out_dir, "Writes curated.jsonl, bins.csv, rejects.jsonl")->required();
  c->add_option("--cap", curate.cap, "Maximum samples per valence-arousal bin")->capture_default_str();
  c->add_option("--audio-root", curate.audio_root, "Reject records whose audio file is missing under this root");

  StageArgs decompose, verify, match;
  const auto stage_cmd = [&](const char* name, const char* help, StageArgs& args) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("-i,--manifest", args.manifest, "Input JSONL manifest")->required();
    s->add_option("-o,--out", args.out, "Output JSONL (stdout when omitted)");
    add_backend_flags(s, args.backend);
    return s;
  };
  auto* d = stage_cmd("decompose", "Decompose reference and generated captions into atomic units", decompose);
  auto* v = stage_cmd("verify", "Decompose, then verify generated units against the audio", verify);
  auto* m = stage_cmd("match", "Decompose, verify, and match units; prints per-caption scores", match);

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Full scoring run with report emission");
  s->add_option("-i,--manifest", score.manifest, "Input JSONL manifest")->required();
  s->add_option("-o,--out-dir", score.out_dir, "Writes run_manifest.json, scores.csv, summary.json")->required();
  s->add_flag("--no-svg", score.no_svg, "Skip scatter plots");
  add_backend_flags(s, score.backend);

  PerturbArgs perturb;
  auto* p = app.add_subcommand("perturb", "Write a sabotaged manifest for detection tests");
  p->add_option("-i,--manifest", perturb.manifest, "Input JSONL manifest")->required();
  p->add_option("-o,--out", perturb.out, "Output JSONL manifest")->required();
  p->add_option("--types", perturb.types, "Comma list of perturbation types among A,B,C,D")->capture_default_str();
  p->add_option("--per-type", perturb.per_type, "Rows per type (0 = every eligible sample)")->capture_default_str();
  p->add_option("--lexicon-dir", perturb.lexicon_dir, "Directory with emotion/gender/event/acoustic.tsv");
  p->add_flag("--audit", perturb.audit, "Decompose references and audit spans against unit evidence");
  add_backend_flags(p, perturb.backend);

  CorrelateArgs correlate;
  auto* r = app.add_subcommand("correlate", "Join scores.csv with MOS ratings and emit summary.json");
  r->add_option("--scores", correlate.scores, "scores.csv from a scoring run")->required();
  r->add_option("--mos", correlate.mos, "CSV with sample_id[,system_id],mos");
  r->add_option("-o,--out", correlate.out, "summary.json path (stdout when omitted)");

  ReportArgs rep;
  auto* rp = app.add_subcommand("report", "Re-emit report files from a saved run manifest");
  rp->add_option("--run", rep.run, "run_manifest.json")->required();
  rp->add_option("-o,--out-dir", rep.out_dir, "Output directory")->required();
  rp->add_flag("--no-svg", rep.no_svg, "Skip scatter plots");

  for (auto* sub : app.get_subcommands({})) sub->footer("Global: --log-level error|warn|info|debug (JSONL on stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    log::set_level(log::parse_level(log_level));
    if (*c) return cmd_curate(curate);
    if (*d) return cmd_stage(decompose, StopAfter::Decompose);
    if (*v) return cmd_stage(verify, StopAfter::Verify);
    if (*m) return cmd_stage(match, StopAfter::Match);
    if (*s) return cmd_score(score);
    if (*p) return cmd_perturb(perturb);
    if (*r) return cmd_correlate(correlate);
    if (*rp) return cmd_report(rep);
  } catch (const MissingFixture& e) {
    log::error("missing mock fixture", {{"error", e.what()}});
    std::cerr << "error: missing fixture: " << e.what() << "\n";
    return kExitConfig;
  } catch (const report::JoinMismatch& e) {
    log::error("join mismatch", {{"unmatched", e.unmatched}});
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log::error("run failed", {{"error", e.what()}});
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
