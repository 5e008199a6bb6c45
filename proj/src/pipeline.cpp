#include "emosura/pipeline.hpp"

#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>

#include "emosura/hashing.hpp"
#include "emosura/log.hpp"
#include "emosura/metrics/baseline.hpp"
#include "emosura/parallel.hpp"

namespace emosura {

namespace {

std::size_t utf8_length(const std::string& s) {
  std::size_t n = 0;
  for (const char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_empty(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

json counts_json(const ScoreCounts& c) {
  return {{"generated", c.generated}, {"verified", c.verified}, {"reference", c.reference},
          {"matched", c.matched}, {"extra", c.extra}};
}

ScoreCounts counts_from(const json& j) {
  ScoreCounts c;
  c.generated = j.value("generated", std::size_t{0});
  c.verified = j.value("verified", std::size_t{0});
  c.reference = j.value("reference", std::size_t{0});
  c.matched = j.value("matched", std::size_t{0});
  c.extra = j.value("extra", std::size_t{0});
  return c;
}

json breakdown_json(const ScoreBreakdown& b) { return {{"s_p", b.s_p}, {"s_r", b.s_r}, {"s_f", b.s_f}}; }

ScoreBreakdown breakdown_from(const json& j, Scope scope) {
  return {j.at("s_p").get<double>(), j.at("s_r").get<double>(), j.at("s_f").get<double>(), scope};
}

SystemResult run_system(const bench::SampleRecord& record, const std::string& system_id,
                        const std::string& caption, const APUSet& reference, const AudioRef* audio,
                        const AudioAttachment* attachment, const PipelineClients& clients,
                        const PipelineOptions& options) {
  SystemResult out;
  out.system_id = system_id;
  out.caption_chars = utf8_length(caption);
  try {
    const CaptionRef ref{record.sample_id, record.sample_id + "/" + system_id, caption, Origin::Generated};
    out.trace.generated = decompose_caption(ref, *clients.text, options.decompose);
    out.decompose_format_failed = out.trace.generated.format_failed;
    if (options.stop_after == StopAfter::Decompose) return out;

    const std::string gt = options.gt_context ? record.reference_caption : std::string{};
    out.trace.verification = verify_apus(out.trace.generated, *audio, *attachment, gt, *clients.audio, options.verify);
    out.verdicts = out.trace.verification->verdicts.size();
    out.verify_format_failures = out.trace.verification->format_failures();
    if (options.stop_after == StopAfter::Verify) return out;

    out.trace.matches = match_units(out.trace.generated, reference, *clients.text, record.sample_id, options.match);
    const auto scored = score_matched(out.trace.generated, reference, *out.trace.verification, *out.trace.matches,
                                      options.match.descriptive_attributes);
    out.match_format_failed = out.trace.matches->match_format_failed;
    out.all_counts = scored.all_counts;
    out.descriptive_counts = scored.descriptive_counts;
    out.score = scored.score;
    if (out.decompose_format_failed || out.match_format_failed) out.status = SampleStatus::FormatFailed;
  } catch (const MissingFixture&) {
    throw;
  } catch (const std::exception& e) {
    out.status = SampleStatus::Errored;
    out.error = e.what();
    out.score.reset();
    log::warn("system failed", {{"sample_id", record.sample_id}, {"system_id", system_id}, {"error", e.what()}});
  }
  if (const auto* mos = record.mos_for(system_id); mos && !mos->empty()) {
    out.mos_mean = std::accumulate(mos->begin(), mos->end(), 0.0) / static_cast<double>(mos->size());
  }
  return out;
}

SampleResult run_sample(const bench::SampleRecord& record, const PipelineClients& clients,
                        const PipelineOptions& options) {
  SampleResult out;
  out.sample_id = record.sample_id;
  if (record.perturbation && record.perturbation->contains("type")) {
    out.perturbation_type = (*record.perturbation)["type"].get<std::string>();
  }
  try {
    const CaptionRef ref{record.sample_id, record.sample_id + "/ref", record.reference_caption, Origin::Reference};
    out.reference = decompose_caption(ref, *clients.text, options.decompose);
    out.reference_units = out.reference->units.size();
    out.reference_format_failed = out.reference->format_failed;

    std::optional<std::pair<AudioRef, AudioAttachment>> audio;
    if (options.stop_after != StopAfter::Decompose) {
      audio = load_audio(record.audio_sample_id(), options.audio_root / record.audio, record.duration_s);
    }
    for (const auto& [system_id, caption] : record.generated_captions) {
      out.systems.push_back(run_system(record, system_id, caption, *out.reference, audio ? &audio->first : nullptr,
                                       audio ? &audio->second : nullptr, clients, options));
    }
  } catch (const MissingFixture& e) {
    throw MissingFixture("sample " + record.sample_id + ": " + e.what());
  } catch (const std::exception& e) {
    out.status = SampleStatus::Errored;
    out.error = e.what();
    log::warn("sample failed", {{"sample_id", record.sample_id}, {"error", e.what()}});
    return out;
  }

  out.status = out.reference_format_failed ? SampleStatus::FormatFailed : SampleStatus::Scored;
  for (const auto& s : out.systems) {
    if (s.status == SampleStatus::Errored) {
      out.status = SampleStatus::Errored;
      if (out.error.empty()) out.error = s.system_id + ": " + s.error;
    } else if (s.status == SampleStatus::FormatFailed && out.status == SampleStatus::Scored) {
      out.status = SampleStatus::FormatFailed;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(SampleStatus status) {
  switch (status) {
    case SampleStatus::Scored: return "scored";
    case SampleStatus::FormatFailed: return "format_failed";
    case SampleStatus::Errored: return "errored";
  }
  return "errored";
}

SampleStatus parse_sample_status(std::string_view text) {
  if (text == "scored") return SampleStatus::Scored;
  if (text == "format_failed") return SampleStatus::FormatFailed;
  if (text == "errored") return SampleStatus::Errored;
  throw Error("unknown sample status: " + std::string(text));
}

bool RunManifest::any_errored() const {
  return std::any_of(samples.begin(), samples.end(),
                     [](const SampleResult& s) { return s.status == SampleStatus::Errored; });
}

json to_json(const RunManifest& run) {
  json samples = json::array();
  for (const auto& s : run.samples) {
    json systems = json::array();
    for (const auto& sys : s.systems) {
      json js{{"system_id", sys.system_id},
              {"status", to_string(sys.status)},
              {"caption_chars", sys.caption_chars},
              {"decompose_format_failed", sys.decompose_format_failed},
              {"match_format_failed", sys.match_format_failed},
              {"verdicts", sys.verdicts},
              {"verify_format_failures", sys.verify_format_failures},
              {"counts", {{"all", counts_json(sys.all_counts)}, {"descriptive", counts_json(sys.descriptive_counts)}}},
              {"baselines",
               {{"bleu4", optional_number(sys.baselines.bleu4)},
                {"rouge_l", optional_number(sys.baselines.rouge_l)},
                {"cider_d", optional_number(sys.baselines.cider_d)}}},
              {"mos_mean", optional_number(sys.mos_mean)}};
      if (sys.score) {
        js["score"] = {{"all", breakdown_json(sys.score->all)},
                       {"descriptive", breakdown_json(sys.score->descriptive)},
                       {"final", sys.score->final_score}};
      } else {
        js["score"] = nullptr;
      }
      if (!sys.error.empty()) js["error"] = sys.error;
      systems.push_back(std::move(js));
    }
    json js{{"sample_id", s.sample_id},
            {"status", to_string(s.status)},
            {"reference_units", s.reference_units},
            {"reference_format_failed", s.reference_format_failed},
            {"systems", systems}};
    if (s.perturbation_type) js["perturbation_type"] = *s.perturbation_type;
    if (!s.error.empty()) js["error"] = s.error;
    samples.push_back(std::move(js));
  }
  return {{"run_id", run.run_id},
          {"config_digest", run.config_digest},
          {"config", run.config},
          {"backends",
           {{"text_model", run.backends.text_model},
            {"audio_model", run.backends.audio_model},
            {"text_endpoint", run.backends.text_endpoint},
            {"audio_endpoint", run.backends.audio_endpoint}}},
          {"input_manifest_digest", run.input_manifest_digest},
          {"cache_digests", run.cache_digests},
          {"samples", samples},
          {"timestamps", {{"started_at", run.started_at}, {"finished_at", run.finished_at}}}};
}

RunManifest run_manifest_from_json(const json& j) {
  RunManifest run;
  run.run_id = j.at("run_id").get<std::string>();
  run.config_digest = j.value("config_digest", std::string{});
  run.config = j.value("config", json::object());
  if (j.contains("backends")) {
    const auto& b = j["backends"];
    run.backends = {b.value("text_model", ""), b.value("audio_model", ""), b.value("text_endpoint", ""),
                    b.value("audio_endpoint", "")};
  }
  run.input_manifest_digest = j.value("input_manifest_digest", std::string{});
  run.cache_digests = j.value("cache_digests", std::map<std::string, std::string>{});
  if (j.contains("timestamps")) {
    run.started_at = j["timestamps"].value("started_at", "");
    run.finished_at = j["timestamps"].value("finished_at", "");
  }
  for (const auto& js : j.at("samples")) {
    SampleResult s;
    s.sample_id = js.at("sample_id").get<std::string>();
    s.status = parse_sample_status(js.at("status").get<std::string>());
    s.reference_units = js.value("reference_units", std::size_t{0});
    s.reference_format_failed = js.value("reference_format_failed", false);
    if (js.contains("perturbation_type")) s.perturbation_type = js["perturbation_type"].get<std::string>();
    s.error = js.value("error", std::string{});
    for (const auto& jsys : js.at("systems")) {
      SystemResult sys;
      sys.system_id = jsys.at("system_id").get<std::string>();
      sys.status = parse_sample_status(jsys.at("status").get<std::string>());
      sys.caption_chars = jsys.value("caption_chars", std::size_t{0});
      sys.decompose_format_failed = jsys.value("decompose_format_failed", false);
      sys.match_format_failed = jsys.value("match_format_failed", false);
      sys.verdicts = jsys.value("verdicts", std::size_t{0});
      sys.verify_format_failures = jsys.value("verify_format_failures", std::size_t{0});
      if (jsys.contains("counts")) {
        sys.all_counts = counts_from(jsys["counts"].at("all"));
        sys.descriptive_counts = counts_from(jsys["counts"].at("descriptive"));
      }
      if (jsys.contains("baselines")) {
        const auto& b = jsys["baselines"];
        sys.baselines = {number_or_empty(b, "bleu4"), number_or_empty(b, "rouge_l"), number_or_empty(b, "cider_d")};
      }
      sys.mos_mean = number_or_empty(jsys, "mos_mean");
      if (jsys.contains("score") && !jsys["score"].is_null()) {
        const auto& sc = jsys["score"];
        EmoSuraScore score;
        score.caption_id = s.sample_id + "/" + sys.system_id;
        score.all = breakdown_from(sc.at("all"), Scope::All);
        score.descriptive = breakdown_from(sc.at("descriptive"), Scope::Descriptive);
        score.final_score = sc.at("final").get<double>();
        sys.score = score;
      }
      sys.error = jsys.value("error", std::string{});
      s.systems.push_back(std::move(sys));
    }
    run.samples.push_back(std::move(s));
  }
  return run;
}

std::vector<SampleResult> run_pipeline(const std::vector<bench::SampleRecord>& records,
                                       const PipelineClients& clients, const PipelineOptions& options) {
  if (!clients.text || !clients.audio) throw Error("pipeline needs text and audio clients");
  std::vector<SampleResult> results(records.size());
  parallel_for(records.size(), options.jobs, [&](std::size_t i) {
    results[i] = run_sample(records[i], clients, options);
    log::info("sample done", {{"sample_id", records[i].sample_id}, {"status", to_string(results[i].status)}});
  });
  if (options.baselines) add_baselines(records, results);
  return results;
}

void add_baselines(const std::vector<bench::SampleRecord>& records, std::vector<SampleResult>& results) {
  std::vector<metrics::CiderItem> corpus;
  std::vector<SystemResult*> owners;
  for (std::size_t i = 0; i < records.size() && i < results.size(); ++i) {
    const auto& record = records[i];
    const auto reference = metrics::tokenize(record.reference_caption);
    if (reference.tokens.empty()) continue;
    for (auto& sys : results[i].systems) {
      const auto it = record.generated_captions.find(sys.system_id);
      if (it == record.generated_captions.end()) continue;
      const auto candidate = metrics::tokenize(it->second);
      if (candidate.tokens.empty()) continue;
      sys.baselines.bleu4 = metrics::bleu4(candidate, {reference});
      sys.baselines.rouge_l = metrics::rouge_l(candidate, reference);
      corpus.push_back({candidate, {reference}});
      owners.push_back(&sys);
    }
  }
  if (corpus.size() < 2) return;
  const auto cider = metrics::cider_d(corpus);
  for (std::size_t k = 0; k < cider.size(); ++k) owners[k]->baselines.cider_d = cider[k];
}

std::string digest_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace emosura
