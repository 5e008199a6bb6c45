#include "emosura/bench/sample_record.hpp"

#include <fstream>
#include <sstream>

namespace emosura::bench {

namespace {

json rating_to_json(const AffectRating& r) {
  json j{{"mean", r.mean}};
  if (r.std) j["std"] = *r.std;
  return j;
}

AffectRating rating_from_json(const json& j, const char* name) {
  if (!j.is_object() || !j.contains("mean") || !j["mean"].is_number()) {
    throw RecordError(std::string(name) + ".mean missing or not a number");
  }
  AffectRating r;
  r.mean = j["mean"].get<double>();
  if (r.mean < 1.0 || r.mean > 7.0) throw RecordError(std::string(name) + ".mean outside [1,7]");
  if (j.contains("std") && !j["std"].is_null()) {
    if (!j["std"].is_number()) throw RecordError(std::string(name) + ".std is not a number");
    r.std = j["std"].get<double>();
    if (*r.std < 0.0) throw RecordError(std::string(name) + ".std is negative");
  }
  return r;
}

std::vector<int> mos_list(const json& j) {
  if (!j.is_array()) throw RecordError("human_mos entries must be arrays");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw RecordError("human_mos ratings must be integers");
    const int rating = v.get<int>();
    if (rating < 1 || rating > 5) throw RecordError("human_mos rating outside 1..5");
    out.push_back(rating);
  }
  return out;
}

}  // namespace

std::string SampleRecord::audio_sample_id() const {
  if (perturbation && perturbation->is_object() && perturbation->contains("source_sample_id")) {
    return (*perturbation)["source_sample_id"].get<std::string>();
  }
  return sample_id;
}

const std::vector<int>* SampleRecord::mos_for(const std::string& system_id) const {
  if (const auto it = human_mos.find(system_id); it != human_mos.end()) return &it->second;
  if (const auto it = human_mos.find(""); it != human_mos.end()) return &it->second;
  return nullptr;
}

void to_json(json& j, const SampleRecord& r) {
  j = json{{"sample_id", r.sample_id},
           {"audio", r.audio},
           {"duration_s", r.duration_s},
           {"valence", rating_to_json(r.valence)},
           {"arousal", rating_to_json(r.arousal)},
           {"reference_caption", r.reference_caption},
           {"generated_captions", r.generated_captions}};
  if (r.dominance) j["dominance"] = *r.dominance;
  if (!r.human_mos.empty()) {
    if (r.human_mos.size() == 1 && r.human_mos.begin()->first.empty()) {
      j["human_mos"] = r.human_mos.begin()->second;
    } else {
      j["human_mos"] = r.human_mos;
    }
  }
  if (r.perturbation) j["perturbation"] = *r.perturbation;
}

void from_json(const json& j, SampleRecord& r) {
  if (!j.is_object()) throw RecordError("record is not a JSON object");
  if (!j.contains("sample_id") || !j["sample_id"].is_string() || j["sample_id"].get<std::string>().empty()) {
    throw RecordError("sample_id missing");
  }
  r.sample_id = j["sample_id"].get<std::string>();
  if (!j.contains("audio") || !j["audio"].is_string()) throw RecordError("audio path missing");
  r.audio = j["audio"].get<std::string>();
  if (!j.contains("duration_s") || !j["duration_s"].is_number()) throw RecordError("duration_s missing");
  r.duration_s = j["duration_s"].get<double>();
  if (!(r.duration_s > 0.0)) throw RecordError("duration_s must be positive");
  if (!j.contains("valence")) throw RecordError("valence missing");
  r.valence = rating_from_json(j["valence"], "valence");
  if (!j.contains("arousal")) throw RecordError("arousal missing");
  r.arousal = rating_from_json(j["arousal"], "arousal");
  r.dominance.reset();
  if (j.contains("dominance") && !j["dominance"].is_null()) {
    const auto& d = j["dominance"];
    const double mean = d.is_object() ? d.value("mean", 0.0) : d.get<double>();
    if (mean < 1.0 || mean > 7.0) throw RecordError("dominance outside [1,7]");
    r.dominance = mean;
  }
  r.reference_caption = j.value("reference_caption", std::string{});
  r.generated_captions.clear();
  if (j.contains("generated_captions")) {
    if (!j["generated_captions"].is_object()) throw RecordError("generated_captions must be an object");
    for (auto it = j["generated_captions"].begin(); it != j["generated_captions"].end(); ++it) {
      if (!it->is_string()) throw RecordError("generated caption for " + it.key() + " is not text");
      r.generated_captions[it.key()] = it->get<std::string>();
    }
  }
  r.human_mos.clear();
  if (j.contains("human_mos") && !j["human_mos"].is_null()) {
    const auto& mos = j["human_mos"];
    if (mos.is_array()) {
      r.human_mos[""] = mos_list(mos);
    } else if (mos.is_object()) {
      for (auto it = mos.begin(); it != mos.end(); ++it) r.human_mos[it.key()] = mos_list(*it);
    } else {
      throw RecordError("human_mos must be a list or an object");
    }
  }
  r.perturbation.reset();
  if (j.contains("perturbation") && !j["perturbation"].is_null()) r.perturbation = j["perturbation"];
}

std::vector<ManifestLine> read_manifest_lines(std::istream& in) {
  std::vector<ManifestLine> lines;
  std::string text;
  std::size_t lineno = 0;
  while (std::getline(in, text)) {
    ++lineno;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    ManifestLine line;
    line.line = lineno;
    const auto parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) {
      line.error = "invalid JSON";
    } else {
      if (parsed.is_object() && parsed.contains("sample_id") && parsed["sample_id"].is_string()) {
        line.sample_id = parsed["sample_id"].get<std::string>();
      }
      try {
        line.record = parsed.get<SampleRecord>();
      } catch (const std::exception& e) {
        line.error = e.what();
      }
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<SampleRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::vector<SampleRecord> records;
  for (auto& line : read_manifest_lines(in)) {
    if (!line.record) {
      throw RecordError(path.string() + ":" + std::to_string(line.line) + ": " + line.error);
    }
    records.push_back(std::move(*line.record));
  }
  return records;
}

std::string to_jsonl_line(const SampleRecord& record) {
  return json(record).dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& records) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write manifest " + path.string());
  for (const auto& r : records) out << to_jsonl_line(r) << '\n';
}

}  // namespace emosura::bench
