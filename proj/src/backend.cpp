#include "emosura/backend.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "emosura/hashing.hpp"
#include "emosura/log.hpp"

namespace emosura {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Decompose:
      return "decompose";
    case Stage::Verify:
      return "verify";
    case Stage::Match:
      return "match";
  }
  return "decompose";
}

AudioAttachment AudioAttachment::from_bytes(std::vector<std::uint8_t> bytes, std::string media_type) {
  AudioAttachment a;
  a.content_digest = sha256_hex(std::span<const std::uint8_t>(bytes));
  a.bytes = std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes));
  a.media_type = std::move(media_type);
  return a;
}

bool ChatRequest::has_audio() const {
  for (const auto& m : messages) {
    if (m.audio) return true;
  }
  return false;
}

std::string request_digest(const ChatRequest& request) {
  json canonical;
  canonical["model_id"] = request.model_id;
  canonical["temperature"] = request.temperature;
  canonical["max_tokens"] = request.max_tokens;
  json messages = json::array();
  for (const auto& m : request.messages) {
    json entry{{"role", m.role}, {"text", m.text}};
    if (m.audio) {
      entry["audio"] = json{{"digest", m.audio->content_digest}, {"media_type", m.audio->media_type}};
    }
    messages.push_back(std::move(entry));
  }
  canonical["messages"] = std::move(messages);
  return sha256_hex(canonical.dump());
}

std::string prompt_digest(const ChatRequest& request) {
  std::string all;
  for (const auto& m : request.messages) {
    all += m.text;
    all += '\n';
  }
  return sha256_hex(all);
}

HttpStatusError::HttpStatusError(int status, const std::string& body)
    : BackendError("HTTP status " + std::to_string(status) + ": " + body.substr(0, 200)),
      status_(status) {}

// --- ResponseCache ---------------------------------------------------------

namespace {

constexpr Stage kStages[] = {Stage::Decompose, Stage::Verify, Stage::Match};

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  for (const Stage stage : kStages) {
    auto& index = index_[stage];
    std::ifstream in(file_for(stage));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.is_object() || !record.contains("request_digest") ||
          !record["request_digest"].is_string()) {
        // A torn final line from a crash is skipped, not fatal.
        log::warn("skipping unreadable cache line",
                  {{"file", file_for(stage).string()}, {"line", lineno}});
        continue;
      }
      index.try_emplace(record["request_digest"].get<std::string>(), std::move(record));
    }
  }
}

std::filesystem::path ResponseCache::file_for(Stage stage) const {
  return dir_ / (std::string(to_string(stage)) + ".jsonl");
}

std::optional<std::string> ResponseCache::lookup(Stage stage, const std::string& digest) const {
  const std::lock_guard lock(mutex_);
  const auto& index = index_.at(stage);
  const auto it = index.find(digest);
  if (it == index.end()) return std::nullopt;
  return it->second.value("raw_response", std::string{});
}

std::optional<json> ResponseCache::record(Stage stage, const std::string& digest) const {
  const std::lock_guard lock(mutex_);
  const auto& index = index_.at(stage);
  const auto it = index.find(digest);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(Stage stage, const json& record) {
  const auto digest = record.at("request_digest").get<std::string>();
  const std::lock_guard lock(mutex_);
  auto& index = index_[stage];
  if (index.contains(digest)) return;
  std::ofstream out(file_for(stage), std::ios::app);
  out << record.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  out.flush();
  if (!out) throw Error("failed to append to cache file " + file_for(stage).string());
  index.emplace(digest, record);
}

void ResponseCache::compact() {
  const std::lock_guard lock(mutex_);
  for (const Stage stage : kStages) {
    const auto path = file_for(stage);
    if (index_[stage].empty() && !std::filesystem::exists(path)) continue;
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      for (const auto& [digest, record] : index_[stage]) {
        out << record.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
      }
    }
    std::filesystem::rename(tmp, path);
  }
}

std::size_t ResponseCache::size(Stage stage) const {
  const std::lock_guard lock(mutex_);
  return index_.at(stage).size();
}

std::map<std::string, std::string> ResponseCache::file_digests() const {
  const std::lock_guard lock(mutex_);
  std::map<std::string, std::string> digests;
  for (const Stage stage : kStages) {
    std::ifstream in(file_for(stage), std::ios::binary);
    if (!in) {
      digests[std::string(to_string(stage))] = "";
      continue;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    digests[std::string(to_string(stage))] = sha256_hex(buffer.str());
  }
  return digests;
}

// --- ModelClient -------------------------------------------------------------

ModelClient::ModelClient(std::shared_ptr<ChatBackend> backend, std::shared_ptr<ResponseCache> cache,
                         RetryPolicy retry, std::size_t max_inflight,
                         std::size_t max_attachment_bytes)
    : backend_(std::move(backend)),
      cache_(std::move(cache)),
      retry_(std::move(retry)),
      max_attachment_bytes_(max_attachment_bytes),
      inflight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_inflight, 1, 4096))) {
  if (!backend_) throw Error("ModelClient requires a backend");
}

ModelClient::Reply ModelClient::complete(const ChatRequest& request, const RequestTag& tag,
                                         const Annotator& annotate) {
  for (const auto& m : request.messages) {
    if (m.audio && m.audio->size() > max_attachment_bytes_) {
      throw AttachmentTooLarge("audio attachment of " + std::to_string(m.audio->size()) +
                               " bytes exceeds cap of " + std::to_string(max_attachment_bytes_));
    }
  }

  Reply reply;
  reply.request_digest = request_digest(request);
  if (cache_) {
    if (auto cached = cache_->lookup(tag.stage, reply.request_digest)) {
      reply.text = std::move(*cached);
      reply.from_cache = true;
      return reply;
    }
  }

  const int attempts = std::max(1, retry_.attempts);
  for (int attempt = 0;; ++attempt) {
    try {
      inflight_.acquire();
      struct Release {
        std::counting_semaphore<4096>& s;
        ~Release() { s.release(); }
      } release{inflight_};
      ++backend_calls_;
      reply.text = backend_->complete(request, tag);
      break;
    } catch (const AttachmentTooLarge&) {
      throw;
    } catch (const BackendError& e) {
      if (attempt + 1 >= attempts) throw;
      double wait = 0.0;
      if (!retry_.backoff_s.empty()) {
        wait = retry_.backoff_s[std::min<std::size_t>(attempt, retry_.backoff_s.size() - 1)];
      }
      log::info("retrying backend call", {{"stage", to_string(tag.stage)},
                                          {"key", tag.key},
                                          {"attempt", attempt + 1},
                                          {"error", e.what()}});
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
  }

  if (cache_) {
    json record{{"kind", to_string(tag.stage)},
                {"request_digest", reply.request_digest},
                {"model_id", request.model_id},
                {"prompt_sha256", prompt_digest(request)},
                {"raw_response", reply.text}};
    if (annotate) {
      const json extra = annotate(reply.text);
      for (auto it = extra.begin(); it != extra.end(); ++it) record[it.key()] = it.value();
    }
    cache_->store(tag.stage, record);
  }
  return reply;
}

std::string chat_complete(ModelClient& client, const ChatRequest& request, const RequestTag& tag) {
  return client.complete(request, tag).text;
}

std::string audio_chat_complete(ModelClient& client, const ChatRequest& request,
                                const RequestTag& tag) {
  bool has_bytes = false;
  for (const auto& m : request.messages) {
    if (m.audio && m.audio->size() > 0) has_bytes = true;
  }
  if (!has_bytes) throw Error("audio_chat_complete requires a non-empty audio attachment");
  return client.complete(request, tag).text;
}

// --- wire format -------------------------------------------------------------

json build_wire_request(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    if (!m.audio) {
      messages.push_back(json{{"role", m.role}, {"content", m.text}});
      continue;
    }
    std::string format = "wav";
    if (const auto slash = m.audio->media_type.find('/'); slash != std::string::npos) {
      format = m.audio->media_type.substr(slash + 1);
    }
    json content = json::array();
    content.push_back(json{{"type", "input_audio"},
                           {"input_audio",
                            {{"data", base64_encode(std::span<const std::uint8_t>(*m.audio->bytes))},
                             {"format", format}}}});
    content.push_back(json{{"type", "text"}, {"text", m.text}});
    messages.push_back(json{{"role", m.role}, {"content", std::move(content)}});
  }
  return json{{"model", request.model_id},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
}

std::string parse_wire_response(std::string_view body) {
  const auto parsed = json::parse(body.begin(), body.end(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw MalformedResponseError("response body is not a JSON object");
  }
  const auto choices = parsed.find("choices");
  if (choices == parsed.end() || !choices->is_array() || choices->empty()) {
    throw MalformedResponseError("response has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) {
    throw MalformedResponseError("first choice has no message");
  }
  const auto& content = first["message"].value("content", json());
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text" && part.contains("text") &&
          part["text"].is_string()) {
        text += part["text"].get<std::string>();
      }
    }
    return text;
  }
  throw MalformedResponseError("message content is neither text nor parts");
}

}  // namespace emosura
