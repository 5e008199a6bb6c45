#pragma once

// Model endpoint abstraction: chat requests (optionally carrying audio),
// transport errors, the content-addressed response cache, and the client
// that layers caching, retries, and an in-flight bound over a backend.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "emosura/core.hpp"

namespace emosura {

inline constexpr std::string_view kDefaultTextModel = "Qwen2.5-7B-Instruct";
inline constexpr std::string_view kDefaultAudioModel = "Qwen2-Audio-7B-Instruct";
inline constexpr std::size_t kDefaultMaxAttachmentBytes = 25u * 1024u * 1024u;

enum class Stage { Decompose, Verify, Match };

std::string_view to_string(Stage stage);

struct AudioAttachment {
  std::shared_ptr<const std::vector<std::uint8_t>> bytes;
  std::string media_type = "audio/wav";
  std::string content_digest;  // sha256 of bytes

  static AudioAttachment from_bytes(std::vector<std::uint8_t> bytes, std::string media_type = "audio/wav");
  std::size_t size() const { return bytes ? bytes->size() : 0; }
};

struct ChatMessage {
  std::string role;
  std::string text;
  std::optional<AudioAttachment> audio;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;

  bool has_audio() const;
};

/// sha256 over (model_id, messages, temperature, max_tokens). Audio enters
/// through its content digest, so identical bytes from different paths share
/// a digest.
std::string request_digest(const ChatRequest& request);

/// sha256 of the concatenated message texts.
std::string prompt_digest(const ChatRequest& request);

/// Identifies the logical call for mocks and logs; never part of the digest.
struct RequestTag {
  Stage stage = Stage::Decompose;
  std::string sample_id;
  std::string key;  // caption_id for decompose/match, qualified apu id for verify
  std::string bare_id;  // unqualified apu id ("g1"), empty otherwise
};

// Errors. BackendError subclasses other than AttachmentTooLarge are retried.

class BackendError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

class HttpStatusError : public BackendError {
 public:
  HttpStatusError(int status, const std::string& body);
  int status() const { return status_; }

 private:
  int status_;
};

class MalformedResponseError : public BackendError {
 public:
  using BackendError::BackendError;
};

class AttachmentTooLarge : public BackendError {
 public:
  using BackendError::BackendError;
};

/// A mock had no response for a key in strict mode. Not a transport error:
/// it aborts the run as a configuration problem.
class MissingFixture : public Error {
 public:
  using Error::Error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Returns the assistant message text for one request. No caching, no retries.
  virtual std::string complete(const ChatRequest& request, const RequestTag& tag) = 0;
  /// Endpoint identity for manifests (host or "mock"); never contains secrets.
  virtual std::string identity() const = 0;
};

struct RetryPolicy {
  int attempts = 3;  // first try plus two retries
  std::vector<double> backoff_s{0.5, 2.0};
};

struct BackendConfig {
  std::string endpoint_url;
  std::string api_key_env = "EMOSURA_API_KEY";
  double timeout_s = 60.0;
  std::size_t max_inflight = 8;
  RetryPolicy retry;
  std::size_t max_attachment_bytes = kDefaultMaxAttachmentBytes;
};

/// Append-only JSONL cache, one file per stage under `dir`. Records are
/// indexed by their "request_digest" field. Reads see the state loaded at
/// open plus this process's own appends; writes are serialized.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> lookup(Stage stage, const std::string& digest) const;
  /// Full record for a digest, if cached.
  std::optional<json> record(Stage stage, const std::string& digest) const;
  /// Appends a record (must carry "request_digest" and "raw_response").
  /// A digest already present is not written twice.
  void store(Stage stage, const json& record);
  /// Rewrites each file keeping the first record per digest, in digest order.
  void compact();
  std::size_t size(Stage stage) const;
  /// sha256 of each stage file's current bytes ("" when absent).
  std::map<std::string, std::string> file_digests() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path file_for(Stage stage) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<Stage, std::map<std::string, json>> index_;
};

/// Caching, retrying, in-flight-bounded front end over a ChatBackend.
class ModelClient {
 public:
  using Annotator = std::function<json(const std::string& raw)>;

  struct Reply {
    std::string text;
    bool from_cache = false;
    std::string request_digest;
  };

  ModelClient(std::shared_ptr<ChatBackend> backend, std::shared_ptr<ResponseCache> cache,
              RetryPolicy retry = {}, std::size_t max_inflight = 8,
              std::size_t max_attachment_bytes = kDefaultMaxAttachmentBytes);

  /// Cache hit: returns the stored text without touching the backend.
  /// Miss: calls the backend with retries, then appends a cache record built
  /// from the request, the raw text, and `annotate(raw)` fields.
  Reply complete(const ChatRequest& request, const RequestTag& tag, const Annotator& annotate = {});

  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::string identity() const { return backend_->identity(); }
  const std::shared_ptr<ResponseCache>& cache() const { return cache_; }

 private:
  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  RetryPolicy retry_;
  std::size_t max_attachment_bytes_;
  std::counting_semaphore<4096> inflight_;
  std::atomic<std::size_t> backend_calls_{0};
};

/// Plain text chat call through a client.
std::string chat_complete(ModelClient& client, const ChatRequest& request, const RequestTag& tag);
/// As chat_complete; requires a non-empty audio attachment within the cap.
std::string audio_chat_complete(ModelClient& client, const ChatRequest& request, const RequestTag& tag);

/// Builds the OpenAI-style request body. Audio becomes an inline base64
/// `input_audio` content part.
json build_wire_request(const ChatRequest& request);
/// Extracts choices[0].message.content; throws MalformedResponseError.
std::string parse_wire_response(std::string_view body);

/// HTTP JSON chat-completion backend.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(BackendConfig config);
  ~HttpBackend() override;

  std::string complete(const ChatRequest& request, const RequestTag& tag) override;
  std::string identity() const override;

 private:
  struct Impl;
  BackendConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace emosura
