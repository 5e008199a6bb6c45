#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <regex>

#include "emosura/backend.hpp"

namespace emosura {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string host;
  std::string path;    // full request path ending in /chat/completions
};

ParsedUrl parse_endpoint(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw Error("invalid endpoint URL: " + url);
  ParsedUrl parsed;
  parsed.origin = m[1].str() + "://" + m[2].str();
  parsed.host = m[2].str();
  std::string path = m[3].matched ? m[3].str() : std::string{};
  while (!path.empty() && path.back() == '/') path.pop_back();
  const std::string suffix = "/chat/completions";
  if (path.size() < suffix.size() || path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0) {
    path += suffix;
  }
  parsed.path = path;
  return parsed;
}

}  // namespace

struct HttpBackend::Impl {
  ParsedUrl url;
};

HttpBackend::HttpBackend(BackendConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  impl_->url = parse_endpoint(config_.endpoint_url);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::identity() const { return impl_->url.host; }

std::string HttpBackend::complete(const ChatRequest& request, const RequestTag& /*tag*/) {
  // One client per call keeps the backend shareable across threads.
  httplib::Client client(impl_->url.origin);
  const auto seconds = static_cast<time_t>(config_.timeout_s);
  const auto micros = static_cast<time_t>((config_.timeout_s - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const std::string body = build_wire_request(request).dump();
  auto result = client.Post(impl_->url.path, headers, body, "application/json");
  if (!result) {
    throw TimeoutError("request to " + impl_->url.host + " failed: " +
                       httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw HttpStatusError(result->status, result->body);
  }
  return parse_wire_response(result->body);
}

}  // namespace emosura
