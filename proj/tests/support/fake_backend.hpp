#pragma once

#include <functional>
#include <mutex>
#include <vector>

#include "emosura/backend.hpp"

namespace testsupport {

/// ChatBackend driven by a callback; records every request it sees.
class ScriptedBackend : public emosura::ChatBackend {
 public:
  using Script = std::function<std::string(const emosura::ChatRequest&, const emosura::RequestTag&)>;

  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

  std::string complete(const emosura::ChatRequest& request, const emosura::RequestTag& tag) override {
    {
      const std::lock_guard lock(mutex_);
      tags.push_back(tag);
      prompts.push_back(request.messages.empty() ? std::string{} : request.messages.front().text);
    }
    return script_(request, tag);
  }
  std::string identity() const override { return "scripted"; }

  std::size_t calls() const {
    const std::lock_guard lock(mutex_);
    return tags.size();
  }

  std::vector<emosura::RequestTag> tags;
  std::vector<std::string> prompts;

 private:
  Script script_;
  mutable std::mutex mutex_;
};

inline emosura::RetryPolicy fast_retry(int attempts = 3) {
  emosura::RetryPolicy p;
  p.attempts = attempts;
  p.backoff_s = {0.0, 0.0};
  return p;
}

}  // namespace testsupport
