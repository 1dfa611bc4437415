#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "augur/http.hpp"
#include "augur/llm.hpp"
#include "augur/rate_limiter.hpp"
#include "augur/retry.hpp"

namespace augur {

struct Endpoint {
  std::string base_url;
  std::string api_key;
};

/// Everything provider-specific about a chat-completions exchange lives
/// behind one of these.
class ProviderAdapter {
 public:
  virtual ~ProviderAdapter() = default;
  virtual std::string name() const = 0;
  virtual HttpRequest build(const ChatRequest& request, const Endpoint& endpoint) const = 0;
  /// Called with 2xx responses only. Throws BackendError on payloads it
  /// cannot interpret.
  virtual ChatResponse parse(const HttpResponse& response) const = 0;
};

/// `POST {base}/chat/completions` with role/content message arrays.
class OpenAIChatAdapter final : public ProviderAdapter {
 public:
  std::string name() const override { return "openai"; }
  HttpRequest build(const ChatRequest& request, const Endpoint& endpoint) const override;
  ChatResponse parse(const HttpResponse& response) const override;
};

/// `POST {base}/v1/messages`; the system message moves to the top-level
/// `system` field.
class AnthropicMessagesAdapter final : public ProviderAdapter {
 public:
  explicit AnthropicMessagesAdapter(int default_max_tokens = 2048) : default_max_tokens_(default_max_tokens) {}
  std::string name() const override { return "anthropic"; }
  HttpRequest build(const ChatRequest& request, const Endpoint& endpoint) const override;
  ChatResponse parse(const HttpResponse& response) const override;

 private:
  int default_max_tokens_;
};

std::unique_ptr<ProviderAdapter> make_adapter(const std::string& provider);

struct LiveBackendOptions {
  std::string provider = "openai";
  Endpoint endpoint{"https://api.openai.com/v1", {}};
  RetryPolicy retry;
  double requests_per_minute = 60.0;
};

/// Reads LLM_API_KEY (required), LLM_PROVIDER ("openai" or "anthropic",
/// default openai) and LLM_BASE_URL (overrides the provider's default).
/// Throws ConfigError naming the missing variable or unknown provider.
LiveBackendOptions live_options_from_env();

class LiveBackend final : public Backend {
 public:
  LiveBackend(LiveBackendOptions options, std::shared_ptr<HttpTransport> transport,
              std::shared_ptr<RateLimiter> limiter, Sleeper sleep = thread_sleeper());

  ChatResponse complete(const ChatRequest& request) override;

  /// Attempts made by every call so far, in order.
  std::vector<AttemptRecord> attempt_log() const;

 private:
  LiveBackendOptions options_;
  std::unique_ptr<ProviderAdapter> adapter_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<RateLimiter> limiter_;
  Sleeper sleep_;
  mutable std::mutex log_mutex_;
  std::vector<AttemptRecord> log_;
};

}  // namespace augur
