#include "augur/chat_http.hpp"

#include <cstdlib>

#include "augur/errors.hpp"

namespace augur {

using nlohmann::json;

namespace {

std::string trim_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

json parse_body(const HttpResponse& response) {
  json body = json::parse(response.body, nullptr, false);
  if (body.is_discarded()) throw BackendError("provider returned a non-JSON body");
  return body;
}

}  // namespace

HttpRequest OpenAIChatAdapter::build(const ChatRequest& request, const Endpoint& endpoint) const {
  json body;
  body["model"] = request.model_id;
  body["temperature"] = request.temperature;
  body["messages"] = json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
  if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;

  HttpRequest http;
  http.method = "POST";
  http.url = trim_slash(endpoint.base_url) + "/chat/completions";
  http.headers = {{"Authorization", "Bearer " + endpoint.api_key}, {"Content-Type", "application/json"}};
  http.body = body.dump();
  return http;
}

ChatResponse OpenAIChatAdapter::parse(const HttpResponse& response) const {
  const json body = parse_body(response);
  try {
    const json& choice = body.at("choices").at(0);
    ChatResponse out;
    const json& content = choice.at("message").at("content");
    out.content = content.is_null() ? std::string() : content.get<std::string>();
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      out.finish_reason = finish_reason_from_string(choice["finish_reason"].get<std::string>());
    }
    if (auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
      out.usage.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
      out.usage.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
    }
    return out;
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected chat-completions payload: ") + e.what());
  }
}

HttpRequest AnthropicMessagesAdapter::build(const ChatRequest& request, const Endpoint& endpoint) const {
  json body;
  body["model"] = request.model_id;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens.value_or(default_max_tokens_);
  body["messages"] = json::array();
  std::string system;
  for (const auto& m : request.messages) {
    if (m.role == Role::system) {
      system += (system.empty() ? "" : "\n\n") + m.content;
    } else {
      body["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    }
  }
  if (!system.empty()) body["system"] = system;
  if (!request.stop_sequences.empty()) body["stop_sequences"] = request.stop_sequences;

  HttpRequest http;
  http.method = "POST";
  http.url = trim_slash(endpoint.base_url) + "/v1/messages";
  http.headers = {{"x-api-key", endpoint.api_key},
                  {"anthropic-version", "2023-06-01"},
                  {"Content-Type", "application/json"}};
  http.body = body.dump();
  return http;
}

ChatResponse AnthropicMessagesAdapter::parse(const HttpResponse& response) const {
  const json body = parse_body(response);
  try {
    ChatResponse out;
    for (const auto& block : body.at("content")) {
      if (block.value("type", std::string()) == "text") out.content += block.at("text").get<std::string>();
    }
    if (body.contains("stop_reason") && body["stop_reason"].is_string()) {
      out.finish_reason = finish_reason_from_string(body["stop_reason"].get<std::string>());
    }
    if (auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
      out.usage.prompt_tokens = usage->value("input_tokens", std::int64_t{0});
      out.usage.completion_tokens = usage->value("output_tokens", std::int64_t{0});
    }
    return out;
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected messages payload: ") + e.what());
  }
}

std::unique_ptr<ProviderAdapter> make_adapter(const std::string& provider) {
  if (provider == "openai") return std::make_unique<OpenAIChatAdapter>();
  if (provider == "anthropic") return std::make_unique<AnthropicMessagesAdapter>();
  throw ConfigError("unknown provider '" + provider + "' (expected openai or anthropic)");
}

LiveBackendOptions live_options_from_env() {
  LiveBackendOptions options;
  const char* key = std::getenv("LLM_API_KEY");
  if (key == nullptr || *key == '\0') throw ConfigError("environment variable LLM_API_KEY is not set");
  options.endpoint.api_key = key;
  if (const char* provider = std::getenv("LLM_PROVIDER"); provider != nullptr && *provider != '\0') {
    make_adapter(provider);  // rejects unknown names early
    options.provider = provider;
    if (options.provider == "anthropic") options.endpoint.base_url = "https://api.anthropic.com";
  }
  if (const char* base = std::getenv("LLM_BASE_URL"); base != nullptr && *base != '\0') {
    options.endpoint.base_url = base;
  }
  return options;
}

LiveBackend::LiveBackend(LiveBackendOptions options, std::shared_ptr<HttpTransport> transport,
                         std::shared_ptr<RateLimiter> limiter, Sleeper sleep)
    : options_(std::move(options)),
      adapter_(make_adapter(options_.provider)),
      transport_(std::move(transport)),
      limiter_(std::move(limiter)),
      sleep_(std::move(sleep)) {
  if (!transport_) throw ConfigError("live backend needs a transport");
}

ChatResponse LiveBackend::complete(const ChatRequest& request) {
  if (limiter_) limiter_->acquire();
  const HttpRequest http = adapter_->build(request, options_.endpoint);
  std::vector<AttemptRecord> attempts;
  HttpResponse response;
  try {
    response = send_with_retry(*transport_, http, options_.retry, sleep_, &attempts);
  } catch (...) {
    std::lock_guard lock(log_mutex_);
    log_.insert(log_.end(), attempts.begin(), attempts.end());
    throw;
  }
  {
    std::lock_guard lock(log_mutex_);
    log_.insert(log_.end(), attempts.begin(), attempts.end());
  }
  if (response.status < 200 || response.status >= 300) {
    throw BackendError(adapter_->name() + " returned HTTP " + std::to_string(response.status) + ": " +
                       response.body.substr(0, 300));
  }
  return adapter_->parse(response);
}

std::vector<AttemptRecord> LiveBackend::attempt_log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

}  // namespace augur
