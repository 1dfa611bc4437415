#include "augur/llm.hpp"

#include <array>
#include <cstdio>

#include <openssl/evp.h>

#include "augur/errors.hpp"

namespace augur {

using nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw ConfigError("unknown message role '" + std::string(s) + "'");
}

std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::other: return "other";
  }
  return "other";
}

FinishReason finish_reason_from_string(std::string_view s) {
  if (s == "stop" || s == "end_turn" || s == "stop_sequence") return FinishReason::stop;
  if (s == "length" || s == "max_tokens") return FinishReason::length;
  return FinishReason::other;
}

void ChatRequest::validate() const {
  if (messages.empty()) throw ConfigError("chat request has no messages");
  if (messages.front().role == Role::assistant) {
    throw ConfigError("first chat message must be system or user");
  }
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_tokens && *max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

ChatResponse complete(Backend& backend, const ChatRequest& request) {
  request.validate();
  return backend.complete(request);
}

std::string fingerprint(const ChatRequest& request) {
  json canonical;
  canonical["model_id"] = request.model_id;
  canonical["messages"] = json::array();
  for (const auto& m : request.messages) {
    canonical["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  canonical["temperature"] = request.temperature;
  canonical["stop_sequences"] = request.stop_sequences;
  if (!request.session.empty()) canonical["session"] = request.session;
  const std::string bytes = canonical.dump();

  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    std::array<char, 3> byte{};
    std::snprintf(byte.data(), byte.size(), "%02x", digest[i]);
    hex += byte.data();
  }
  return hex;
}

json encode_request(const ChatRequest& request) {
  json j;
  j["model_id"] = request.model_id;
  j["messages"] = json::array();
  for (const auto& m : request.messages) {
    j["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_tokens ? json(*request.max_tokens) : json(nullptr);
  j["stop_sequences"] = request.stop_sequences;
  if (!request.session.empty()) j["session"] = request.session;
  return j;
}

ChatRequest decode_request(const json& j) {
  ChatRequest r;
  r.model_id = j.at("model_id").get<std::string>();
  for (const auto& m : j.at("messages")) {
    r.messages.push_back({role_from_string(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  }
  r.temperature = j.value("temperature", kDefaultTemperature);
  if (auto it = j.find("max_tokens"); it != j.end() && !it->is_null()) r.max_tokens = it->get<int>();
  r.stop_sequences = j.value("stop_sequences", std::vector<std::string>{});
  r.session = j.value("session", std::string());
  return r;
}

json encode_response(const ChatResponse& response) {
  return {{"content", response.content},
          {"prompt_tokens", response.usage.prompt_tokens},
          {"completion_tokens", response.usage.completion_tokens},
          {"finish_reason", std::string(to_string(response.finish_reason))}};
}

ChatResponse decode_response(const json& j) {
  ChatResponse r;
  r.content = j.at("content").get<std::string>();
  r.usage.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  r.usage.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  if (r.usage.prompt_tokens < 0 || r.usage.completion_tokens < 0) {
    throw ConfigError("negative token usage in response");
  }
  r.finish_reason = finish_reason_from_string(j.value("finish_reason", std::string("stop")));
  return r;
}

}  // namespace augur
