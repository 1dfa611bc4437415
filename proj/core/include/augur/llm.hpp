#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace augur {

enum class Role { system, user, assistant };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

struct Message {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

inline constexpr double kDefaultTemperature = 0.5;

struct ChatRequest {
  std::string model_id;
  std::vector<Message> messages;
  double temperature = kDefaultTemperature;
  std::optional<int> max_tokens;
  std::vector<std::string> stop_sequences;
  /// Replay stream key (e.g. "q17#2"). Folded into the fingerprint when set
  /// so concurrent runs with identical prompts stay independent.
  std::string session;

  /// Throws ConfigError when messages are empty, the first role is
  /// assistant, temperature is negative or max_tokens is not positive.
  void validate() const;

  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

enum class FinishReason { stop, length, other };

std::string_view to_string(FinishReason r);
FinishReason finish_reason_from_string(std::string_view s);

struct ChatResponse {
  std::string content;
  TokenUsage usage;
  FinishReason finish_reason = FinishReason::stop;

  friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

/// Uniform chat-completion interface. Implementations must be safe for
/// concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Validates the request, then forwards to the backend.
ChatResponse complete(Backend& backend, const ChatRequest& request);

/// Hex SHA-256 over the canonical form of model_id, messages, temperature,
/// stop_sequences and (when non-empty) session. max_tokens is excluded.
std::string fingerprint(const ChatRequest& request);

nlohmann::json encode_request(const ChatRequest& request);
ChatRequest decode_request(const nlohmann::json& j);
nlohmann::json encode_response(const ChatResponse& response);
ChatResponse decode_response(const nlohmann::json& j);

}  // namespace augur
