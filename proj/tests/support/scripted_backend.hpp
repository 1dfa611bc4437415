#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "augur/llm.hpp"

namespace augur::testing {

/// One scripted conversation. A request matches when its system message
/// contains `system_contains`, its first user message contains every
/// `task_contains` entry and, if set, its session names ensemble member `member`.
/// The reply is chosen by the number of assistant turns already in the
/// request, so the backend keeps no state between calls.
///
/// Replies "!transport" and "!auth" raise TransportError and AuthError.
struct ScriptRule {
  std::string name;
  std::string system_contains;
  std::vector<std::string> task_contains;  // all must appear
  std::optional<int> member;
  std::vector<std::string> replies;
};

class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {}

  /// `{"rules": [{"name", "system", "task", "member", "replies": [...]}]}`.
  /// "task" is a string or an array of strings; a reply may be an array of
  /// lines joined with '\n'.
  static ScriptedBackend load(const std::filesystem::path& path);

  ChatResponse complete(const ChatRequest& request) override;

  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::vector<ScriptRule> rules_;
  std::atomic<std::size_t> calls_{0};
};

/// Member index encoded in a "question#member" session, if any.
std::optional<int> session_member(const std::string& session);

}  // namespace augur::testing
