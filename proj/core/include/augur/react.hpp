#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "augur/budget.hpp"
#include "augur/domain.hpp"
#include "augur/llm.hpp"
#include "augur/tools.hpp"

namespace augur {

struct ReactConfig {
  std::string agent_id = "agent";
  std::string model_id = "gpt-4o";
  double temperature = kDefaultTemperature;
  std::optional<int> max_tokens;
  int max_iterations = 10;
  std::string system_prompt;
  ToolRegistry tools;
  std::vector<std::string> stop_sequences{"Observation:"};
  std::optional<BudgetPolicy> budget;
  std::string session;

  /// Throws ConfigError when max_iterations < 1 or the registry is empty.
  void validate() const;
};

struct ActionEmission {
  std::string thought;
  std::string tool;
  std::string input;

  friend bool operator==(const ActionEmission&, const ActionEmission&) = default;
};

struct FinalEmission {
  std::string thought;
  std::string answer;

  friend bool operator==(const FinalEmission&, const FinalEmission&) = default;
};

enum class MalformedReason { no_keyword, unknown_tool, missing_input };

std::string_view to_string(MalformedReason r);

struct MalformedEmission {
  MalformedReason reason = MalformedReason::no_keyword;
  std::string detail;

  friend bool operator==(const MalformedEmission&, const MalformedEmission&) = default;
};

using ParsedEmission = std::variant<ActionEmission, FinalEmission, MalformedEmission>;

/// Parses one model emission. Keywords ("Thought:", "Action:",
/// "Action Input:", "Final Answer:") are case-sensitive and only count at
/// the start of a line; whichever of Action/Final Answer appears first
/// decides the variant. Never throws.
ParsedEmission parse_emission(std::string_view text, std::span<const std::string> tool_names);

/// Inverse of the Action branch of parse_emission.
std::string render_emission(const ActionEmission& action);

struct Extraction {
  MemberResult result = Declined{};
  std::optional<double> raw_value;  // after percent handling, before clamping
};

inline constexpr double kMinProbability = 0.01;
inline constexpr double kMaxProbability = 0.99;

/// First numeric token of `answer`: a trailing "%" divides by 100, bare
/// values in (1, 100] are read as percentages, and the result is clamped
/// to [0.01, 0.99]. No usable token yields Declined(no_number).
Extraction extract_probability(std::string_view answer);

/// Chat context for one turn: system prompt with the tool listing, the
/// task, then emission/observation pairs. The first `omitted_steps` steps
/// are replaced by "[earlier steps omitted]" appended to the task.
std::vector<Message> assemble_context(const ReactConfig& config, std::string_view task,
                                      std::span<const AgentStep> steps, std::size_t omitted_steps = 0);

/// Smallest number of leading steps to omit so the context fits the limit,
/// never touching the last kPreservedSteps steps.
std::size_t compaction_prefix(const ReactConfig& config, std::string_view task, std::span<const AgentStep> steps,
                              std::size_t limit_tokens);

inline constexpr std::string_view kFinalizePrompt = "Do not use a tool; give Final Answer:";

/// Result of the loop before any probability parsing.
struct ReactRun {
  Transcript transcript;
  std::optional<std::string> answer;
  TokenUsage usage;
};

/// The ReAct loop. Backend failures end the run as `aborted`, except
/// AuthError, which propagates.
ReactRun run_react_loop(const ReactConfig& config, Backend& backend, std::string_view task);

struct ReactResult {
  MemberResult forecast = Declined{};
  std::optional<double> raw_value;
  Transcript transcript;
  TokenUsage usage;
};

/// run_react_loop followed by extract_probability on the answer.
ReactResult run_react(const ReactConfig& config, Backend& backend, std::string_view task);

/// Maps a finished loop onto a forecast or a decline.
ReactResult to_forecast(ReactRun run);

}  // namespace augur
