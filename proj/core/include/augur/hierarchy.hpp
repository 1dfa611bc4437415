#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augur/budget.hpp"
#include "augur/domain.hpp"
#include "augur/llm.hpp"
#include "augur/react.hpp"
#include "augur/time.hpp"
#include "augur/tools.hpp"

namespace augur {

class SearchProvider;
class Sandbox;

/// A ReAct agent over raw tools, exposed to the planner as a single tool.
struct LowLevelAgent {
  std::string name;
  std::string description;
  ReactConfig inner;
  std::size_t observation_budget = kDefaultObservationBudget;

  /// Throws ConfigError when the inner registry holds an agent tool or is
  /// otherwise invalid.
  void validate() const;
};

inline constexpr std::string_view kNoFinalAnswer = "[subagent gave no final answer]";

/// Receives each finished inner transcript, in invocation order.
using TranscriptSink = std::function<void(const std::string& tool_name, Transcript transcript)>;

/// Invoking the tool runs the inner loop with the input as its task and
/// returns the final answer text. Inner failures become observations;
/// AuthError propagates. `session` tags every inner request.
ToolSpec as_tool(const LowLevelAgent& agent, Backend& backend, TranscriptSink sink = {}, std::string session = {});

struct ChildTranscript {
  std::size_t parent_step = 0;  // index into the planner's steps
  std::string tool;
  Transcript transcript;

  friend bool operator==(const ChildTranscript&, const ChildTranscript&) = default;
};

struct TranscriptTree {
  Transcript planner;
  std::vector<ChildTranscript> children;

  friend bool operator==(const TranscriptTree&, const TranscriptTree&) = default;
};

struct PlannerConfig {
  std::string system_prompt;
  std::vector<LowLevelAgent> subagents;
  int max_iterations = 10;
  std::string model_id = "gpt-4o";
  double temperature = kDefaultTemperature;
  std::optional<int> max_tokens;
  std::optional<BudgetPolicy> budget = BudgetPolicy{};

  /// Throws ConfigError on an empty or invalid subagent list.
  void validate() const;
};

struct ForecastOutcome {
  MemberResult result = Declined{};
  std::optional<double> raw_value;
  TranscriptTree tree;
  TokenUsage usage;
};

/// Question title, then "Background:", "Resolution criteria:" and
/// "Closure time:" lines. Missing fields render as "None".
std::string render_task(const Question& q);

/// Runs the planner on one question. Every date-restricted tool reachable
/// from the planner must carry `cutoff`, else ConfigError.
ForecastOutcome forecast_one(const PlannerConfig& planner, Backend& backend, const Question& q, Date cutoff,
                             const std::string& session = {});

/// Ablation mode: one agent holding raw tools directly.
ForecastOutcome forecast_single_agent(const ReactConfig& agent, Backend& backend, const Question& q, Date cutoff,
                                      const std::string& session = {});

/// Forecasting guidance placed ahead of the planner's format instructions.
std::string_view forecasting_system_prompt();

struct ForecasterSetup {
  SearchProvider* search = nullptr;
  const Sandbox* sandbox = nullptr;
  Date cutoff{};
  std::string model_id = "gpt-4o";
  double temperature = kDefaultTemperature;
  int planner_iterations = 10;
  int subagent_iterations = 5;
  std::size_t observation_budget = kDefaultObservationBudget;
  std::size_t context_limit_tokens = BudgetPolicy{}.limit_tokens;
};

/// "web_research" over a "web_search" tool restricted to `setup.cutoff`.
LowLevelAgent make_web_research_agent(const ForecasterSetup& setup);
/// "code_interpreter" over a "python" tool.
LowLevelAgent make_code_agent(const ForecasterSetup& setup);
/// Planner over the two default subagents. A null sandbox drops the code agent.
PlannerConfig make_default_planner(const ForecasterSetup& setup);
/// Single agent holding both raw tools with full API-style descriptions and
/// compaction disabled.
ReactConfig make_single_agent(const ForecasterSetup& setup);

}  // namespace augur
