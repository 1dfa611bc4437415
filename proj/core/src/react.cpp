#include "augur/react.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "augur/errors.hpp"

namespace augur {
namespace {

enum class Keyword { none, thought, action, action_input, final_answer, observation };

constexpr std::string_view kThought = "Thought:";
constexpr std::string_view kAction = "Action:";
constexpr std::string_view kActionInput = "Action Input:";
constexpr std::string_view kFinalAnswer = "Final Answer:";
constexpr std::string_view kObservation = "Observation:";

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Line {
  std::string_view text;
  Keyword keyword = Keyword::none;
  std::string_view rest;  // text after the keyword
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    Line l{line, Keyword::none, {}};
    // "Action Input:" must be tested before "Action:".
    if (starts_with(line, kActionInput)) {
      l = {line, Keyword::action_input, line.substr(kActionInput.size())};
    } else if (starts_with(line, kAction)) {
      l = {line, Keyword::action, line.substr(kAction.size())};
    } else if (starts_with(line, kFinalAnswer)) {
      l = {line, Keyword::final_answer, line.substr(kFinalAnswer.size())};
    } else if (starts_with(line, kThought)) {
      l = {line, Keyword::thought, line.substr(kThought.size())};
    } else if (starts_with(line, kObservation)) {
      l = {line, Keyword::observation, line.substr(kObservation.size())};
    }
    lines.push_back(l);
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return lines;
}

std::string collect_thought(const std::vector<Line>& lines, std::size_t end) {
  std::string out;
  for (std::size_t i = 0; i < end; ++i) {
    if (i > 0) out += '\n';
    if (lines[i].keyword == Keyword::thought) {
      out += trim(lines[i].rest);
    } else {
      out += lines[i].text;
    }
  }
  return std::string(trim(out));
}

std::string join_tools(std::span<const std::string> names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

std::string corrective_observation(const MalformedEmission& m, std::span<const std::string> names) {
  std::string text = "Invalid format: " + m.detail + "\nRespond with\nThought: <your reasoning>\nAction: <one of [" +
                     join_tools(names) + "]>\nAction Input: <the input>\nor\nThought: <your reasoning>\nFinal Answer: <your answer>";
  return text;
}

std::string cut_at_observation(std::string_view text) {
  if (starts_with(text, kObservation)) return {};
  const auto pos = text.find(std::string("\n") + std::string(kObservation));
  return std::string(pos == std::string_view::npos ? text : text.substr(0, pos));
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::string_view to_string(MalformedReason r) {
  switch (r) {
    case MalformedReason::no_keyword: return "NoKeyword";
    case MalformedReason::unknown_tool: return "UnknownTool";
    case MalformedReason::missing_input: return "MissingInput";
  }
  return "NoKeyword";
}

void ReactConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1 for agent " + agent_id);
  if (tools.empty()) throw ConfigError("agent " + agent_id + " has an empty tool registry");
  if (budget && budget->limit_tokens == 0) throw ConfigError("budget limit must be positive");
}

ParsedEmission parse_emission(std::string_view text, std::span<const std::string> tool_names) {
  const auto lines = split_lines(text);
  std::size_t decision = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].keyword == Keyword::action || lines[i].keyword == Keyword::final_answer) {
      decision = i;
      break;
    }
  }
  if (decision == lines.size()) {
    return MalformedEmission{MalformedReason::no_keyword, "no 'Action:' or 'Final Answer:' line found."};
  }

  std::string thought = collect_thought(lines, decision);

  if (lines[decision].keyword == Keyword::final_answer) {
    std::string answer(trim(lines[decision].rest));
    for (std::size_t i = decision + 1; i < lines.size(); ++i) {
      if (lines[i].keyword != Keyword::none || trim(lines[i].text).empty()) break;
      answer += '\n';
      answer += lines[i].text;
    }
    return FinalEmission{std::move(thought), std::string(trim(answer))};
  }

  const std::string tool(trim(lines[decision].rest));
  if (std::find(tool_names.begin(), tool_names.end(), tool) == tool_names.end()) {
    return MalformedEmission{MalformedReason::unknown_tool,
                             "'" + tool + "' is not a valid tool, try one of [" + join_tools(tool_names) + "]."};
  }

  std::size_t input_line = lines.size();
  for (std::size_t i = decision + 1; i < lines.size(); ++i) {
    if (lines[i].keyword == Keyword::action_input) {
      input_line = i;
      break;
    }
    if (lines[i].keyword != Keyword::none || !trim(lines[i].text).empty()) break;
  }
  if (input_line == lines.size()) {
    return MalformedEmission{MalformedReason::missing_input, "'Action:' must be followed by 'Action Input:'."};
  }
  std::string input(lines[input_line].rest);
  for (std::size_t i = input_line + 1; i < lines.size(); ++i) {
    if (lines[i].keyword != Keyword::none) break;
    input += '\n';
    input += lines[i].text;
  }
  std::string trimmed(trim(input));
  if (trimmed.empty()) {
    return MalformedEmission{MalformedReason::missing_input, "'Action Input:' is empty."};
  }
  return ActionEmission{std::move(thought), tool, std::move(trimmed)};
}

std::string render_emission(const ActionEmission& action) {
  std::string out;
  if (!action.thought.empty()) out += std::string(kThought) + " " + action.thought + "\n";
  out += std::string(kAction) + " " + action.tool + "\n";
  out += std::string(kActionInput) + " " + action.input;
  return out;
}

Extraction extract_probability(std::string_view answer) {
  std::size_t i = 0;
  for (; i < answer.size(); ++i) {
    const bool digit = std::isdigit(static_cast<unsigned char>(answer[i]));
    const bool dot_digit =
        answer[i] == '.' && i + 1 < answer.size() && std::isdigit(static_cast<unsigned char>(answer[i + 1]));
    if ((digit || dot_digit) && (i == 0 || !is_word_char(answer[i - 1]))) break;
    // Skip the remainder of a word so digits glued to letters are ignored.
    if (is_word_char(answer[i])) {
      while (i + 1 < answer.size() && is_word_char(answer[i + 1])) ++i;
    }
  }
  if (i >= answer.size()) return {Declined{DeclineReason::no_number, "no numeric token in answer"}, std::nullopt};

  std::size_t end = i;
  while (end < answer.size() && std::isdigit(static_cast<unsigned char>(answer[end]))) ++end;
  if (end < answer.size() && answer[end] == '.' && end + 1 < answer.size() &&
      std::isdigit(static_cast<unsigned char>(answer[end + 1]))) {
    ++end;
    while (end < answer.size() && std::isdigit(static_cast<unsigned char>(answer[end]))) ++end;
  }
  double value = 0.0;
  std::string token(answer.substr(i, end - i));
  if (token.front() == '.') token.insert(token.begin(), '0');
  std::from_chars(token.data(), token.data() + token.size(), value);

  std::size_t after = end;
  while (after < answer.size() && answer[after] == ' ') ++after;
  const bool percent = (after < answer.size() && answer[after] == '%') ||
                       answer.substr(after, 7) == "percent";

  if (percent) {
    value /= 100.0;
  } else if (value > 1.0 && value <= 100.0) {
    value /= 100.0;
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    return {Declined{DeclineReason::no_number, "numeric token " + token + " is not a probability"}, std::nullopt};
  }
  return {Forecast(std::clamp(value, kMinProbability, kMaxProbability)), value};
}

std::vector<Message> assemble_context(const ReactConfig& config, std::string_view task,
                                      std::span<const AgentStep> steps, std::size_t omitted_steps) {
  std::ostringstream system;
  system << config.system_prompt;
  if (!config.system_prompt.empty()) system << "\n\n";
  system << "You have access to the following tools:\n\n";
  for (const auto& tool : config.tools.tools()) system << tool.name << ": " << tool.description << "\n";
  const auto names = config.tools.names();
  system << "\nUse the following format:\n\n"
         << "Thought: Do I need to use a tool? Yes\n"
         << "Action: the action to take, one of [" << join_tools(names) << "]\n"
         << "Action Input: the input to the action\n"
         << "Observation: the result of the action\n\n"
         << "When you have a response, or do not need to use a tool, you MUST use the format:\n\n"
         << "Thought: Do I need to use a tool? No\n"
         << "Final Answer: your response";

  std::vector<Message> messages;
  messages.push_back({Role::system, system.str()});
  std::string first(task);
  omitted_steps = std::min(omitted_steps, steps.size());
  if (omitted_steps > 0) {
    first += "\n\n";
    first += kOmittedMarker;
  }
  messages.push_back({Role::user, std::move(first)});
  for (std::size_t i = omitted_steps; i < steps.size(); ++i) {
    messages.push_back({Role::assistant, steps[i].emission});
    messages.push_back({Role::user, std::string(kObservation) + " " + steps[i].observation});
  }
  return messages;
}

std::size_t compaction_prefix(const ReactConfig& config, std::string_view task, std::span<const AgentStep> steps,
                              std::size_t limit_tokens) {
  const std::size_t max_prefix = steps.size() > kPreservedSteps ? steps.size() - kPreservedSteps : 0;
  for (std::size_t prefix = 0; prefix <= max_prefix; ++prefix) {
    if (estimate_tokens(assemble_context(config, task, steps, prefix)) <= limit_tokens) return prefix;
  }
  return max_prefix;
}

namespace {

enum class Prepared { ok, over_budget };

Prepared prepare(const ReactConfig& config, std::string_view task, std::span<const AgentStep> steps,
                 std::vector<Message>& messages, std::string& detail) {
  messages = assemble_context(config, task, steps);
  if (!config.budget) return Prepared::ok;
  const BudgetCheck check = context_budget_guard(messages, config.budget->limit_tokens);
  if (check.status == BudgetStatus::ok) return Prepared::ok;
  if (!config.budget->compact) {
    detail = "context estimate " + std::to_string(check.estimated_tokens) + " tokens exceeds limit " +
             std::to_string(check.limit_tokens);
    return Prepared::over_budget;
  }
  const std::size_t prefix = compaction_prefix(config, task, steps, config.budget->limit_tokens);
  messages = assemble_context(config, task, steps, prefix);
  return Prepared::ok;
}

ChatRequest make_request(const ReactConfig& config, std::vector<Message> messages) {
  ChatRequest request;
  request.model_id = config.model_id;
  request.messages = std::move(messages);
  request.temperature = config.temperature;
  request.max_tokens = config.max_tokens;
  request.stop_sequences = config.stop_sequences;
  request.session = config.session;
  return request;
}

}  // namespace

ReactRun run_react_loop(const ReactConfig& config, Backend& backend, std::string_view task) {
  config.validate();
  const auto names = config.tools.names();

  ReactRun run;
  run.transcript.agent_id = config.agent_id;
  run.transcript.task = std::string(task);
  auto& steps = run.transcript.steps;

  auto ask = [&](std::vector<Message> messages) -> std::optional<std::string> {
    try {
      const ChatResponse response = complete(backend, make_request(config, std::move(messages)));
      run.usage += response.usage;
      return cut_at_observation(response.content);
    } catch (const AuthError&) {
      throw;
    } catch (const BackendError& e) {
      run.transcript.end = {EndKind::aborted, {}, {}, e.what()};
      return std::nullopt;
    }
  };

  for (int emitted = 0; emitted < config.max_iterations; ++emitted) {
    std::vector<Message> messages;
    std::string detail;
    if (prepare(config, task, steps, messages, detail) == Prepared::over_budget) {
      run.transcript.end = {EndKind::budget, {}, {}, detail};
      return run;
    }
    const auto emission = ask(std::move(messages));
    if (!emission) return run;

    const ParsedEmission parsed = parse_emission(*emission, names);
    if (const auto* action = std::get_if<ActionEmission>(&parsed)) {
      const ToolSpec* tool = config.tools.find(action->tool);
      std::string observation;
      try {
        observation = tool->invoke(action->input);
      } catch (const AuthError&) {
        throw;
      } catch (const std::exception& e) {
        observation = std::string("tool error: ") + e.what();
      }
      steps.push_back({*emission, action->thought, action->tool, action->input, std::move(observation)});
    } else if (const auto* final = std::get_if<FinalEmission>(&parsed)) {
      run.transcript.end = {EndKind::final, *emission, final->answer, {}};
      run.answer = final->answer;
      return run;
    } else {
      const auto& malformed = std::get<MalformedEmission>(parsed);
      steps.push_back({*emission, {}, {}, {}, corrective_observation(malformed, names)});
    }
  }

  // Iteration cap reached: one forced finalization request.
  std::vector<Message> messages;
  std::string detail;
  if (prepare(config, task, steps, messages, detail) == Prepared::over_budget) {
    run.transcript.end = {EndKind::budget, {}, {}, detail};
    return run;
  }
  messages.back().content += "\n\n";
  messages.back().content += kFinalizePrompt;
  const auto emission = ask(std::move(messages));
  if (!emission) return run;

  const ParsedEmission parsed = parse_emission(*emission, names);
  if (const auto* final = std::get_if<FinalEmission>(&parsed)) {
    run.transcript.end = {EndKind::finalized, *emission, final->answer, "iteration cap reached"};
    run.answer = final->answer;
  } else if (std::holds_alternative<MalformedEmission>(parsed) &&
             std::get<MalformedEmission>(parsed).reason == MalformedReason::no_keyword &&
             !trim(*emission).empty()) {
    run.transcript.end = {EndKind::finalized, *emission, std::string(trim(*emission)), "iteration cap reached"};
    run.answer = std::string(trim(*emission));
  } else {
    run.transcript.end = {EndKind::truncated, *emission, {}, "iteration cap reached without a final answer"};
  }
  return run;
}

ReactResult to_forecast(ReactRun run) {
  ReactResult result{Declined{}, std::nullopt, std::move(run.transcript), run.usage};
  if (run.answer) {
    Extraction extraction = extract_probability(*run.answer);
    result.forecast = std::move(extraction.result);
    result.raw_value = extraction.raw_value;
    if (extraction.raw_value) {
      std::ostringstream raw;
      raw.precision(17);
      raw << "raw value " << *extraction.raw_value;
      if (!result.transcript.end.detail.empty()) result.transcript.end.detail += "; ";
      result.transcript.end.detail += raw.str();
    }
    return result;
  }
  const TranscriptEnd& end = result.transcript.end;
  switch (end.kind) {
    case EndKind::aborted: result.forecast = Declined{DeclineReason::backend, end.detail}; break;
    case EndKind::budget: result.forecast = Declined{DeclineReason::budget, end.detail}; break;
    default: result.forecast = Declined{DeclineReason::truncated, end.detail}; break;
  }
  return result;
}

ReactResult run_react(const ReactConfig& config, Backend& backend, std::string_view task) {
  return to_forecast(run_react_loop(config, backend, task));
}

}  // namespace augur
