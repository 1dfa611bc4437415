#include "augur/hierarchy.hpp"

#include <utility>

#include "augur/errors.hpp"
#include "augur/observation.hpp"
#include "augur/sandbox.hpp"
#include "augur/search.hpp"

namespace augur {
namespace {

constexpr std::string_view kPrinciples = R"(You are an expert superforecaster. Your job is to give a probability that the question below resolves YES.

Work through the question in stages:
- Find reference classes and base rates before looking at the specifics.
- Look for recent news and what makes this case different from the reference class.
- Where numbers are available, build a simple quantitative model and state its assumptions.
- Estimate the same quantity more than one way, explain any large disagreement, then combine the estimates with a weighted mean or median.
- Avoid both overconfidence and hedging toward 50%. Extreme probabilities need extreme evidence.

You cannot browse directly. Delegate searches to web_research and calculations to code_interpreter, giving each a self-contained instruction.
Your Final Answer must be a single probability between 0 and 1, for example "Final Answer: 0.27".)";

constexpr std::string_view kWebResearchPrompt =
    "You research questions on the web. Search as needed, then give a short factual summary of what you found "
    "as your Final Answer. Quote figures and dates exactly. Do not guess at facts the results do not state.";

constexpr std::string_view kCodePrompt =
    "You write and run short Python 3 programs to answer quantitative questions. Print every result you need. "
    "Give the computed answer and a one-line explanation as your Final Answer.";

constexpr std::string_view kSingleAgentPrompt =
    "You are an expert superforecaster. Use the tools to gather evidence and compute estimates, then give a single "
    "probability between 0 and 1 as your Final Answer.";

constexpr std::string_view kSearchSchema = R"(Google Programmable Search JSON API. Input: the query string (q).
Request parameters: q (string, required) query text; num (integer 1-10) result count; start (integer) 1-based index of the first result; sort (string) e.g. "date:r:YYYYMMDD:YYYYMMDD" restricts to a publication range and is applied automatically; lr (string) language restrict such as "lang_en"; gl (string) two-letter country code boosting local results; safe ("active"|"off") SafeSearch level; siteSearch (string) site to include or exclude; siteSearchFilter ("e"|"i") exclude or include siteSearch; dateRestrict (string) d[N], w[N], m[N] or y[N]; exactTerms (string) phrase every result must contain; excludeTerms (string) word no result may contain; fileType (string) restrict to an extension; rights (string) licensing filter.
Response: items[] with title (string), link (string), snippet (string), displayLink (string), pagemap.metatags[] (object) carrying article:published_time where known; searchInformation.totalResults (string); queries.nextPage[].startIndex (integer).
Errors: 400 invalid argument; 403 daily limit exceeded or key not valid; 429 rate limit exceeded; 5xx backend error, retry with backoff.)";

constexpr std::string_view kPythonSchema = R"(Python 3 interpreter. Input: a complete program; wrap it in ``` fences if convenient.
Execution contract: the program runs as `python3 main.py` in an empty temporary working directory; only the standard library is guaranteed; stdin is closed; output is captured from stdout and stderr; the wall-clock limit is 10 seconds after which the process group is killed; output beyond 8000 bytes is discarded.
Result: stdout on exit status 0; otherwise "exit status N" followed by the tail of stderr; "execution timed out after 10s" when the limit is hit.
Use print() for every value you need; nothing is returned implicitly. Variables do not persist between calls.)";

bool holds_agent_tool(const ToolRegistry& registry) {
  for (const auto& tool : registry.tools()) {
    if (tool.kind == ToolKind::agent) return true;
  }
  return false;
}

void check_cutoff(const ToolRegistry& registry, Date cutoff, const std::string& owner) {
  for (const auto& tool : registry.tools()) {
    if (tool.date_restriction && *tool.date_restriction != cutoff) {
      throw ConfigError("tool " + tool.name + " in " + owner + " is restricted to " +
                        format_date(*tool.date_restriction) + " but the run cutoff is " + format_date(cutoff));
    }
  }
}

void check_question_date(Date cutoff) {
  if (cutoff > today_utc()) throw ConfigError("cutoff " + format_date(cutoff) + " is in the future");
}

}  // namespace

void LowLevelAgent::validate() const {
  if (name.empty()) throw ConfigError("low-level agent needs a name");
  if (holds_agent_tool(inner.tools)) {
    throw ConfigError("low-level agent " + name + " may not hold another agent as a tool");
  }
  inner.validate();
}

ToolSpec as_tool(const LowLevelAgent& agent, Backend& backend, TranscriptSink sink, std::string session) {
  agent.validate();
  ReactConfig config = agent.inner;
  config.agent_id = agent.name;
  config.session = std::move(session);
  const std::size_t budget = agent.observation_budget;
  const std::string name = agent.name;

  ToolSpec spec;
  spec.name = agent.name;
  spec.description = agent.description;
  spec.kind = ToolKind::agent;
  spec.invoke = [config = std::move(config), &backend, sink = std::move(sink), budget,
                 name](const std::string& input) -> std::string {
    ReactRun run;
    std::string observation;
    try {
      run = run_react_loop(config, backend, input);
      if (run.answer) {
        observation = truncate_observation(*run.answer, budget);
      } else if (run.transcript.end.kind == EndKind::aborted) {
        observation = "[subagent error: " + run.transcript.end.detail + "]";
      } else {
        observation = std::string(kNoFinalAnswer);
      }
    } catch (const AuthError&) {
      throw;
    } catch (const std::exception& e) {
      run.transcript.agent_id = name;
      run.transcript.task = input;
      run.transcript.end = {EndKind::aborted, {}, {}, e.what()};
      observation = "[subagent error: " + std::string(e.what()) + "]";
    }
    if (sink) sink(name, std::move(run.transcript));
    return observation;
  };
  return spec;
}

void PlannerConfig::validate() const {
  if (subagents.empty()) throw ConfigError("planner needs at least one subagent");
  if (max_iterations < 1) throw ConfigError("planner max_iterations must be >= 1");
  for (const auto& agent : subagents) agent.validate();
}

std::string render_task(const Question& q) {
  std::string task = q.title;
  task += "\nBackground: ";
  task += q.background.value_or("None");
  task += "\nResolution criteria: ";
  task += q.resolution_criteria.value_or("None");
  task += "\nClosure time: ";
  task += format_long_date(date_of(q.close_time));
  return task;
}

ForecastOutcome forecast_one(const PlannerConfig& planner, Backend& backend, const Question& q, Date cutoff,
                             const std::string& session) {
  planner.validate();
  check_question_date(cutoff);
  for (const auto& agent : planner.subagents) check_cutoff(agent.inner.tools, cutoff, agent.name);

  std::vector<std::pair<std::string, Transcript>> collected;
  auto sink = [&collected](const std::string& tool, Transcript t) { collected.emplace_back(tool, std::move(t)); };

  ReactConfig config;
  config.agent_id = "planner";
  config.model_id = planner.model_id;
  config.temperature = planner.temperature;
  config.max_tokens = planner.max_tokens;
  config.max_iterations = planner.max_iterations;
  config.system_prompt = planner.system_prompt;
  config.budget = planner.budget;
  config.session = session;
  for (const auto& agent : planner.subagents) config.tools.add(as_tool(agent, backend, sink, session));

  ReactResult result = run_react(config, backend, render_task(q));

  ForecastOutcome outcome{std::move(result.forecast), result.raw_value, {}, result.usage};
  outcome.tree.planner = std::move(result.transcript);
  // Each planner step naming a subagent produced exactly one child, in order.
  std::size_t next = 0;
  const auto& steps = outcome.tree.planner.steps;
  for (std::size_t i = 0; i < steps.size() && next < collected.size(); ++i) {
    if (steps[i].action == collected[next].first) {
      outcome.tree.children.push_back({i, collected[next].first, std::move(collected[next].second)});
      ++next;
    }
  }
  return outcome;
}

ForecastOutcome forecast_single_agent(const ReactConfig& agent, Backend& backend, const Question& q, Date cutoff,
                                      const std::string& session) {
  check_question_date(cutoff);
  if (holds_agent_tool(agent.tools)) throw ConfigError("single-agent mode takes raw tools only");
  check_cutoff(agent.tools, cutoff, agent.agent_id);
  ReactConfig config = agent;
  config.session = session;
  ReactResult result = run_react(config, backend, render_task(q));
  ForecastOutcome outcome{std::move(result.forecast), result.raw_value, {}, result.usage};
  outcome.tree.planner = std::move(result.transcript);
  return outcome;
}

std::string_view forecasting_system_prompt() { return kPrinciples; }

LowLevelAgent make_web_research_agent(const ForecasterSetup& setup) {
  if (setup.search == nullptr) throw ConfigError("web research agent needs a search provider");
  LowLevelAgent agent;
  agent.name = "web_research";
  agent.description =
      "Researches a question on the web and returns a short summary of the findings. Input: a plain-language "
      "research instruction.";
  agent.observation_budget = setup.observation_budget;
  agent.inner.agent_id = agent.name;
  agent.inner.model_id = setup.model_id;
  agent.inner.temperature = setup.temperature;
  agent.inner.max_iterations = setup.subagent_iterations;
  agent.inner.system_prompt = std::string(kWebResearchPrompt);
  agent.inner.budget = BudgetPolicy{setup.context_limit_tokens, true};
  agent.inner.tools.add(make_search_tool(
      *setup.search, {"web_search", setup.cutoff, kDefaultSearchResults, setup.observation_budget}));
  // The raw tool description stays short; the subagent absorbs the API detail.
  return agent;
}

LowLevelAgent make_code_agent(const ForecasterSetup& setup) {
  if (setup.sandbox == nullptr) throw ConfigError("code agent needs a sandbox");
  LowLevelAgent agent;
  agent.name = "code_interpreter";
  agent.description =
      "Writes and runs Python to compute a quantitative answer. Input: a plain-language description of the "
      "calculation with all numbers it needs.";
  agent.observation_budget = setup.observation_budget;
  agent.inner.agent_id = agent.name;
  agent.inner.model_id = setup.model_id;
  agent.inner.temperature = setup.temperature;
  agent.inner.max_iterations = setup.subagent_iterations;
  agent.inner.system_prompt = std::string(kCodePrompt);
  agent.inner.budget = BudgetPolicy{setup.context_limit_tokens, true};
  agent.inner.tools.add(make_code_tool(*setup.sandbox, {"python", setup.observation_budget}));
  return agent;
}

PlannerConfig make_default_planner(const ForecasterSetup& setup) {
  PlannerConfig planner;
  planner.system_prompt = std::string(kPrinciples);
  planner.model_id = setup.model_id;
  planner.temperature = setup.temperature;
  planner.max_iterations = setup.planner_iterations;
  planner.budget = BudgetPolicy{setup.context_limit_tokens, true};
  planner.subagents.push_back(make_web_research_agent(setup));
  if (setup.sandbox != nullptr) planner.subagents.push_back(make_code_agent(setup));
  return planner;
}

ReactConfig make_single_agent(const ForecasterSetup& setup) {
  if (setup.search == nullptr) throw ConfigError("single agent needs a search provider");
  ReactConfig config;
  config.agent_id = "single_agent";
  config.model_id = setup.model_id;
  config.temperature = setup.temperature;
  config.max_iterations = setup.planner_iterations;
  config.system_prompt = std::string(kSingleAgentPrompt);
  config.budget = BudgetPolicy{setup.context_limit_tokens, false};
  ToolSpec search = make_search_tool(
      *setup.search, {"web_search", setup.cutoff, kDefaultSearchResults, setup.observation_budget});
  search.description = std::string(kSearchSchema);
  config.tools.add(std::move(search));
  if (setup.sandbox != nullptr) {
    ToolSpec python = make_code_tool(*setup.sandbox, {"python", setup.observation_budget});
    python.description = std::string(kPythonSchema);
    config.tools.add(std::move(python));
  }
  return config;
}

}  // namespace augur
