#include <gtest/gtest.h>

#include "augur/errors.hpp"
#include "augur/hierarchy.hpp"
#include "augur/observation.hpp"
#include "augur/sandbox.hpp"
#include "augur/search.hpp"
#include "e2e.hpp"
#include "scripted_backend.hpp"

namespace augur {
namespace {

using testing::ScriptedBackend;
using testing::ScriptRule;

const Date kCutoff = parse_date("2024-04-15");

LowLevelAgent echo_agent() {
  LowLevelAgent agent;
  agent.name = "helper";
  agent.description = "Helps.";
  agent.inner.system_prompt = "You help.";
  agent.inner.max_iterations = 2;
  agent.inner.tools.add({"lookup", "Returns a fact.", [](const std::string& in) { return "fact " + in; },
                         ToolKind::raw, std::nullopt});
  return agent;
}

TEST(AsTool, ReturnsTheSubagentAnswerAndReportsItsTranscript) {
  ScriptedBackend backend({{"h", "You help.", {}, {}, {"Action: lookup\nAction Input: x", "Final Answer: found x"}}});
  std::vector<std::pair<std::string, Transcript>> seen;
  const ToolSpec tool =
      as_tool(echo_agent(), backend, [&](const std::string& n, Transcript t) { seen.emplace_back(n, t); }, "q#0");
  EXPECT_EQ(tool.kind, ToolKind::agent);
  EXPECT_EQ(tool.name, "helper");
  EXPECT_EQ(tool.invoke("look up x"), "found x");
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].first, "helper");
  EXPECT_EQ(seen[0].second.agent_id, "helper");
  EXPECT_EQ(seen[0].second.task, "look up x");
  EXPECT_EQ(seen[0].second.steps.at(0).observation, "fact x");
}

TEST(AsTool, LongAnswersAreTruncatedToTheBudget) {
  ScriptedBackend backend({{"h", "You help.", {}, {}, {"Final Answer: " + std::string(5000, 'a')}}});
  LowLevelAgent agent = echo_agent();
  agent.observation_budget = 100;
  const std::string out = as_tool(agent, backend).invoke("x");
  EXPECT_EQ(out.size(), 100u);
  EXPECT_TRUE(out.ends_with(kTruncatedMarker));
}

TEST(AsTool, FailuresBecomeObservations) {
  ScriptedBackend failing({{"h", "You help.", {}, {}, {"!transport"}}});
  int sink_calls = 0;
  const auto sink = [&](const std::string&, Transcript t) {
    ++sink_calls;
    EXPECT_EQ(t.end.kind, EndKind::aborted);
  };
  EXPECT_TRUE(as_tool(echo_agent(), failing, sink).invoke("x").starts_with("[subagent error: "));
  EXPECT_EQ(sink_calls, 1);

  ScriptedBackend rambling({{"h", "You help.", {}, {}, {"Action: lookup\nAction Input: x"}}});
  EXPECT_EQ(as_tool(echo_agent(), rambling).invoke("x"), kNoFinalAnswer);

  ScriptedBackend denied({{"h", "You help.", {}, {}, {"!auth"}}});
  EXPECT_THROW(as_tool(echo_agent(), denied).invoke("x"), AuthError);
}

TEST(AsTool, SubagentsMayNotHoldAgents) {
  ScriptedBackend backend({});
  LowLevelAgent outer = echo_agent();
  outer.name = "outer";
  outer.inner.tools.add(as_tool(echo_agent(), backend));
  EXPECT_THROW(outer.validate(), ConfigError);
  EXPECT_THROW(as_tool(outer, backend), ConfigError);
}

TEST(RenderTask, FillsMissingFieldsWithNone) {
  Question q;
  q.title = "Will ETH close above 3700?";
  q.close_time = parse_timestamp("2024-04-30T23:59:00Z");
  EXPECT_EQ(render_task(q),
            "Will ETH close above 3700?\nBackground: None\nResolution criteria: None\nClosure time: April 30, 2024");
  q.background = "bg";
  q.resolution_criteria = "rc";
  EXPECT_EQ(render_task(q),
            "Will ETH close above 3700?\nBackground: bg\nResolution criteria: rc\nClosure time: April 30, 2024");
}

Question eth_question() { return load_questions(testing::e2e_fixture("questions.jsonl")).at(0); }

TEST(ForecastOne, EthFlowBuildsTheTranscriptTree) {
  ScriptedBackend backend = ScriptedBackend::load(testing::e2e_fixture("script.json"));
  FixtureSearchProvider search = FixtureSearchProvider::load(testing::e2e_fixture("search.jsonl"));
  ForecasterSetup setup;
  setup.search = &search;
  setup.cutoff = kCutoff;
  const ForecastOutcome out = forecast_one(make_default_planner(setup), backend, eth_question(), kCutoff, "eth-3700#0");
  EXPECT_EQ(std::get<Forecast>(out.result).value(), 0.35);
  EXPECT_EQ(out.raw_value, 0.35);
  const auto& planner = out.tree.planner;
  EXPECT_EQ(planner.agent_id, "planner");
  ASSERT_EQ(planner.steps.size(), 2u);
  ASSERT_EQ(out.tree.children.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const ChildTranscript& child = out.tree.children[i];
    EXPECT_EQ(child.parent_step, i);
    EXPECT_EQ(child.tool, "web_research");
    EXPECT_EQ(child.transcript.task, planner.steps[i].action_input);
    EXPECT_EQ(planner.steps[i].observation, child.transcript.end.answer);
  }
  // The fixture result dated after the cutoff never reaches the agent.
  for (const auto& child : out.tree.children) {
    for (const auto& step : child.transcript.steps) {
      EXPECT_EQ(step.observation.find("after the cutoff"), std::string::npos);
    }
  }
  for (const auto& req : search.requests()) EXPECT_EQ(req.before_date, kCutoff);
  EXPECT_GT(out.usage.prompt_tokens, 0);
}

TEST(ForecastOne, RejectsMismatchedOrFutureCutoffs) {
  ScriptedBackend backend({});
  FixtureSearchProvider search({});
  ForecasterSetup setup;
  setup.search = &search;
  setup.cutoff = kCutoff;
  const PlannerConfig planner = make_default_planner(setup);
  EXPECT_THROW(forecast_one(planner, backend, eth_question(), parse_date("2024-04-16")), ConfigError);
  setup.cutoff = today_utc() + std::chrono::days{3};
  EXPECT_THROW(forecast_one(make_default_planner(setup), backend, eth_question(), setup.cutoff), ConfigError);
  EXPECT_EQ(backend.calls(), 0u);
}

TEST(DefaultAgents, PlannerWiring) {
  FixtureSearchProvider search({});
  Sandbox sandbox(SandboxConfig{});
  ForecasterSetup setup;
  setup.search = &search;
  setup.cutoff = kCutoff;
  PlannerConfig without_code = make_default_planner(setup);
  ASSERT_EQ(without_code.subagents.size(), 1u);
  EXPECT_EQ(without_code.subagents[0].name, "web_research");
  EXPECT_EQ(without_code.subagents[0].inner.tools.find("web_search")->date_restriction, kCutoff);

  setup.sandbox = &sandbox;
  const PlannerConfig planner = make_default_planner(setup);
  ASSERT_EQ(planner.subagents.size(), 2u);
  EXPECT_EQ(planner.subagents[1].name, "code_interpreter");
  EXPECT_NE(planner.subagents[1].inner.tools.find("python"), nullptr);
  EXPECT_NE(planner.system_prompt.find("web_research"), std::string::npos);
  EXPECT_NO_THROW(planner.validate());
}

TEST(DefaultAgents, SingleAgentHoldsRawToolsWithoutCompaction) {
  FixtureSearchProvider search({});
  Sandbox sandbox(SandboxConfig{});
  ForecasterSetup setup;
  setup.search = &search;
  setup.sandbox = &sandbox;
  setup.cutoff = kCutoff;
  const ReactConfig single = make_single_agent(setup);
  EXPECT_EQ(single.tools.names(), (std::vector<std::string>{"web_search", "python"}));
  ASSERT_TRUE(single.budget.has_value());
  EXPECT_FALSE(single.budget->compact);
  for (const auto& tool : single.tools.tools()) {
    EXPECT_EQ(tool.kind, ToolKind::raw);
    EXPECT_GT(tool.description.size(), 500u) << tool.name;
  }
}

TEST(SingleAgent, ForecastsWithRawTools) {
  ScriptedBackend backend({{"s", "Use the tools", {}, {}, {"Action: web_search\nAction Input: eth", "Final Answer: 40%"}}});
  FixtureSearchProvider search({{"*", {"t", "u", "s", std::nullopt}}});
  ForecasterSetup setup;
  setup.search = &search;
  setup.cutoff = kCutoff;
  const ForecastOutcome out = forecast_single_agent(make_single_agent(setup), backend, eth_question(), kCutoff, "x#0");
  EXPECT_EQ(std::get<Forecast>(out.result).value(), 0.4);
  EXPECT_EQ(out.tree.planner.agent_id, "single_agent");
  EXPECT_TRUE(out.tree.children.empty());
}

}  // namespace
}  // namespace augur
