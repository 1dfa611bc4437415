#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "augur/react.hpp"

namespace {

const std::vector<std::string> kTools = {"web_research", "code_interpreter"};

void BM_ParseAction(benchmark::State& state) {
  std::string text(static_cast<std::size_t>(state.range(0)), 'x');
  text += "\nThought: Do I need to use a tool? Yes\nAction: web_research\nAction Input: ETH price history 2023\n";
  for (auto _ : state) benchmark::DoNotOptimize(augur::parse_emission(text, kTools).index());
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseAction)->Arg(0)->Arg(4000);

void BM_ExtractProbability(benchmark::State& state) {
  const std::string answer = "0.35 after combining the three estimates";
  for (auto _ : state) benchmark::DoNotOptimize(augur::extract_probability(answer).raw_value);
}
BENCHMARK(BM_ExtractProbability);

void BM_Compaction(benchmark::State& state) {
  augur::ReactConfig config;
  config.tools.add({"web_research", "search", [](const std::string&) { return std::string(); }, augur::ToolKind::raw, std::nullopt});
  std::vector<augur::AgentStep> steps;
  for (int i = 0; i < state.range(0); ++i) {
    steps.push_back({"Thought: look\nAction: web_research\nAction Input: q", "look", "web_research", "q",
                     std::string(4000, 'o')});
  }
  for (auto _ : state) benchmark::DoNotOptimize(augur::compaction_prefix(config, "task", steps, 2000));
}
BENCHMARK(BM_Compaction)->Arg(10)->Arg(25);

}  // namespace
