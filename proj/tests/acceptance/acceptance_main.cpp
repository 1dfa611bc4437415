// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances and time limits are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "augur/cassette.hpp"
#include "augur/hierarchy.hpp"
#include "augur/metrics.hpp"
#include "augur/pipeline.hpp"
#include "augur/rate_limiter.hpp"
#include "augur/react.hpp"
#include "augur/report.hpp"
#include "augur/search.hpp"
#include "augur/transcript_store.hpp"
#include "eth_transcript.hpp"
#include "e2e.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "scripted_backend.hpp"

namespace augur {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kOracleTolerance = 1e-12;
constexpr double kMetricSeconds = 10.0;
constexpr double kCalibrationSeconds = 5.0;
constexpr double kEndToEndSeconds = 30.0;
constexpr double kWellCalibratedMax = 0.005;
constexpr double kMiscalibratedMin = 0.9;

struct Check {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

ScoredSet to_set(const std::vector<testing::OraclePair>& pairs) {
  std::vector<ScoredPair> scored;
  scored.reserve(pairs.size());
  for (const auto& p : pairs) scored.push_back({p.id, p.f, p.o});
  return ScoredSet("m", std::move(scored));
}

Check metric_oracle_equivalence() {
  Check v;
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> size(1, 1000);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    const int n = size(rng);
    // Every third set uses two-decimal forecasts so ties are exercised.
    const bool coarse = set % 3 == 0;
    std::vector<testing::OraclePair> pairs;
    for (int i = 0; i < n; ++i) {
      double f = unit(rng);
      if (coarse) f = std::round(f * 100.0) / 100.0;
      pairs.push_back({"q" + std::to_string(i), f, unit(rng) < f ? 1 : 0});
    }
    const ScoredSet scored = to_set(pairs);
    worst = std::max(worst, std::abs(brier(scored) - testing::oracle_brier(pairs)));
    worst = std::max(worst, std::abs(accuracy(scored) - testing::oracle_accuracy(pairs)));
    if (n >= static_cast<int>(kDefaultBins)) {
      const double ci = calibration_index(scored, kDefaultBins).index;
      worst = std::max(worst, std::abs(ci - testing::oracle_calibration_index(pairs, kDefaultBins)));
    }
  }
  const double elapsed = seconds_since(start);
  if (worst > kOracleTolerance) v.fail("max deviation " + fmt(worst));
  if (elapsed > kMetricSeconds) v.fail("took " + fmt(elapsed) + " s");
  v.detail = v.pass ? "max deviation " + fmt(worst) + ", " + fmt(elapsed) + " s" : v.detail;
  return v;
}

Check metric_anchors() {
  Check v;
  std::mt19937_64 rng(2);
  std::vector<ScoredPair> half;
  for (int i = 0; i < 200; ++i) half.push_back({"q" + std::to_string(i), 0.5, static_cast<int>(rng() % 2)});
  const double b = brier(ScoredSet("half", half));
  if (std::abs(b - 0.25) > kOracleTolerance) v.fail("constant 0.5 Brier " + fmt(b));
  const ScoredSet eth("eth", {{"eth-3700", 0.35, 0}});
  if (std::abs(brier(eth) - 0.1225) > kOracleTolerance) v.fail("(0.35, 0) squared error " + fmt(brier(eth)));
  if (accuracy(eth) != 1.0) v.fail("(0.35, 0) accuracy " + fmt(accuracy(eth)));
  if (v.pass) v.detail = "0.25, 0.1225, hit";
  return v;
}

Check calibration_behaviour() {
  Check v;
  const auto start = Clock::now();
  std::mt19937_64 rng(20240415);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScoredPair> calibrated, overconfident;
  for (int i = 0; i < 10000; ++i) {
    const double f = unit(rng);
    const std::string id = "q" + std::to_string(i);
    calibrated.push_back({id, f, unit(rng) < f ? 1 : 0});
    overconfident.push_back({id, 0.99, 0});
  }
  const double good = calibration_index(ScoredSet("cal", calibrated), 10).index;
  const double bad = calibration_index(ScoredSet("over", overconfident), 10).index;
  const double elapsed = seconds_since(start);
  if (!(good < kWellCalibratedMax)) v.fail("calibrated CI " + fmt(good));
  if (!(bad > kMiscalibratedMin)) v.fail("overconfident CI " + fmt(bad));
  if (elapsed > kCalibrationSeconds) v.fail("took " + fmt(elapsed) + " s");
  if (v.pass) v.detail = "CI " + fmt(good) + " vs " + fmt(bad);
  return v;
}

Check parser_fixtures() {
  Check v;
  const auto chunks = testing::eth_transcript_emissions();
  const std::vector<std::string> transcript_tools = {"Google Search Snippets"};
  if (chunks.size() != 6) {
    v.fail("expected 6 transcript emissions, got " + std::to_string(chunks.size()));
    return v;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const ParsedEmission parsed = parse_emission(chunks[i], transcript_tools);
    const auto* action = std::get_if<ActionEmission>(&parsed);
    if (action == nullptr || action->tool != "Google Search Snippets" || action->input.empty()) {
      v.fail("emission " + std::to_string(i) + " is not the recorded Action");
    }
  }
  for (std::size_t i = 4; i < 6; ++i) {
    const ParsedEmission parsed = parse_emission(chunks[i], transcript_tools);
    const auto* final = std::get_if<FinalEmission>(&parsed);
    if (final == nullptr) {
      v.fail("emission " + std::to_string(i) + " is not a Final Answer");
      continue;
    }
    const Extraction e = extract_probability(final->answer);
    const auto* f = std::get_if<Forecast>(&e.result);
    if (f == nullptr || f->value() != 0.35) v.fail("emission " + std::to_string(i) + " does not extract 0.35");
  }
  const auto doc = nlohmann::json::parse(testing::read_file(testing::fixture("malformed_emissions.json")));
  const auto tools = doc.at("tools").get<std::vector<std::string>>();
  std::size_t matched = 0;
  for (const auto& c : doc.at("cases")) {
    const ParsedEmission parsed = parse_emission(c.at("emission").get<std::string>(), tools);
    const auto* bad = std::get_if<MalformedEmission>(&parsed);
    if (bad != nullptr && to_string(bad->reason) == c.at("reason").get<std::string>()) {
      ++matched;
    } else {
      v.fail("malformed case '" + c.at("name").get<std::string>() + "' misclassified");
    }
  }
  if (doc.at("cases").size() != 20) v.fail("malformed corpus has " + std::to_string(doc.at("cases").size()) + " cases");
  if (v.pass) v.detail = "6 transcript emissions, " + std::to_string(matched) + "/20 malformed";
  return v;
}

/// Runs the replay scenario and returns the records file contents.
std::string replay_run(const fs::path& dir, int workers, ForecastRunResult* result) {
  ReplayBackend backend(Cassette::load(testing::e2e_fixture("cassette.jsonl")));
  ForecastRunResult r = testing::run_e2e(backend, dir, workers);
  if (result != nullptr) *result = std::move(r);
  return testing::read_file(dir / "records.jsonl");
}

Check deterministic_end_to_end(ForecastRunResult& first) {
  Check v;
  testing::TempDir a("accept-a"), b("accept-b");
  const auto start = Clock::now();
  const std::string records_a = replay_run(a.path(), 4, &first);
  const std::string records_b = replay_run(b.path(), 1, nullptr);
  const double elapsed = seconds_since(start);

  if (records_a.empty() || records_a != records_b) v.fail("records differ between runs");
  if (first.records.size() != 5) v.fail("expected 5 records");
  for (const auto& record : first.records) {
    if (record.members().size() != 3) v.fail(record.question_id() + " does not have 3 members");
  }
  if (!first.records.empty()) {
    const auto& eth = first.records.front();
    if (eth.question_id() != "eth-3700" || !eth.aggregate() || eth.aggregate()->value() != 0.35) {
      v.fail("ETH record does not end at 0.35");
    }
  }

  TranscriptStore store(a / "transcripts");
  std::size_t children = 0;
  for (const auto& record : first.records) {
    for (const auto& entry : store.load_index(record.question_id())) {
      if (entry.parent.empty()) continue;
      ++children;
      const Transcript parent = store.load(entry.parent);
      const Transcript child = store.load(entry.file);
      if (!entry.parent_step || *entry.parent_step >= parent.steps.size() ||
          parent.steps[*entry.parent_step].action_input != child.task) {
        v.fail("child " + entry.file + " task differs from its Action Input");
      }
    }
  }
  const Transcript eth_planner = store.load(store.planner_ref("eth-3700", 0));
  if (eth_planner.end.kind != EndKind::final || eth_planner.end.answer != "0.35") {
    v.fail("ETH planner does not finish with Final Answer 0.35");
  }
  if (children == 0) v.fail("no child transcripts were written");
  if (elapsed > kEndToEndSeconds) v.fail("took " + fmt(elapsed) + " s");
  if (v.pass) v.detail = std::to_string(children) + " child transcripts, " + fmt(elapsed) + " s";
  return v;
}

Check drop_rule() {
  Check v;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::string, MethodForecasts> methods;
    std::map<std::string, int> outcomes;
    std::set<std::string> declined_union;
    for (int q = 0; q < 100; ++q) outcomes["q" + std::to_string(q)] = unit(rng) < 0.5 ? 1 : 0;
    for (const std::string label : {"A", "B", "C"}) {
      MethodForecasts& m = methods[label];
      for (const auto& [id, _] : outcomes) {
        if (unit(rng) < 0.1) {
          m.insert_or_assign(id, Declined{DeclineReason::no_number, ""});
          declined_union.insert(id);
        } else {
          m.insert_or_assign(id, Forecast(std::clamp(unit(rng), 0.01, 0.99)));
        }
      }
    }
    const DropResult result = apply_drop_rule(methods, outcomes);
    std::set<std::string> expected;
    for (const auto& [id, _] : outcomes) {
      if (!declined_union.count(id)) expected.insert(id);
    }
    if (result.dropped != declined_union) v.fail("dropped set is not the union of declines");
    for (const auto& [label, set] : result.sets) {
      std::set<std::string> ids;
      for (const auto& p : set.pairs()) ids.insert(p.question_id);
      if (ids != expected) v.fail("method " + label + " survivors differ from the complement");
      if (set.size() != expected.size()) v.fail("unequal n");
    }
    if (result.sets.size() != 3) v.fail("missing method sets");
  }
  if (v.pass) v.detail = "20 trials";
  return v;
}

/// Records every outgoing request and answers with one result dated after
/// the cutoff and one before it.
class CapturingTransport final : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& request) override {
    std::lock_guard lock(mutex_);
    urls_.push_back(request.url);
    HttpResponse r;
    r.status = 200;
    r.body = R"({"items":[
      {"title":"old","link":"https://example.org/old","snippet":"older report",
       "pagemap":{"metatags":[{"article:published_time":"2020-01-02T00:00:00Z"}]}},
      {"title":"new","link":"https://example.org/new","snippet":"LEAKED outcome",
       "pagemap":{"metatags":[{"article:published_time":"2099-01-01T00:00:00Z"}]}}]})";
    return r;
  }
  std::vector<std::string> urls() const {
    std::lock_guard lock(mutex_);
    return urls_;
  }

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> urls_;
};

/// Searches for its task verbatim on the first turn, then answers.
class EchoSearchBackend final : public Backend {
 public:
  ChatResponse complete(const ChatRequest& request) override {
    std::string task;
    bool answered = false;
    for (const auto& m : request.messages) {
      if (m.role == Role::user && task.empty()) task = m.content;
      if (m.role == Role::assistant) answered = true;
    }
    ChatResponse r;
    r.content = answered ? "Thought: Do I need to use a tool? No\nFinal Answer: done"
                         : "Thought: Do I need to use a tool? Yes\nAction: web_search\nAction Input: " + task;
    return r;
  }
};

Check search_cutoff() {
  Check v;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> day_offset(0, 2000);
  std::uniform_int_distribution<int> word(0, 9);
  const std::vector<std::string> words = {"ether", "fed", "rates", "election", "launch",
                                          "playoffs", "inflation", "storm", "merger", "vote"};
  const Date base = parse_date("2019-01-01");
  std::size_t checked = 0;
  for (int i = 0; i < 100; ++i) {
    const Date cutoff = base + std::chrono::days(day_offset(rng));
    auto transport = std::make_shared<CapturingTransport>();
    GoogleSearchOptions options;
    options.api_key = "k";
    options.engine_id = "e";
    GoogleSearchProvider google(options, transport, std::make_shared<RateLimiter>(0.0));
    ForecasterSetup setup;
    setup.search = &google;
    setup.cutoff = cutoff;
    const LowLevelAgent agent = make_web_research_agent(setup);
    std::string query = words[word(rng)] + " " + words[word(rng)] + " " + std::to_string(i);
    EchoSearchBackend backend;
    const ReactRun run = run_react_loop(agent.inner, backend, query);
    const auto urls = transport->urls();
    if (urls.empty()) v.fail("query " + std::to_string(i) + " sent no request");
    for (const auto& url : urls) {
      ++checked;
      const auto sort = query_param(url, "sort");
      const auto bound = sort ? date_restrict_upper_bound(*sort) : std::nullopt;
      if (!bound || !(*bound <= cutoff)) v.fail("request without a date restrict at or before the cutoff: " + url);
    }
    for (const auto& step : run.transcript.steps) {
      if (step.observation.find("LEAKED") != std::string::npos) v.fail("post-cutoff result reached the agent");
    }
  }
  if (v.pass) v.detail = std::to_string(checked) + " requests restricted";
  return v;
}

Check ablation() {
  Check v;
  const auto questions = load_questions(testing::fixture("ablation/questions.jsonl"));
  testing::ScriptedBackend backend = testing::ScriptedBackend::load(testing::fixture("ablation/script.json"));
  FixtureSearchProvider search = FixtureSearchProvider::load(testing::fixture("ablation/search.jsonl"));
  RunConfig config;
  config.cutoff = parse_date("2024-04-15");
  config.ensemble_size = 1;
  config.context_limit_tokens = 2500;

  config.single_agent = true;
  const ForecastOutcome single = make_member_forecaster(config, backend, search, nullptr)(questions[0], 0, "abl#0");
  config.single_agent = false;
  const ForecastOutcome tiered = make_member_forecaster(config, backend, search, nullptr)(questions[0], 0, "abl#0");

  const auto* declined = std::get_if<Declined>(&single.result);
  if (declined == nullptr || declined->reason != DeclineReason::budget) v.fail("single agent did not decline on budget");
  const auto* forecast = std::get_if<Forecast>(&tiered.result);
  if (forecast == nullptr) v.fail("hierarchical run gave no forecast");
  if (v.pass) v.detail = "single Declined(budget), hierarchical " + fmt(forecast->value());
  return v;
}

Check report_format(const ForecastRunResult& run) {
  Check v;
  const auto questions = load_questions(testing::e2e_fixture("questions.jsonl"));
  const std::vector<MethodInput> methods = {{"Hierarchical", run.records}};
  const std::string md = render_report(score_methods(methods, questions, 2));
  const auto tables = parse_markdown_tables(md);
  if (tables.size() != 2) {
    v.fail("expected 2 tables, found " + std::to_string(tables.size()));
    return v;
  }
  if (tables[0].header != std::vector<std::string>{"Method", "Brier", "Acc %", "Std"}) v.fail("score table header");
  if (tables[1].header != std::vector<std::string>{"Method", "Calibration Index"}) v.fail("calibration table header");
  const std::regex three(R"(-|\d+\.\d{3})"), one(R"(-|\d+\.\d)");
  for (const auto& row : tables[0].rows) {
    if (row.size() != 4 || !std::regex_match(row[1], three) || !std::regex_match(row[2], one) ||
        !std::regex_match(row[3], three)) {
      v.fail("bad score row");
    }
  }
  for (const auto& row : tables[1].rows) {
    if (row.size() != 2 || !std::regex_match(row[1], three)) v.fail("bad calibration row");
  }
  if (tables[0].rows.size() != 2 || tables[1].rows.size() != 2) v.fail("expected Hierarchical and Crowd rows");
  if (v.pass) v.detail = std::to_string(tables[0].rows.size()) + " methods";
  return v;
}

Check guarded(const std::function<Check()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    Check v;
    v.fail(std::string("exception: ") + e.what());
    return v;
  }
}

}  // namespace
}  // namespace augur

int main() {
  using augur::Check;
  augur::ForecastRunResult e2e;
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"1 metric oracle equivalence", augur::metric_oracle_equivalence},
      {"2 metric anchors", augur::metric_anchors},
      {"3 calibration index behaviour", augur::calibration_behaviour},
      {"4 parser fixtures", augur::parser_fixtures},
      {"5 deterministic end-to-end replay", [&] { return augur::deterministic_end_to_end(e2e); }},
      {"6 drop rule", augur::drop_rule},
      {"7 search cutoff enforcement", augur::search_cutoff},
      {"8 ablation budget failure", augur::ablation},
      {"9 report format", [&] { return augur::report_format(e2e); }},
  };
  int failures = 0;
  for (const auto& [name, body] : criteria) {
    const Check v = augur::guarded(body);
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << (v.detail.empty() ? "" : ": " + v.detail) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
