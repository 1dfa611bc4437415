#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "augur/errors.hpp"
#include "augur/market.hpp"
#include "augur/pipeline.hpp"
#include "fixtures.hpp"
#include "scripted_backend.hpp"

namespace augur {
namespace {

using testing::fixture;
using testing::ScriptedBackend;

json binary_market(const std::string& id, const std::string& close = "2024-04-30T00:00:00Z") {
  const auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                          parse_timestamp(close).time_since_epoch())
                          .count();
  return {{"id", id},           {"question", "Q " + id}, {"closeTime", millis}, {"outcomeType", "BINARY"},
          {"probability", 0.4}, {"isResolved", false}};
}

TEST(ParseMarket, BinaryFieldsAndResolution) {
  json payload = binary_market("m1");
  payload["isResolved"] = true;
  payload["resolution"] = "CANCEL";
  const auto r = parse_market(payload);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->market_id, "m1");
  EXPECT_EQ(r->probability, 0.4);
  EXPECT_EQ(r->resolution, Resolution::other);
  EXPECT_EQ(r->resolution_text, "CANCEL");
  EXPECT_EQ(format_timestamp(r->close_time), "2024-04-30T00:00:00Z");
}

TEST(ParseMarket, NonBinaryIsSkippedAndBrokenIsRejected) {
  json multi = binary_market("m2");
  multi["outcomeType"] = "MULTIPLE_CHOICE";
  EXPECT_FALSE(parse_market(multi).has_value());
  json broken = binary_market("m3");
  broken.erase("probability");
  EXPECT_THROW(parse_market(broken), ValidationError);
  json bad_prob = binary_market("m4");
  bad_prob["probability"] = 1.5;
  EXPECT_THROW(parse_market(bad_prob), ValidationError);
}

TEST(FetchWindow, FiltersPagesAndDedupes) {
  auto client = FixtureMarketClient::load(fixture("markets/markets.jsonl"), 3);
  std::vector<std::string> warnings;
  const auto records = fetch_window(client, parse_date("2024-04-15"), parse_date("2024-05-15"), &warnings);
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.market_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"mEth", "mSwift", "mThesis", "mTraders", "mCeltics"}));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("mBroken"), std::string::npos);
  const auto pages = client.page_requests();
  ASSERT_EQ(pages.size(), 3u);
  EXPECT_FALSE(pages[0].has_value());
  EXPECT_EQ(pages[1], "mThesis");
}

TEST(FetchWindow, BoundsAreInclusiveDays) {
  FixtureMarketClient client({binary_market("a", "2024-04-30T23:59:59Z"), binary_market("b", "2024-05-01T00:00:00Z"),
                              binary_market("a", "2024-04-30T23:59:59Z")});
  const auto records = fetch_window(client, parse_date("2024-04-30"), parse_date("2024-04-30"));
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].market_id, "a");
  EXPECT_THROW(fetch_window(client, parse_date("2024-05-01"), parse_date("2024-04-30")), ConfigError);
}

/// Serves `markets` newest-first with the Manifold paging contract.
class FakeManifold {
 public:
  explicit FakeManifold(std::vector<json> markets) : markets_(std::move(markets)) {
    server_.Get("/v0/markets", [this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t limit = std::stoul(req.get_param_value("limit"));
      std::size_t start = 0;
      if (req.has_param("before")) {
        befores.push_back(req.get_param_value("before"));
        while (start < markets_.size() && markets_[start]["id"] != req.get_param_value("before")) ++start;
        ++start;
      }
      json page = json::array();
      for (std::size_t i = start; i < markets_.size() && page.size() < limit; ++i) page.push_back(markets_[i]);
      res.set_content(page.dump(), "application/json");
    });
    server_.Get(R"(/v0/market/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      for (const auto& m : markets_) {
        if (m["id"] == req.matches[1].str()) {
          res.set_content(m.dump(), "application/json");
          return;
        }
      }
      res.status = 404;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeManifold() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::vector<std::string> befores;

 private:
  std::vector<json> markets_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(ManifoldClient, PaginatesOverHttp) {
  std::vector<json> markets;
  for (int i = 0; i < 7; ++i) markets.push_back(binary_market("m" + std::to_string(i)));
  FakeManifold server(markets);
  ManifoldOptions options;
  options.base_url = server.base_url();
  options.page_size = 3;
  ManifoldClient client(options, make_default_transport(std::chrono::seconds{5}), nullptr);
  const auto records = fetch_window(client, parse_date("2024-04-01"), parse_date("2024-05-01"));
  EXPECT_EQ(records.size(), 7u);
  EXPECT_EQ(server.befores, (std::vector<std::string>{"m2", "m5"}));
  EXPECT_EQ(client.detail("m4")["id"], "m4");
  EXPECT_THROW(client.detail("missing"), ProviderError);
}

TEST(Judge, NormalizesReplies) {
  EXPECT_EQ(normalize_judge_reply("Yes."), "yes");
  EXPECT_EQ(normalize_judge_reply("  \"NO\" because"), "no");
  EXPECT_EQ(normalize_judge_reply("**Yes**"), "yes");
  EXPECT_EQ(normalize_judge_reply(""), "");
}

TEST(Judge, FilterVerdicts) {
  ScriptedBackend judge = ScriptedBackend::load(fixture("markets/judge_script.json"));
  EXPECT_EQ(llm_filter(judge, "Will ETH close above 3700?").verdict, Verdict::keep);
  EXPECT_EQ(llm_filter(judge, "Will I finish my thesis this month?").verdict, Verdict::drop);
  const FilterVerdict retried = llm_filter(judge, "Will this market have more than 50 traders?");
  EXPECT_EQ(retried.verdict, Verdict::drop);
  EXPECT_EQ(retried.judge_reply, "No");
  EXPECT_EQ(retried.note, "answered on retry");

  ScriptedBackend failing({{"f", "", {}, {}, {"!transport"}}});
  const FilterVerdict failed = llm_filter(failing, "anything");
  EXPECT_EQ(failed.verdict, Verdict::drop);
  EXPECT_TRUE(failed.note.starts_with("backend:"));
  ScriptedBackend denied({{"f", "", {}, {}, {"!auth"}}});
  EXPECT_THROW(llm_filter(denied, "anything"), AuthError);
}

TEST(Judge, Categories) {
  ScriptedBackend judge = ScriptedBackend::load(fixture("markets/judge_script.json"));
  EXPECT_EQ(classify_category(judge, "Will ETH close above 3700?"), Category::economics_business);
  EXPECT_EQ(classify_category(judge, "Will Taylor Swift release a new album before May 1, 2024?"),
            Category::arts_recreation);
  EXPECT_EQ(classify_category(judge, "Will the Celtics win their first-round series in the 2024 NBA playoffs?"),
            Category::unknown);
  EXPECT_NE(category_prompt("x").find("- Healthcare & Biology"), std::string::npos);
}

TEST(Curate, EndToEndOverFixtures) {
  auto client = FixtureMarketClient::load(fixture("markets/markets.jsonl"));
  ScriptedBackend judge = ScriptedBackend::load(fixture("markets/judge_script.json"));
  CurateOptions options;
  options.from = parse_date("2024-04-15");
  options.to = parse_date("2024-05-15");
  options.at = parse_timestamp("2024-04-15T00:00:00Z");
  const CurateResult result = curate(client, judge, options);
  ASSERT_EQ(result.kept.size(), 3u);
  EXPECT_EQ(result.dropped, 2u);
  EXPECT_EQ(result.audit.size(), 5u);
  EXPECT_EQ(result.kept[0].id, "mEth");
  EXPECT_EQ(result.kept[0].crowd_prob, 0.38);
  EXPECT_FALSE(result.kept[0].outcome.has_value());
  EXPECT_EQ(result.kept[0].fetched_at, options.at);
  EXPECT_EQ(result.kept[1].background, "Counts only studio albums.");
  EXPECT_EQ(result.kept[1].category, Category::arts_recreation);
  EXPECT_EQ(result.kept[2].category, Category::unknown);

  const std::string table = render_category_table(result.kept);
  EXPECT_NE(table.find("| Economics & Business | 1 | 33.3 |"), std::string::npos);
  EXPECT_NE(table.find("| Unknown | 1 | 33.3 |"), std::string::npos);
  EXPECT_NE(table.find("| Total | 3 | 100.0 |"), std::string::npos);
}

TEST(Snapshot, SkipsClosedMarkets) {
  std::vector<MarketRecord> records = {*parse_market(binary_market("open", "2024-05-01T00:00:00Z")),
                                       *parse_market(binary_market("closed", "2024-04-01T00:00:00Z"))};
  const auto questions = snapshot(records, parse_timestamp("2024-04-15T00:00:00Z"));
  ASSERT_EQ(questions.size(), 1u);
  EXPECT_EQ(questions[0].id, "open");
  EXPECT_EQ(questions[0].source, "manifold");
}

TEST(Backfill, MapsResolutionsWithoutTouchingOtherFields) {
  auto client = FixtureMarketClient::load(fixture("markets/markets.jsonl"));
  ScriptedBackend judge = ScriptedBackend::load(fixture("markets/judge_script.json"));
  CurateOptions options{parse_date("2024-04-15"), parse_date("2024-05-15"), parse_timestamp("2024-04-15T00:00:00Z")};
  std::vector<Question> dataset = curate(client, judge, options).kept;
  const std::vector<Question> before = dataset;

  auto resolved = FixtureMarketClient::load(fixture("markets/resolved.jsonl"));
  const BackfillSummary summary = backfill_resolutions(resolved, dataset);
  EXPECT_EQ(summary.resolved, 2u);
  EXPECT_EQ(summary.excluded, 1u);
  EXPECT_EQ(summary.pending, 0u);
  EXPECT_EQ(dataset[0].outcome, 0);
  EXPECT_EQ(dataset[1].outcome, 1);
  EXPECT_EQ(dataset[2].flag, ResolutionFlag::excluded);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    Question q = dataset[i];
    q.outcome = before[i].outcome;
    q.flag = before[i].flag;
    EXPECT_EQ(q, before[i]);
  }

  std::vector<Question> pending = before;
  const BackfillSummary none = backfill_resolutions(client, pending);
  EXPECT_EQ(none.pending, 3u);
  EXPECT_EQ(pending[0].flag, ResolutionFlag::pending);
}

}  // namespace
}  // namespace augur
