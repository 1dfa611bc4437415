#include <gtest/gtest.h>

#include <mutex>

#include "augur/errors.hpp"
#include "augur/search.hpp"
#include "fixtures.hpp"

namespace augur {
namespace {

/// Records every URL and answers with a canned body.
class CaptureTransport final : public HttpTransport {
 public:
  explicit CaptureTransport(std::string body, int status = 200) : body_(std::move(body)), status_(status) {}
  HttpResponse send(const HttpRequest& request) override {
    std::lock_guard lock(mutex_);
    urls.push_back(request.url);
    HttpResponse r;
    r.status = status_;
    r.body = body_;
    return r;
  }
  std::vector<std::string> urls;

 private:
  std::string body_;
  int status_;
  std::mutex mutex_;
};

FixtureSearchProvider sample_provider() {
  return FixtureSearchProvider({
      {"ethereum", {"Old ETH", "u1", "ETH in 2023", parse_date("2023-12-01")}},
      {"ethereum", {"New ETH", "u2", "ETH in May", parse_date("2024-05-02")}},
      {"ethereum", {"Undated ETH", "u3", "no date", std::nullopt}},
      {"*", {"Generic", "u4", "always", parse_date("2024-04-14")}},
  });
}

TEST(Search, DropsResultsOnOrAfterTheCutoff) {
  auto provider = sample_provider();
  const auto results = search(provider, "Ethereum price", parse_date("2024-04-15"));
  std::vector<std::string> titles;
  for (const auto& r : results) titles.push_back(r.title);
  EXPECT_EQ(titles, (std::vector<std::string>{"Old ETH", "Undated ETH", "Generic"}));
  ASSERT_EQ(provider.requests().size(), 1u);
  EXPECT_EQ(provider.requests()[0].before_date, parse_date("2024-04-15"));
}

TEST(Search, CutoffDayItselfIsExcluded) {
  auto provider = sample_provider();
  const auto results = search(provider, "weather", parse_date("2024-04-14"));
  EXPECT_TRUE(results.empty());
}

TEST(Search, CapsAndRejectsEmptyQueries) {
  auto provider = sample_provider();
  EXPECT_EQ(search(provider, "ethereum", std::nullopt, 2).size(), 2u);
  EXPECT_THROW(search(provider, "   ", std::nullopt), std::invalid_argument);
}

TEST(Search, FixtureFileLoads) {
  auto provider = FixtureSearchProvider::load(testing::fixture("e2e/search.jsonl"));
  const auto results = search(provider, "historical price data of Ethereum", parse_date("2024-04-15"));
  EXPECT_FALSE(results.empty());
  for (const auto& r : results) {
    if (r.published) EXPECT_LT(*r.published, parse_date("2024-04-15")) << r.title;
  }
}

TEST(GoogleSearch, EncodesTheCutoffAsDateRestrict) {
  auto transport = std::make_shared<CaptureTransport>(R"({"items":[
    {"title":"A","link":"https://a","snippet":"first","pagemap":{"metatags":[{"article:published_time":"2024-03-01T10:00:00Z"}]}},
    {"title":"B","link":"https://b","snippet":"second","pagemap":{"metatags":[{"og:published_time":"2024-04-20"}]}},
    {"title":"C","link":"https://c","snippet":"third"}]})");
  GoogleSearchProvider provider({"https://search.example/v1", "KEY", "CX", {}}, transport, nullptr);
  const auto results = search(provider, "eth price", parse_date("2024-04-15"), 5);
  ASSERT_EQ(transport->urls.size(), 1u);
  const std::string& url = transport->urls[0];
  EXPECT_EQ(query_param(url, "q"), "eth price");
  EXPECT_EQ(query_param(url, "num"), "5");
  EXPECT_EQ(query_param(url, "cx"), "CX");
  EXPECT_EQ(query_param(url, "sort"), "date:r:19700101:20240414");
  EXPECT_EQ(date_restrict_upper_bound(*query_param(url, "sort")), parse_date("2024-04-14"));
  ASSERT_EQ(results.size(), 2u);  // B is dated after the cutoff
  EXPECT_EQ(results[0].published, parse_date("2024-03-01"));
  EXPECT_FALSE(results[1].published.has_value());
}

TEST(GoogleSearch, NoCutoffMeansNoSort) {
  auto transport = std::make_shared<CaptureTransport>("{}");
  GoogleSearchProvider provider({"https://search.example/v1", "KEY", "CX", {}}, transport, nullptr);
  EXPECT_TRUE(provider.fetch({"q", std::nullopt, 8}).empty());
  EXPECT_FALSE(query_param(transport->urls[0], "sort").has_value());
}

TEST(GoogleSearch, FailuresAreProviderErrors) {
  GoogleSearchProvider bad_status({"https://s/v1", "K", "C", {}}, std::make_shared<CaptureTransport>("{}", 400),
                                  nullptr);
  EXPECT_THROW(bad_status.fetch({"q", std::nullopt, 8}), ProviderError);
  GoogleSearchProvider bad_body({"https://s/v1", "K", "C", {}}, std::make_shared<CaptureTransport>("<html>"), nullptr);
  EXPECT_THROW(bad_body.fetch({"q", std::nullopt, 8}), ProviderError);
  RetryPolicy once;
  once.max_attempts = 1;
  GoogleSearchProvider exhausted({"https://s/v1", "K", "C", once}, std::make_shared<CaptureTransport>("{}", 503),
                                 nullptr, [](std::chrono::milliseconds) {});
  EXPECT_THROW(exhausted.fetch({"q", std::nullopt, 8}), ProviderError);
}

TEST(DateRestrict, ParsesOnlyWellFormedValues) {
  EXPECT_EQ(date_restrict_upper_bound("date:r:19700101:20240414"), parse_date("2024-04-14"));
  EXPECT_FALSE(date_restrict_upper_bound("date:r:19700101").has_value());
  EXPECT_FALSE(date_restrict_upper_bound("date:r:19700101:2024041").has_value());
  EXPECT_FALSE(date_restrict_upper_bound("date").has_value());
}

}  // namespace
}  // namespace augur
