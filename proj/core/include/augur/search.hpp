#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augur/http.hpp"
#include "augur/rate_limiter.hpp"
#include "augur/retry.hpp"
#include "augur/time.hpp"

namespace augur {

struct SearchResult {
  std::string title;
  std::string url;
  std::string snippet;
  std::optional<Date> published;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

struct SearchRequest {
  std::string query;
  /// Results must predate this day. Providers translate it into their own
  /// date-range parameter.
  std::optional<Date> before_date;
  int max_results = 8;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  /// Throws ProviderError on transport or quota failures.
  virtual std::vector<SearchResult> fetch(const SearchRequest& request) = 0;
};

inline constexpr int kDefaultSearchResults = 8;

/// Issues a date-restricted query, then drops any result whose known
/// publication date is on or after `before_date`. Undated results are kept.
/// Returns at most `max_results`. Throws std::invalid_argument on an empty
/// query.
std::vector<SearchResult> search(SearchProvider& provider, std::string_view query,
                                 std::optional<Date> before_date, int max_results = kDefaultSearchResults);

/// Canned results from a line-delimited file. Each line holds
/// `{"match": ..., "title": ..., "url": ..., "snippet": ..., "published": "YYYY-MM-DD"}`;
/// a line applies when its `match` is a case-insensitive substring of the
/// query, or is "*". File order is preserved.
class FixtureSearchProvider final : public SearchProvider {
 public:
  struct Entry {
    std::string match;
    SearchResult result;
  };

  explicit FixtureSearchProvider(std::vector<Entry> entries) : entries_(std::move(entries)) {}
  FixtureSearchProvider(FixtureSearchProvider&& other) noexcept
      : entries_(std::move(other.entries_)), requests_(std::move(other.requests_)) {}
  static FixtureSearchProvider load(const std::filesystem::path& path);

  std::vector<SearchResult> fetch(const SearchRequest& request) override;

  /// Every request received so far.
  std::vector<SearchRequest> requests() const;

 private:
  std::vector<Entry> entries_;
  mutable std::mutex mutex_;
  std::vector<SearchRequest> requests_;
};

struct GoogleSearchOptions {
  std::string base_url = "https://www.googleapis.com/customsearch/v1";
  std::string api_key;
  std::string engine_id;
  RetryPolicy retry;
};

/// Programmable Search JSON API adapter. The cutoff becomes
/// `sort=date:r:19700101:<day before cutoff>`.
class GoogleSearchProvider final : public SearchProvider {
 public:
  GoogleSearchProvider(GoogleSearchOptions options, std::shared_ptr<HttpTransport> transport,
                       std::shared_ptr<RateLimiter> limiter, Sleeper sleep = thread_sleeper());

  std::vector<SearchResult> fetch(const SearchRequest& request) override;

  /// The URL that `fetch` would send for `request`.
  std::string request_url(const SearchRequest& request) const;

 private:
  GoogleSearchOptions options_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<RateLimiter> limiter_;
  Sleeper sleep_;
};

/// Extracts the inclusive upper bound of a `date:r:FROM:TO` sort value.
std::optional<Date> date_restrict_upper_bound(std::string_view sort_value);

}  // namespace augur
