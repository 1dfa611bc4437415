#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "augur/domain.hpp"
#include "augur/http.hpp"
#include "augur/llm.hpp"
#include "augur/rate_limiter.hpp"
#include "augur/retry.hpp"
#include "augur/time.hpp"

namespace augur {

enum class Resolution { yes, no, other };

struct MarketRecord {
  std::string market_id;
  std::string question_text;
  Timestamp close_time{};
  double probability = 0.0;
  bool is_resolved = false;
  std::optional<Resolution> resolution;  // present iff is_resolved
  std::string resolution_text;           // the source's own label, e.g. "CANCEL"
  json raw;
};

/// Parses one market payload. Returns nullopt for non-binary markets; throws
/// ValidationError when a required field is missing or mistyped.
std::optional<MarketRecord> parse_market(const json& payload);

struct MarketPage {
  std::vector<json> markets;
  std::optional<std::string> next_token;
};

/// List and detail endpoints of a prediction-market API.
class MarketClient {
 public:
  virtual ~MarketClient() = default;
  /// Throws ProviderError on transport failures.
  virtual MarketPage list(const std::optional<std::string>& page_token) = 0;
  /// Throws ProviderError when the market is unknown or unreachable.
  virtual json detail(const std::string& market_id) = 0;
};

struct ManifoldOptions {
  std::string base_url = "https://api.manifold.markets";
  int page_size = 1000;
  RetryPolicy retry;
};

/// `GET /v0/markets?limit=N&before=<id>` pages and `GET /v0/market/<id>`.
/// A short page ends pagination; otherwise the last id is the next token.
class ManifoldClient final : public MarketClient {
 public:
  ManifoldClient(ManifoldOptions options, std::shared_ptr<HttpTransport> transport,
                 std::shared_ptr<RateLimiter> limiter, Sleeper sleep = thread_sleeper());

  MarketPage list(const std::optional<std::string>& page_token) override;
  json detail(const std::string& market_id) override;

 private:
  json get(const std::string& url);

  ManifoldOptions options_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<RateLimiter> limiter_;
  Sleeper sleep_;
};

/// In-memory markets served with the same paging contract.
class FixtureMarketClient final : public MarketClient {
 public:
  FixtureMarketClient(std::vector<json> markets, std::size_t page_size = 1000);
  FixtureMarketClient(FixtureMarketClient&& other) noexcept
      : markets_(std::move(other.markets_)),
        page_size_(other.page_size_),
        page_requests_(std::move(other.page_requests_)) {}
  /// A JSON array of market payloads, or one payload per line.
  static FixtureMarketClient load(const std::filesystem::path& path, std::size_t page_size = 1000);

  MarketPage list(const std::optional<std::string>& page_token) override;
  json detail(const std::string& market_id) override;

  /// Page tokens received, in order (nullopt for the first page).
  std::vector<std::optional<std::string>> page_requests() const;
  /// Replaces a market payload; used to simulate resolution after close.
  void update(const json& market);

 private:
  std::vector<json> markets_;
  std::size_t page_size_;
  mutable std::mutex mutex_;
  std::vector<std::optional<std::string>> page_requests_;
};

/// Binary markets closing on a day in [from, to], deduplicated by id.
/// Malformed payloads are skipped and described in `warnings`.
std::vector<MarketRecord> fetch_window(MarketClient& client, Date from, Date to,
                                       std::vector<std::string>* warnings = nullptr);

enum class Verdict { keep, drop };

std::string_view to_string(Verdict v);

struct FilterVerdict {
  Verdict verdict = Verdict::drop;
  std::string judge_reply;
  std::string note;  // set when the verdict came from a retry or a failure
};

inline constexpr std::string_view kDefaultFilterModel = "gpt-4";
inline constexpr std::string_view kDefaultCategoryModel = "gpt-3.5-turbo";

std::string filter_prompt(std::string_view question);
/// First word of the reply, case-folded, punctuation stripped.
std::string normalize_judge_reply(std::string_view reply);

/// Keep iff the judge answers yes. Any other reply gets one retry before
/// Drop. Backend failures Drop with a note; AuthError propagates.
FilterVerdict llm_filter(Backend& backend, std::string_view question,
                         const std::string& model_id = std::string(kDefaultFilterModel));

std::string category_prompt(std::string_view question);
/// One of the nine labels, or Unknown on any other reply or backend failure.
Category classify_category(Backend& backend, std::string_view question,
                           const std::string& model_id = std::string(kDefaultCategoryModel));

/// Markdown table of counts per category in canonical order, Unknown last,
/// with percentages and a total row.
std::string render_category_table(std::span<const Question> questions);

/// Questions with crowd_prob from the market price and fetched_at = `at`,
/// outcome absent. Markets already closed at `at` are skipped.
std::vector<Question> snapshot(std::span<const MarketRecord> records, Timestamp at,
                               const std::map<std::string, Category>& categories = {});

struct BackfillSummary {
  std::size_t resolved = 0;
  std::size_t excluded = 0;
  std::size_t pending = 0;
};

/// YES/NO set the outcome; other resolutions flag the question excluded;
/// unresolved markets are flagged pending. Nothing else changes.
BackfillSummary backfill_resolutions(MarketClient& client, std::vector<Question>& dataset);

}  // namespace augur
