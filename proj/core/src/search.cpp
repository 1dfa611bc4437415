#include "augur/search.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "augur/domain.hpp"
#include "augur/errors.hpp"

namespace augur {
namespace {

std::string fold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string compact_date(Date d) {
  std::string s = format_date(d);
  s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
  return s;
}

std::optional<Date> parse_compact_date(std::string_view s) {
  if (s.size() != 8 || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::nullopt;
  }
  try {
    return parse_date(std::string(s.substr(0, 4)) + "-" + std::string(s.substr(4, 2)) + "-" +
                      std::string(s.substr(6, 2)));
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::optional<Date> published_from_item(const json& item) {
  auto pagemap = item.find("pagemap");
  if (pagemap == item.end() || !pagemap->contains("metatags")) return std::nullopt;
  for (const auto& tags : (*pagemap)["metatags"]) {
    for (const char* key : {"article:published_time", "og:published_time", "date"}) {
      if (tags.contains(key) && tags[key].is_string()) {
        try {
          return date_of(parse_timestamp(tags[key].get<std::string>().substr(0, 10)));
        } catch (const std::exception&) {
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<SearchResult> search(SearchProvider& provider, std::string_view query, std::optional<Date> before_date,
                                 int max_results) {
  const auto first = query.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw std::invalid_argument("search query is empty");
  SearchRequest request{std::string(query), before_date, max_results};
  std::vector<SearchResult> results = provider.fetch(request);
  if (before_date) {
    std::erase_if(results, [&](const SearchResult& r) { return r.published && *r.published >= *before_date; });
  }
  if (max_results >= 0 && results.size() > static_cast<std::size_t>(max_results)) {
    results.resize(static_cast<std::size_t>(max_results));
  }
  return results;
}

FixtureSearchProvider FixtureSearchProvider::load(const std::filesystem::path& path) {
  std::vector<Entry> entries;
  std::size_t line = 0;
  for (const auto& row : read_json_lines(path)) {
    ++line;
    try {
      Entry e;
      e.match = row.value("match", std::string("*"));
      e.result.title = row.value("title", std::string());
      e.result.url = row.value("url", std::string());
      e.result.snippet = row.at("snippet").get<std::string>();
      if (auto it = row.find("published"); it != row.end() && !it->is_null()) {
        e.result.published = parse_date(it->get<std::string>());
      }
      entries.push_back(std::move(e));
    } catch (const std::exception& e) {
      throw FormatError(path.string(), line, e.what());
    }
  }
  return FixtureSearchProvider(std::move(entries));
}

std::vector<SearchResult> FixtureSearchProvider::fetch(const SearchRequest& request) {
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
  }
  const std::string query = fold(request.query);
  std::vector<SearchResult> out;
  for (const auto& e : entries_) {
    if (e.match == "*" || query.find(fold(e.match)) != std::string::npos) out.push_back(e.result);
  }
  return out;
}

std::vector<SearchRequest> FixtureSearchProvider::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

GoogleSearchProvider::GoogleSearchProvider(GoogleSearchOptions options, std::shared_ptr<HttpTransport> transport,
                                           std::shared_ptr<RateLimiter> limiter, Sleeper sleep)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      limiter_(std::move(limiter)),
      sleep_(std::move(sleep)) {
  if (!transport_) throw ConfigError("search provider needs a transport");
}

std::string GoogleSearchProvider::request_url(const SearchRequest& request) const {
  std::string url = options_.base_url + "?key=" + url_encode(options_.api_key) + "&cx=" +
                    url_encode(options_.engine_id) + "&q=" + url_encode(request.query) +
                    "&num=" + std::to_string(std::clamp(request.max_results, 1, 10));
  if (request.before_date) {
    const Date last_allowed = *request.before_date - std::chrono::days{1};
    url += "&sort=" + url_encode("date:r:19700101:" + compact_date(last_allowed));
  }
  return url;
}

std::vector<SearchResult> GoogleSearchProvider::fetch(const SearchRequest& request) {
  if (limiter_) limiter_->acquire();
  HttpRequest http;
  http.method = "GET";
  http.url = request_url(request);
  HttpResponse response;
  try {
    response = send_with_retry(*transport_, http, options_.retry, sleep_);
  } catch (const BackendError& e) {
    throw ProviderError(std::string("search request failed: ") + e.what());
  }
  if (response.status < 200 || response.status >= 300) {
    throw ProviderError("search provider returned HTTP " + std::to_string(response.status));
  }
  const json body = json::parse(response.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw ProviderError("search provider returned a non-JSON body");
  std::vector<SearchResult> results;
  if (!body.contains("items")) return results;
  for (const auto& item : body["items"]) {
    SearchResult r;
    r.title = item.value("title", std::string());
    r.url = item.value("link", std::string());
    r.snippet = item.value("snippet", std::string());
    r.published = published_from_item(item);
    results.push_back(std::move(r));
  }
  return results;
}

std::optional<Date> date_restrict_upper_bound(std::string_view sort_value) {
  constexpr std::string_view prefix = "date:r:";
  if (sort_value.substr(0, prefix.size()) != prefix) return std::nullopt;
  sort_value.remove_prefix(prefix.size());
  const auto colon = sort_value.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  return parse_compact_date(sort_value.substr(colon + 1));
}

}  // namespace augur
