#include "augur/market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "augur/errors.hpp"

namespace augur {
namespace {

const json& require(const json& payload, const char* key) {
  const auto it = payload.find(key);
  if (it == payload.end() || it->is_null()) throw ValidationError(key, "missing");
  return *it;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\"'`*");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"'`*.");
  return std::string(s.substr(b, e - b + 1));
}

std::string ask(Backend& backend, const std::string& model_id, std::string prompt) {
  ChatRequest request;
  request.model_id = model_id;
  request.temperature = 0.0;
  request.messages.push_back({Role::user, std::move(prompt)});
  return complete(backend, request).content;
}

}  // namespace

std::optional<MarketRecord> parse_market(const json& payload) {
  if (!payload.is_object()) throw ValidationError("market", "expected a JSON object");
  const json& type = require(payload, "outcomeType");
  if (!type.is_string()) throw ValidationError("outcomeType", "expected a string");
  if (type.get<std::string>() != "BINARY") return std::nullopt;

  MarketRecord r;
  const json& id = require(payload, "id");
  if (!id.is_string() || id.get<std::string>().empty()) throw ValidationError("id", "expected a non-empty string");
  r.market_id = id.get<std::string>();
  const json& question = require(payload, "question");
  if (!question.is_string()) throw ValidationError("question", "expected a string");
  r.question_text = question.get<std::string>();
  const json& close = require(payload, "closeTime");
  if (!close.is_number()) throw ValidationError("closeTime", "expected epoch milliseconds");
  r.close_time = from_epoch_millis(close.get<std::int64_t>());
  const json& prob = require(payload, "probability");
  if (!prob.is_number()) throw ValidationError("probability", "expected a number");
  r.probability = prob.get<double>();
  if (!(r.probability >= 0.0 && r.probability <= 1.0)) throw ValidationError("probability", "outside [0,1]");
  r.is_resolved = payload.value("isResolved", false);
  if (r.is_resolved) {
    const json& res = require(payload, "resolution");
    if (!res.is_string()) throw ValidationError("resolution", "expected a string");
    r.resolution_text = res.get<std::string>();
    if (r.resolution_text == "YES") {
      r.resolution = Resolution::yes;
    } else if (r.resolution_text == "NO") {
      r.resolution = Resolution::no;
    } else {
      r.resolution = Resolution::other;
    }
  }
  r.raw = payload;
  return r;
}

ManifoldClient::ManifoldClient(ManifoldOptions options, std::shared_ptr<HttpTransport> transport,
                               std::shared_ptr<RateLimiter> limiter, Sleeper sleep)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      limiter_(std::move(limiter)),
      sleep_(std::move(sleep)) {
  if (!transport_) throw ConfigError("market client needs a transport");
  if (options_.page_size < 1) throw ConfigError("page size must be positive");
  while (!options_.base_url.empty() && options_.base_url.back() == '/') options_.base_url.pop_back();
}

json ManifoldClient::get(const std::string& url) {
  if (limiter_) limiter_->acquire();
  HttpResponse response;
  try {
    response = send_with_retry(*transport_, {"GET", url, {{"Accept", "application/json"}}, {}}, options_.retry, sleep_);
  } catch (const BackendError& e) {
    throw ProviderError(std::string("market API: ") + e.what());
  }
  if (response.status < 200 || response.status >= 300) {
    throw ProviderError("market API returned HTTP " + std::to_string(response.status) + " for " + url);
  }
  try {
    return json::parse(response.body);
  } catch (const json::parse_error& e) {
    throw ProviderError(std::string("market API sent invalid JSON: ") + e.what());
  }
}

MarketPage ManifoldClient::list(const std::optional<std::string>& page_token) {
  std::string url = options_.base_url + "/v0/markets?limit=" + std::to_string(options_.page_size);
  if (page_token) url += "&before=" + url_encode(*page_token);
  json body = get(url);
  if (!body.is_array()) throw ProviderError("market list is not an array");
  MarketPage page;
  page.markets = body.get<std::vector<json>>();
  if (page.markets.size() == static_cast<std::size_t>(options_.page_size)) {
    const json& last = page.markets.back();
    if (last.contains("id") && last["id"].is_string()) page.next_token = last["id"].get<std::string>();
  }
  return page;
}

json ManifoldClient::detail(const std::string& market_id) {
  return get(options_.base_url + "/v0/market/" + url_encode(market_id));
}

FixtureMarketClient::FixtureMarketClient(std::vector<json> markets, std::size_t page_size)
    : markets_(std::move(markets)), page_size_(page_size) {
  if (page_size_ == 0) throw ConfigError("page size must be positive");
}

FixtureMarketClient FixtureMarketClient::load(const std::filesystem::path& path, std::size_t page_size) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open market fixture " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      return FixtureMarketClient(json::parse(text).get<std::vector<json>>(), page_size);
    } catch (const json::exception& e) {
      throw FormatError(path.string(), 1, e.what());
    }
  }
  return FixtureMarketClient(parse_json_lines(text, path.string()), page_size);
}

MarketPage FixtureMarketClient::list(const std::optional<std::string>& page_token) {
  std::lock_guard lock(mutex_);
  page_requests_.push_back(page_token);
  std::size_t start = 0;
  if (page_token) {
    const auto it = std::find_if(markets_.begin(), markets_.end(),
                                 [&](const json& m) { return m.value("id", "") == *page_token; });
    if (it == markets_.end()) throw ProviderError("unknown page token " + *page_token);
    start = static_cast<std::size_t>(it - markets_.begin()) + 1;
  }
  MarketPage page;
  const std::size_t end = std::min(markets_.size(), start + page_size_);
  page.markets.assign(markets_.begin() + static_cast<std::ptrdiff_t>(start),
                      markets_.begin() + static_cast<std::ptrdiff_t>(end));
  if (page.markets.size() == page_size_) page.next_token = page.markets.back().value("id", "");
  return page;
}

json FixtureMarketClient::detail(const std::string& market_id) {
  std::lock_guard lock(mutex_);
  for (const auto& m : markets_) {
    if (m.value("id", "") == market_id) return m;
  }
  throw ProviderError("unknown market " + market_id);
}

std::vector<std::optional<std::string>> FixtureMarketClient::page_requests() const {
  std::lock_guard lock(mutex_);
  return page_requests_;
}

void FixtureMarketClient::update(const json& market) {
  std::lock_guard lock(mutex_);
  for (auto& m : markets_) {
    if (m.value("id", "") == market.value("id", "")) {
      m = market;
      return;
    }
  }
  markets_.push_back(market);
}

std::vector<MarketRecord> fetch_window(MarketClient& client, Date from, Date to, std::vector<std::string>* warnings) {
  if (from > to) throw ConfigError("window start " + format_date(from) + " is after its end " + format_date(to));
  std::vector<MarketRecord> out;
  std::set<std::string> seen;
  std::optional<std::string> token;
  std::set<std::string> tokens_seen;
  do {
    MarketPage page = client.list(token);
    for (const auto& payload : page.markets) {
      std::optional<MarketRecord> record;
      try {
        record = parse_market(payload);
      } catch (const ValidationError& e) {
        if (warnings) warnings->push_back("skipped market " + payload.value("id", std::string("?")) + ": " + e.what());
        continue;
      }
      if (!record) continue;
      const Date day = date_of(record->close_time);
      if (day < from || day > to) continue;
      if (!seen.insert(record->market_id).second) continue;
      out.push_back(std::move(*record));
    }
    token = page.next_token;
    if (token && !tokens_seen.insert(*token).second) {
      throw ProviderError("market API repeated page token " + *token);
    }
  } while (token);
  return out;
}

std::string_view to_string(Verdict v) { return v == Verdict::keep ? "keep" : "drop"; }

std::string filter_prompt(std::string_view question) {
  std::string prompt =
      "You screen questions for a forecasting benchmark. Reply \"Yes\" only if both hold:\n"
      "(1) the question can be answered with a plain yes or no, and\n"
      "(2) it asks about an event in the outside world as most people asking or answering it would understand "
      "it, not about the market itself, its creator, or a personal matter.\n"
      "Otherwise reply \"No\". Reply with one word.\n\nQuestion: ";
  prompt += question;
  return prompt;
}

std::string normalize_judge_reply(std::string_view reply) {
  const auto b = reply.find_first_not_of(" \t\r\n\"'`*");
  if (b == std::string_view::npos) return {};
  std::string word;
  for (std::size_t i = b; i < reply.size() && std::isalpha(static_cast<unsigned char>(reply[i])); ++i) {
    word += static_cast<char>(std::tolower(static_cast<unsigned char>(reply[i])));
  }
  return word;
}

FilterVerdict llm_filter(Backend& backend, std::string_view question, const std::string& model_id) {
  FilterVerdict verdict;
  const std::string prompt = filter_prompt(question);
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      // The retry differs from the first request so replay can tell them apart.
      verdict.judge_reply = ask(backend, model_id, attempt == 0 ? prompt : prompt + "\n\nAnswer Yes or No.");
    } catch (const AuthError&) {
      throw;
    } catch (const BackendError& e) {
      verdict.verdict = Verdict::drop;
      verdict.note = std::string("backend: ") + e.what();
      return verdict;
    }
    const std::string word = normalize_judge_reply(verdict.judge_reply);
    if (word == "yes" || word == "no") {
      verdict.verdict = word == "yes" ? Verdict::keep : Verdict::drop;
      if (attempt > 0) verdict.note = "answered on retry";
      return verdict;
    }
  }
  verdict.verdict = Verdict::drop;
  verdict.note = "unrecognized judge reply after retry";
  return verdict;
}

std::string category_prompt(std::string_view question) {
  std::string prompt = "Assign the question to exactly one category. Reply with the category name only.\n\nCategories:\n";
  for (Category c : labelled_categories()) {
    prompt += "- ";
    prompt += to_string(c);
    prompt += '\n';
  }
  prompt += "\nQuestion: ";
  prompt += question;
  return prompt;
}

Category classify_category(Backend& backend, std::string_view question, const std::string& model_id) {
  std::string reply;
  try {
    reply = ask(backend, model_id, category_prompt(question));
  } catch (const AuthError&) {
    throw;
  } catch (const BackendError&) {
    return Category::unknown;
  }
  const std::string cleaned = lower(trim_copy(reply));
  for (Category c : labelled_categories()) {
    if (lower(to_string(c)) == cleaned) return c;
  }
  return Category::unknown;
}

std::string render_category_table(std::span<const Question> questions) {
  std::map<Category, std::size_t> counts;
  for (const auto& q : questions) ++counts[q.category];
  const double total = static_cast<double>(questions.size());
  std::ostringstream out;
  out << "| Category | Count | Share % |\n|---|---:|---:|\n";
  auto row = [&](std::string_view label, std::size_t n) {
    char share[32];
    std::snprintf(share, sizeof share, "%.1f", total > 0 ? 100.0 * static_cast<double>(n) / total : 0.0);
    out << "| " << label << " | " << n << " | " << share << " |\n";
  };
  for (Category c : labelled_categories()) row(to_string(c), counts[c]);
  if (counts[Category::unknown] > 0) row(to_string(Category::unknown), counts[Category::unknown]);
  row("Total", questions.size());
  return out.str();
}

std::vector<Question> snapshot(std::span<const MarketRecord> records, Timestamp at,
                               const std::map<std::string, Category>& categories) {
  std::vector<Question> out;
  for (const auto& r : records) {
    if (r.close_time < at) continue;
    Question q;
    q.id = r.market_id;
    q.title = r.question_text;
    if (r.raw.contains("textDescription") && r.raw["textDescription"].is_string() &&
        !r.raw["textDescription"].get<std::string>().empty()) {
      q.background = r.raw["textDescription"].get<std::string>();
    }
    q.close_time = r.close_time;
    const auto it = categories.find(r.market_id);
    q.category = it == categories.end() ? Category::unknown : it->second;
    q.crowd_prob = r.probability;
    q.source = "manifold";
    q.fetched_at = at;
    out.push_back(std::move(q));
  }
  return out;
}

BackfillSummary backfill_resolutions(MarketClient& client, std::vector<Question>& dataset) {
  BackfillSummary summary;
  for (auto& q : dataset) {
    const auto record = parse_market(client.detail(q.id));
    if (!record || !record->is_resolved) {
      q.flag = ResolutionFlag::pending;
      ++summary.pending;
      continue;
    }
    switch (*record->resolution) {
      case Resolution::yes:
      case Resolution::no:
        q.outcome = *record->resolution == Resolution::yes ? 1 : 0;
        q.flag.reset();
        ++summary.resolved;
        break;
      case Resolution::other:
        q.outcome.reset();
        q.flag = ResolutionFlag::excluded;
        ++summary.excluded;
        break;
    }
  }
  return summary;
}

}  // namespace augur
