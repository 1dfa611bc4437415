#include "augur/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "augur/errors.hpp"

namespace augur {
namespace {

struct CategoryLabel {
  Category category;
  std::string_view label;
};

constexpr std::array<CategoryLabel, 10> kCategoryLabels = {{
    {Category::economics_business, "Economics & Business"},
    {Category::politics_governance, "Politics & Governance"},
    {Category::science_tech, "Science & Tech"},
    {Category::arts_recreation, "Arts & Recreation"},
    {Category::sports, "Sports"},
    {Category::security_defense, "Security & Defense"},
    {Category::healthcare_biology, "Healthcare & Biology"},
    {Category::environment_energy, "Environment & Energy"},
    {Category::social_sciences, "Social Sciences"},
    {Category::unknown, "Unknown"},
}};

constexpr std::array<Category, 9> kLabelled = {
    Category::economics_business, Category::politics_governance, Category::science_tech,
    Category::arts_recreation,    Category::sports,              Category::security_defense,
    Category::healthcare_biology, Category::environment_energy,  Category::social_sciences,
};

Timestamp read_time_field(const json& raw, const char* field) {
  const json& v = raw.at(field);
  if (v.is_number_integer()) {
    return from_epoch_millis(v.get<std::int64_t>());
  }
  if (!v.is_string()) {
    throw ValidationError(field, "expected an ISO-8601 string or epoch milliseconds");
  }
  try {
    return parse_timestamp(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(field, e.what());
  }
}

std::optional<std::string> read_optional_text(const json& raw, const char* field) {
  auto it = raw.find(field);
  if (it == raw.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(field, "expected a string");
  return it->get<std::string>();
}

void put_optional(json& j, const char* key, const std::optional<std::string>& v) {
  if (v) j[key] = *v;
}

json encode_member(const ForecastMember& m) {
  json j;
  j["member_index"] = m.member_index;
  if (const auto* f = std::get_if<Forecast>(&m.result)) {
    j["forecast"] = f->value();
  } else {
    const auto& d = std::get<Declined>(m.result);
    j["forecast"] = nullptr;
    j["declined"] = std::string(to_string(d.reason));
    if (!d.detail.empty()) j["detail"] = d.detail;
  }
  if (m.raw_value) j["raw_value"] = *m.raw_value;
  j["transcript_ref"] = m.transcript_ref;
  return j;
}

ForecastMember decode_member(const json& j) {
  ForecastMember m;
  m.member_index = j.at("member_index").get<int>();
  const json& f = j.at("forecast");
  if (f.is_null()) {
    Declined d;
    d.reason = decline_reason_from_string(j.value("declined", std::string("no_number")));
    d.detail = j.value("detail", std::string());
    m.result = d;
  } else {
    auto value = Forecast::make(f.get<double>());
    if (!value) throw ValidationError("forecast", "member forecast outside [0,1]");
    m.result = *value;
  }
  if (auto it = j.find("raw_value"); it != j.end() && !it->is_null()) m.raw_value = it->get<double>();
  m.transcript_ref = j.value("transcript_ref", std::string());
  return m;
}

}  // namespace

std::span<const Category> labelled_categories() { return kLabelled; }

std::string_view to_string(Category c) {
  for (const auto& entry : kCategoryLabels) {
    if (entry.category == c) return entry.label;
  }
  return "Unknown";
}

std::optional<Category> category_from_label(std::string_view label) {
  for (const auto& entry : kCategoryLabels) {
    if (entry.label == label) return entry.category;
  }
  return std::nullopt;
}

Forecast::Forecast(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError("forecast", "probability must lie in [0,1]");
  }
}

std::optional<Forecast> Forecast::make(double value) noexcept {
  if (!(value >= 0.0 && value <= 1.0)) return std::nullopt;
  return Forecast(value);
}

std::string_view to_string(DeclineReason r) {
  switch (r) {
    case DeclineReason::no_number: return "no_number";
    case DeclineReason::truncated: return "truncated";
    case DeclineReason::backend: return "backend";
    case DeclineReason::budget: return "budget";
  }
  return "no_number";
}

DeclineReason decline_reason_from_string(std::string_view s) {
  if (s == "no_number") return DeclineReason::no_number;
  if (s == "truncated") return DeclineReason::truncated;
  if (s == "backend") return DeclineReason::backend;
  if (s == "budget") return DeclineReason::budget;
  throw ValidationError("declined", "unknown decline reason '" + std::string(s) + "'");
}

Question validate_question(const json& raw) {
  if (!raw.is_object()) throw ValidationError("record", "expected a JSON object");

  Question q;
  auto id = raw.find("id");
  if (id == raw.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw ValidationError("id", "missing or empty identifier");
  }
  q.id = id->get<std::string>();

  if (auto it = raw.find("crowd_prob"); it != raw.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError("crowd_prob", "expected a number");
    const double p = it->get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("crowd_prob", "outside [0,1]");
    q.crowd_prob = p;
  }

  if (auto it = raw.find("outcome"); it != raw.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError("outcome", "expected 0 or 1");
    const double o = it->get<double>();
    if (o != 0.0 && o != 1.0) throw ValidationError("outcome", "expected 0 or 1");
    q.outcome = static_cast<int>(o);
  }

  auto title = raw.find("title");
  if (title == raw.end() || !title->is_string() || title->get<std::string>().empty()) {
    throw ValidationError("title", "missing or empty title");
  }
  q.title = title->get<std::string>();

  q.background = read_optional_text(raw, "background");
  q.resolution_criteria = read_optional_text(raw, "resolution_criteria");

  if (!raw.contains("close_time")) throw ValidationError("close_time", "missing");
  q.close_time = read_time_field(raw, "close_time");

  if (auto it = raw.find("category"); it != raw.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("category", "expected a label string");
    auto c = category_from_label(it->get<std::string>());
    if (!c) throw ValidationError("category", "unknown label '" + it->get<std::string>() + "'");
    q.category = *c;
  }

  q.source = read_optional_text(raw, "source").value_or("");

  if (raw.contains("fetched_at") && !raw.at("fetched_at").is_null()) {
    q.fetched_at = read_time_field(raw, "fetched_at");
  } else {
    q.fetched_at = q.close_time;
  }
  if (q.fetched_at > q.close_time) {
    throw ValidationError("fetched_at", "snapshot taken after close_time");
  }

  if (auto flag = read_optional_text(raw, "flag")) {
    if (*flag == "excluded") {
      q.flag = ResolutionFlag::excluded;
    } else if (*flag == "pending") {
      q.flag = ResolutionFlag::pending;
    } else {
      throw ValidationError("flag", "expected 'excluded' or 'pending'");
    }
  }
  return q;
}

json encode_question(const Question& q) {
  json j;
  j["id"] = q.id;
  j["title"] = q.title;
  put_optional(j, "background", q.background);
  put_optional(j, "resolution_criteria", q.resolution_criteria);
  j["close_time"] = format_timestamp(q.close_time);
  j["category"] = std::string(to_string(q.category));
  if (q.crowd_prob) j["crowd_prob"] = *q.crowd_prob;
  if (q.outcome) j["outcome"] = *q.outcome;
  j["source"] = q.source;
  j["fetched_at"] = format_timestamp(q.fetched_at);
  if (q.flag) j["flag"] = *q.flag == ResolutionFlag::excluded ? "excluded" : "pending";
  return j;
}

std::string_view to_string(Aggregator a) {
  switch (a) {
    case Aggregator::mean: return "mean";
    case Aggregator::median: return "median";
    case Aggregator::sampled: return "sampled";
  }
  return "median";
}

Aggregator aggregator_from_string(std::string_view s) {
  if (s == "mean") return Aggregator::mean;
  if (s == "median") return Aggregator::median;
  if (s == "sampled") return Aggregator::sampled;
  throw ValidationError("aggregator", "expected mean, median or sampled, got '" + std::string(s) + "'");
}

ForecastRecord::ForecastRecord(std::string question_id, std::vector<ForecastMember> members,
                               Aggregator aggregator, std::optional<Forecast> aggregate,
                               std::optional<std::uint64_t> seed)
    : question_id_(std::move(question_id)),
      members_(std::move(members)),
      aggregator_(aggregator),
      aggregate_(aggregate),
      seed_(seed) {
  if (question_id_.empty()) throw ValidationError("question_id", "empty identifier");
  if (members_.empty()) throw ValidationError("members", "record has no members");

  std::set<int> seen;
  for (const auto& m : members_) {
    if (!seen.insert(m.member_index).second) {
      throw ValidationError("members", "duplicate member_index " + std::to_string(m.member_index));
    }
  }

  declined_ = std::any_of(members_.begin(), members_.end(),
                          [](const ForecastMember& m) { return is_declined(m.result); });
  if (declined_ && aggregate_) {
    throw ValidationError("aggregate", "declined records carry no aggregate");
  }
  if (!declined_ && !aggregate_) {
    throw ValidationError("aggregate", "missing aggregate on a fully numeric record");
  }
  if (aggregate_) {
    const auto values = member_values();
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (aggregate_->value() < *lo || aggregate_->value() > *hi) {
      throw ValidationError("aggregate", "aggregate outside the member range");
    }
  }
}

std::vector<double> ForecastRecord::member_values() const {
  std::vector<double> values;
  values.reserve(members_.size());
  for (const auto& m : members_) {
    if (const auto* f = std::get_if<Forecast>(&m.result)) values.push_back(f->value());
  }
  return values;
}

json encode_record(const ForecastRecord& r) {
  json j;
  j["question_id"] = r.question_id();
  j["members"] = json::array();
  for (const auto& m : r.members()) j["members"].push_back(encode_member(m));
  j["aggregate"] = r.aggregate() ? json(r.aggregate()->value()) : json(nullptr);
  j["aggregator"] = std::string(to_string(r.aggregator()));
  j["declined"] = r.declined();
  if (r.seed()) j["seed"] = *r.seed();
  return j;
}

ForecastRecord decode_record(const json& j) {
  if (!j.is_object()) throw ValidationError("record", "expected a JSON object");
  std::vector<ForecastMember> members;
  for (const auto& m : j.at("members")) members.push_back(decode_member(m));
  std::optional<Forecast> aggregate;
  if (auto it = j.find("aggregate"); it != j.end() && !it->is_null()) {
    aggregate = Forecast::make(it->get<double>());
    if (!aggregate) throw ValidationError("aggregate", "outside [0,1]");
  }
  std::optional<std::uint64_t> seed;
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) seed = it->get<std::uint64_t>();
  ForecastRecord record(j.at("question_id").get<std::string>(), std::move(members),
                        aggregator_from_string(j.at("aggregator").get<std::string>()), aggregate, seed);
  if (auto it = j.find("declined"); it != j.end() && it->get<bool>() != record.declined()) {
    throw ValidationError("declined", "flag disagrees with members");
  }
  return record;
}

std::string_view to_string(EndKind k) {
  switch (k) {
    case EndKind::final: return "final";
    case EndKind::finalized: return "finalized";
    case EndKind::truncated: return "truncated";
    case EndKind::aborted: return "aborted";
    case EndKind::budget: return "budget";
  }
  return "final";
}

EndKind end_kind_from_string(std::string_view s) {
  if (s == "final") return EndKind::final;
  if (s == "finalized") return EndKind::finalized;
  if (s == "truncated") return EndKind::truncated;
  if (s == "aborted") return EndKind::aborted;
  if (s == "budget") return EndKind::budget;
  throw ValidationError("end", "unknown transcript end '" + std::string(s) + "'");
}

json encode_transcript(const Transcript& t) {
  json j;
  j["agent_id"] = t.agent_id;
  j["task"] = t.task;
  j["steps"] = json::array();
  for (const auto& s : t.steps) {
    j["steps"].push_back({{"emission", s.emission},
                          {"thought", s.thought},
                          {"action", s.action},
                          {"action_input", s.action_input},
                          {"observation", s.observation}});
  }
  j["end"] = {{"kind", std::string(to_string(t.end.kind))},
              {"emission", t.end.emission},
              {"answer", t.end.answer},
              {"detail", t.end.detail}};
  return j;
}

Transcript decode_transcript(const json& j) {
  Transcript t;
  t.agent_id = j.at("agent_id").get<std::string>();
  t.task = j.at("task").get<std::string>();
  for (const auto& s : j.at("steps")) {
    t.steps.push_back({s.at("emission").get<std::string>(), s.at("thought").get<std::string>(),
                       s.at("action").get<std::string>(), s.at("action_input").get<std::string>(),
                       s.at("observation").get<std::string>()});
  }
  const json& e = j.at("end");
  t.end.kind = end_kind_from_string(e.at("kind").get<std::string>());
  t.end.emission = e.at("emission").get<std::string>();
  t.end.answer = e.at("answer").get<std::string>();
  t.end.detail = e.at("detail").get<std::string>();
  return t;
}

std::vector<json> parse_json_lines(std::string_view text, const std::string& source_name) {
  std::vector<json> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      json row = json::parse(line, nullptr, false);
      if (row.is_discarded() || !row.is_object()) {
        throw FormatError(source_name, line_no, "not a JSON object");
      }
      rows.push_back(std::move(row));
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return rows;
}

std::vector<json> read_json_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_json_lines(buffer.str(), path.string());
}

void write_json_lines(const std::filesystem::path& path, std::span<const json> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& row : rows) out << row.dump() << '\n';
  out.flush();
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::vector<Question> load_questions(const std::filesystem::path& path) {
  std::vector<Question> out;
  std::size_t index = 0;
  for (const auto& row : read_json_lines(path)) {
    ++index;
    try {
      out.push_back(validate_question(row));
    } catch (const ValidationError& e) {
      throw FormatError(path.string(), index, e.what());
    }
  }
  return out;
}

void save_questions(const std::filesystem::path& path, std::span<const Question> questions) {
  std::vector<json> rows;
  rows.reserve(questions.size());
  for (const auto& q : questions) rows.push_back(encode_question(q));
  write_json_lines(path, rows);
}

std::vector<ForecastRecord> load_records(const std::filesystem::path& path) {
  std::vector<ForecastRecord> out;
  std::size_t index = 0;
  for (const auto& row : read_json_lines(path)) {
    ++index;
    try {
      out.push_back(decode_record(row));
    } catch (const std::exception& e) {
      throw FormatError(path.string(), index, e.what());
    }
  }
  return out;
}

void save_records(const std::filesystem::path& path, std::span<const ForecastRecord> records) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(encode_record(r));
  write_json_lines(path, rows);
}

}  // namespace augur
