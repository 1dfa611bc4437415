#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "augur/time.hpp"

namespace augur {

using json = nlohmann::json;

enum class Category {
  economics_business,
  politics_governance,
  science_tech,
  arts_recreation,
  sports,
  security_defense,
  healthcare_biology,
  environment_energy,
  social_sciences,
  unknown,
};

/// The nine labelled categories, in canonical order (Unknown excluded).
std::span<const Category> labelled_categories();
/// Human-readable label, e.g. "Economics & Business".
std::string_view to_string(Category c);
/// Exact label match; anything else yields nullopt.
std::optional<Category> category_from_label(std::string_view label);

/// A probability in [0, 1]. Construction rejects everything else, NaN included.
class Forecast {
 public:
  explicit Forecast(double value);

  static std::optional<Forecast> make(double value) noexcept;

  double value() const noexcept { return value_; }

  friend bool operator==(const Forecast&, const Forecast&) = default;

 private:
  double value_;
};

enum class DeclineReason {
  no_number,   // answer text had no usable numeric token
  truncated,   // iteration cap hit and forced finalization failed
  backend,     // backend error aborted the run
  budget,      // context budget exceeded with compaction disabled
};

std::string_view to_string(DeclineReason r);
DeclineReason decline_reason_from_string(std::string_view s);

struct Declined {
  DeclineReason reason = DeclineReason::no_number;
  std::string detail;

  friend bool operator==(const Declined&, const Declined&) = default;
};

using MemberResult = std::variant<Forecast, Declined>;

inline bool is_declined(const MemberResult& r) { return std::holds_alternative<Declined>(r); }

enum class ResolutionFlag { excluded, pending };

struct Question {
  std::string id;
  std::string title;
  std::optional<std::string> background;
  std::optional<std::string> resolution_criteria;
  Timestamp close_time{};
  Category category = Category::unknown;
  std::optional<double> crowd_prob;
  std::optional<int> outcome;
  std::string source;
  Timestamp fetched_at{};
  std::optional<ResolutionFlag> flag;

  friend bool operator==(const Question&, const Question&) = default;
};

/// Builds a Question from a parsed key-value object, enforcing every
/// invariant. Throws ValidationError naming the first offending field.
Question validate_question(const json& raw);
json encode_question(const Question& q);
inline Question decode_question(const json& j) { return validate_question(j); }

enum class Aggregator { mean, median, sampled };

std::string_view to_string(Aggregator a);
Aggregator aggregator_from_string(std::string_view s);

struct ForecastMember {
  int member_index = 0;
  MemberResult result = Declined{};
  std::optional<double> raw_value;  // pre-clamp value, when one was parsed
  std::string transcript_ref;

  friend bool operator==(const ForecastMember&, const ForecastMember&) = default;
};

/// Per-question ensemble outcome. The constructor enforces that `declined`
/// mirrors the members and that the aggregate sits inside the member range.
class ForecastRecord {
 public:
  ForecastRecord(std::string question_id, std::vector<ForecastMember> members, Aggregator aggregator,
                 std::optional<Forecast> aggregate, std::optional<std::uint64_t> seed = std::nullopt);

  const std::string& question_id() const noexcept { return question_id_; }
  const std::vector<ForecastMember>& members() const noexcept { return members_; }
  Aggregator aggregator() const noexcept { return aggregator_; }
  const std::optional<Forecast>& aggregate() const noexcept { return aggregate_; }
  const std::optional<std::uint64_t>& seed() const noexcept { return seed_; }
  bool declined() const noexcept { return declined_; }

  /// Numeric member forecasts in member order.
  std::vector<double> member_values() const;

  friend bool operator==(const ForecastRecord&, const ForecastRecord&) = default;

 private:
  std::string question_id_;
  std::vector<ForecastMember> members_;
  Aggregator aggregator_;
  std::optional<Forecast> aggregate_;
  std::optional<std::uint64_t> seed_;
  bool declined_ = false;
};

json encode_record(const ForecastRecord& r);
ForecastRecord decode_record(const json& j);

/// One model emission and the observation that answered it. For emissions
/// that failed to parse, `action` is empty and the observation is corrective.
struct AgentStep {
  std::string emission;
  std::string thought;
  std::string action;
  std::string action_input;
  std::string observation;

  friend bool operator==(const AgentStep&, const AgentStep&) = default;
};

enum class EndKind {
  final,      // Final Answer on a normal turn
  finalized,  // iteration cap hit, forced finalization produced an answer
  truncated,  // iteration cap hit, no answer
  aborted,    // backend failure
  budget,     // context budget exceeded without compaction
};

std::string_view to_string(EndKind k);
EndKind end_kind_from_string(std::string_view s);

struct TranscriptEnd {
  EndKind kind = EndKind::final;
  std::string emission;  // final model text, empty when none was produced
  std::string answer;    // answer text (Final Answer payload)
  std::string detail;

  friend bool operator==(const TranscriptEnd&, const TranscriptEnd&) = default;
};

struct Transcript {
  std::string agent_id;
  std::string task;
  std::vector<AgentStep> steps;
  TranscriptEnd end;

  std::size_t emission_count() const noexcept {
    return steps.size() + (end.emission.empty() ? 0 : 1);
  }

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

json encode_transcript(const Transcript& t);
Transcript decode_transcript(const json& j);

/// Reads one JSON object per non-blank line. Throws FormatError with the
/// 1-based line number on malformed lines.
std::vector<json> read_json_lines(const std::filesystem::path& path);
std::vector<json> parse_json_lines(std::string_view text, const std::string& source_name);
/// Writes one compact object per line. Throws ConfigError when the file
/// cannot be written.
void write_json_lines(const std::filesystem::path& path, std::span<const json> rows);

std::vector<Question> load_questions(const std::filesystem::path& path);
void save_questions(const std::filesystem::path& path, std::span<const Question> questions);
std::vector<ForecastRecord> load_records(const std::filesystem::path& path);
void save_records(const std::filesystem::path& path, std::span<const ForecastRecord> records);

}  // namespace augur
