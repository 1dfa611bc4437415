#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "augur/domain.hpp"
#include "augur/hierarchy.hpp"
#include "augur/llm.hpp"
#include "augur/market.hpp"
#include "augur/metrics.hpp"

namespace augur {

struct RunConfig {
  Date cutoff{};
  int ensemble_size = 3;
  Aggregator aggregator = Aggregator::median;
  double temperature = kDefaultTemperature;
  std::size_t bins = kDefaultBins;
  int workers = 4;
  std::uint64_t seed = 0;
  std::string model_id = "gpt-4o";
  bool single_agent = false;
  int planner_iterations = 10;
  int subagent_iterations = 5;
  std::size_t context_limit_tokens = BudgetPolicy{}.limit_tokens;

  /// Throws ConfigError on non-positive sizes or a cutoff after `today`.
  void validate(Date today) const;

  /// Keys missing from `j` keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const json& j);
  json to_json() const;
};

enum class QuestionStatus { forecasted, declined, error };

std::string_view to_string(QuestionStatus s);
QuestionStatus question_status_from_string(std::string_view s);

struct ManifestEntry {
  std::string question_id;
  QuestionStatus status = QuestionStatus::error;
  std::string detail;
  TokenUsage usage;
};

struct RunManifest {
  json config;
  std::string code_version;
  std::vector<ManifestEntry> questions;  // dataset order
  TokenUsage totals;
  std::string started_at;
  std::string finished_at;
  double wall_seconds = 0.0;

  const ManifestEntry* find(std::string_view question_id) const;
};

json encode_manifest(const RunManifest& m);
RunManifest decode_manifest(const json& j);
/// nullopt when the file does not exist.
std::optional<RunManifest> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const RunManifest& m);

/// Runs one ensemble member. `session` is unique per (question, member).
using MemberForecaster = std::function<ForecastOutcome(const Question& q, int member, const std::string& session)>;

/// Builds the default planner (or the single agent when
/// `config.single_agent`) over the given search provider and sandbox.
MemberForecaster make_member_forecaster(const RunConfig& config, Backend& backend, SearchProvider& search,
                                        const Sandbox* sandbox);

struct ForecastRunPaths {
  std::filesystem::path out_dir;

  std::filesystem::path records() const { return out_dir / "records.jsonl"; }
  std::filesystem::path manifest() const { return out_dir / "manifest.json"; }
  std::filesystem::path transcripts() const { return out_dir / "transcripts"; }
};

struct ForecastRunResult {
  std::vector<ForecastRecord> records;  // dataset order
  RunManifest manifest;
  std::vector<std::string> computed;    // question ids run in this invocation
};

/// Forecasts every question not already finished in the manifest at
/// `paths`. Questions run concurrently on `config.workers` threads; records,
/// transcripts and the manifest are rewritten as each question completes.
/// Per-question failures are recorded as status error. AuthError stops
/// the run and propagates.
ForecastRunResult run_forecasts(std::span<const Question> dataset, const RunConfig& config,
                                const MemberForecaster& forecaster, const ForecastRunPaths& paths);

/// Builds the record for one question. Any declined member declines the
/// record; otherwise the aggregate follows `config`.
ForecastRecord make_record(const Question& q, const RunConfig& config, const std::vector<ForecastOutcome>& members,
                           const std::vector<std::string>& transcript_refs);

struct CurateResult {
  std::vector<Question> kept;
  std::size_t dropped = 0;
  std::vector<json> audit;  // one row per filtered market
  std::vector<std::string> warnings;
};

struct CurateOptions {
  Date from{};
  Date to{};
  Timestamp at{};
  std::string filter_model = std::string(kDefaultFilterModel);
  std::string category_model = std::string(kDefaultCategoryModel);
};

/// fetch_window, llm_filter, classify_category on kept markets, snapshot.
CurateResult curate(MarketClient& client, Backend& judge, const CurateOptions& options);

struct MethodInput {
  std::string label;
  std::vector<ForecastRecord> records;
};

struct MethodScore {
  std::string label;
  std::size_t n = 0;
  double brier = 0.0;
  double accuracy = 0.0;
  std::optional<double> stdev;  // absent for single-member or non-ensemble methods
  std::optional<CalibrationReport> calibration;  // absent when n < bins
};

struct ScoreReport {
  std::vector<MethodScore> methods;  // input order, Crowd last
  std::set<std::string> dropped;
  std::size_t unresolved = 0;
  std::size_t bins = kDefaultBins;
};

inline constexpr std::string_view kCrowdLabel = "Crowd";

/// Drop rule across all methods plus a Crowd method built from crowd_prob
/// when any question carries one. Questions without crowd_prob count as
/// Crowd declines. Unresolved or excluded questions are left out and
/// counted. Throws EmptySet when nothing is scorable.
ScoreReport score_methods(std::span<const MethodInput> methods, std::span<const Question> dataset,
                          std::size_t bins);

}  // namespace augur
