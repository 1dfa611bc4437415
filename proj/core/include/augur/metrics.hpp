#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "augur/domain.hpp"

namespace augur {

struct ScoredPair {
  std::string question_id;
  double forecast = 0.0;
  int outcome = 0;

  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

/// Fully numeric, resolved forecasts for one method.
class ScoredSet {
 public:
  ScoredSet() = default;
  /// Throws ValidationError on duplicate ids, forecasts outside [0, 1] or
  /// outcomes other than 0/1.
  ScoredSet(std::string method_label, std::vector<ScoredPair> pairs);

  const std::string& method_label() const noexcept { return method_label_; }
  const std::vector<ScoredPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  friend bool operator==(const ScoredSet&, const ScoredSet&) = default;

 private:
  std::string method_label_;
  std::vector<ScoredPair> pairs_;
};

/// Mean squared error. Throws EmptySet.
double brier(const ScoredSet& set);
/// Share of pairs where 1{f > 0.5} equals the outcome. Throws EmptySet.
double accuracy(const ScoredSet& set);

struct CalibrationBin {
  std::size_t count = 0;
  double mean_forecast = 0.0;
  double observed_frequency = 0.0;
};

struct CalibrationReport {
  std::size_t bins_requested = 0;
  std::vector<CalibrationBin> bins;
  double index = 0.0;
};

inline constexpr std::size_t kDefaultBins = 10;

/// Pairs sorted by (forecast, question_id); bin k takes ranks
/// [floor(kN/K), floor((k+1)N/K)). Throws TooFewForecasts when N < K and
/// std::invalid_argument when K is 0.
CalibrationReport calibration_index(const ScoredSet& set, std::size_t bins = kDefaultBins);

/// Mean, median (mean of the middle pair for even counts) or one member
/// drawn with `seed`. Throws EmptyMembers.
Forecast aggregate(std::span<const Forecast> members, Aggregator mode, std::uint64_t seed = 0);

/// Per-question seed for sampled aggregation: run seed XOR FNV-1a(id).
std::uint64_t question_seed(std::uint64_t run_seed, std::string_view question_id);

/// Population std of each record's member forecasts, averaged over
/// records. Throws InsufficientMembers naming the first record with fewer
/// than two forecasts, EmptySet on no records.
double ensemble_std(std::span<const ForecastRecord> records);

using MethodForecasts = std::map<std::string, MemberResult>;  // question id -> result

struct DropResult {
  std::map<std::string, ScoredSet> sets;
  std::set<std::string> dropped;
};

/// Removes every question that any method declined from every method, then
/// pairs the survivors with `outcomes`. Questions without an outcome are
/// left out of all sets but not counted as dropped. Throws UniverseMismatch
/// when methods cover different question sets.
DropResult apply_drop_rule(const std::map<std::string, MethodForecasts>& methods,
                           const std::map<std::string, int>& outcomes);

}  // namespace augur
