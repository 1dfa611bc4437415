#include "augur/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "augur/errors.hpp"

namespace augur {

ScoredSet::ScoredSet(std::string method_label, std::vector<ScoredPair> pairs)
    : method_label_(std::move(method_label)), pairs_(std::move(pairs)) {
  std::unordered_set<std::string> seen;
  for (const auto& p : pairs_) {
    if (!seen.insert(p.question_id).second) throw ValidationError("question_id", "duplicate " + p.question_id);
    if (!(p.forecast >= 0.0 && p.forecast <= 1.0)) {
      throw ValidationError("forecast", "outside [0, 1] for " + p.question_id);
    }
    if (p.outcome != 0 && p.outcome != 1) throw ValidationError("outcome", "must be 0 or 1 for " + p.question_id);
  }
}

double brier(const ScoredSet& set) {
  if (set.empty()) throw EmptySet();
  double sum = 0.0;
  for (const auto& p : set.pairs()) {
    const double d = p.forecast - p.outcome;
    sum += d * d;
  }
  return sum / static_cast<double>(set.size());
}

double accuracy(const ScoredSet& set) {
  if (set.empty()) throw EmptySet();
  std::size_t hits = 0;
  for (const auto& p : set.pairs()) {
    if ((p.forecast > 0.5 ? 1 : 0) == p.outcome) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(set.size());
}

CalibrationReport calibration_index(const ScoredSet& set, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("bin count must be positive");
  const std::size_t n = set.size();
  if (n < bins) throw TooFewForecasts(n, bins);

  std::vector<const ScoredPair*> sorted;
  sorted.reserve(n);
  for (const auto& p : set.pairs()) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](const ScoredPair* a, const ScoredPair* b) {
    if (a->forecast != b->forecast) return a->forecast < b->forecast;
    return a->question_id < b->question_id;
  });

  CalibrationReport report;
  report.bins_requested = bins;
  double total = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const std::size_t lo = k * n / bins;
    const std::size_t hi = (k + 1) * n / bins;
    CalibrationBin bin;
    bin.count = hi - lo;
    double f = 0.0;
    double o = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      f += sorted[i]->forecast;
      o += sorted[i]->outcome;
    }
    bin.mean_forecast = f / static_cast<double>(bin.count);
    bin.observed_frequency = o / static_cast<double>(bin.count);
    const double gap = bin.mean_forecast - bin.observed_frequency;
    total += static_cast<double>(bin.count) * gap * gap;
    report.bins.push_back(bin);
  }
  report.index = total / static_cast<double>(n);
  return report;
}

Forecast aggregate(std::span<const Forecast> members, Aggregator mode, std::uint64_t seed) {
  if (members.empty()) throw EmptyMembers();
  std::vector<double> values;
  values.reserve(members.size());
  for (const auto& m : members) values.push_back(m.value());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double max = *hi;

  double result = 0.0;
  switch (mode) {
    case Aggregator::mean:
      result = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
      break;
    case Aggregator::median: {
      std::sort(values.begin(), values.end());
      const std::size_t mid = values.size() / 2;
      result = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
      break;
    }
    case Aggregator::sampled: {
      std::mt19937_64 rng(seed);
      result = values[rng() % values.size()];
      break;
    }
  }
  // Summation rounding can land one ulp outside the member range.
  return Forecast(std::clamp(result, min, max));
}

std::uint64_t question_seed(std::uint64_t run_seed, std::string_view question_id) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : question_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return run_seed ^ h;
}

double ensemble_std(std::span<const ForecastRecord> records) {
  if (records.empty()) throw EmptySet();
  double total = 0.0;
  for (const auto& record : records) {
    const std::vector<double> values = record.member_values();
    if (values.size() < 2) throw InsufficientMembers(record.question_id());
    const double m = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    total += std::sqrt(ss / m);
  }
  return total / static_cast<double>(records.size());
}

DropResult apply_drop_rule(const std::map<std::string, MethodForecasts>& methods,
                           const std::map<std::string, int>& outcomes) {
  DropResult out;
  if (methods.empty()) return out;

  const MethodForecasts& reference = methods.begin()->second;
  for (const auto& [label, forecasts] : methods) {
    const bool same = forecasts.size() == reference.size() &&
                      std::equal(forecasts.begin(), forecasts.end(), reference.begin(),
                                 [](const auto& a, const auto& b) { return a.first == b.first; });
    if (!same) {
      throw UniverseMismatch("method " + label + " covers a different question set than " + methods.begin()->first);
    }
    for (const auto& [qid, result] : forecasts) {
      if (is_declined(result)) out.dropped.insert(qid);
    }
  }

  for (const auto& [label, forecasts] : methods) {
    std::vector<ScoredPair> pairs;
    for (const auto& [qid, result] : forecasts) {
      if (out.dropped.count(qid) != 0) continue;
      const auto outcome = outcomes.find(qid);
      if (outcome == outcomes.end()) continue;
      pairs.push_back({qid, std::get<Forecast>(result).value(), outcome->second});
    }
    out.sets.emplace(label, ScoredSet(label, std::move(pairs)));
  }
  return out;
}

}  // namespace augur
