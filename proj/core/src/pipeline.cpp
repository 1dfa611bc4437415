#include "augur/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "augur/errors.hpp"
#include "augur/transcript_store.hpp"

#ifndef AUGUR_VERSION
#define AUGUR_VERSION "0.0.0"
#endif

namespace augur {
namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
  }
}

json encode_usage(const TokenUsage& u) {
  return {{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}

TokenUsage decode_usage(const json& j) {
  return {j.value("prompt_tokens", std::int64_t{0}), j.value("completion_tokens", std::int64_t{0})};
}

std::string now_text() {
  return format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

std::string member_session(const std::string& qid, int member) { return qid + "#" + std::to_string(member); }

bool backend_decline(const ForecastOutcome& o) {
  const auto* d = std::get_if<Declined>(&o.result);
  return d != nullptr && d->reason == DeclineReason::backend;
}

}  // namespace

void RunConfig::validate(Date today) const {
  if (ensemble_size < 1) throw ConfigError("ensemble size must be >= 1");
  if (bins < 1) throw ConfigError("bin count must be >= 1");
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (planner_iterations < 1 || subagent_iterations < 1) throw ConfigError("iteration caps must be >= 1");
  if (context_limit_tokens == 0) throw ConfigError("context limit must be positive");
  if (cutoff == Date{}) throw ConfigError("cutoff date is required");
  if (cutoff > today) throw ConfigError("cutoff " + format_date(cutoff) + " is after today " + format_date(today));
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "cutoff", "ensemble_size", "aggregator", "temperature", "bins", "workers", "seed", "model",
      "single_agent", "planner_iterations", "subagent_iterations", "context_limit_tokens"};
  for (const auto& [key, value] : j.items()) {
    if (known.count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  if (j.contains("cutoff")) {
    try {
      c.cutoff = parse_date(j.at("cutoff").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config key 'cutoff': ") + e.what());
    }
  }
  if (j.contains("aggregator")) {
    try {
      c.aggregator = aggregator_from_string(j.at("aggregator").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config key 'aggregator': ") + e.what());
    }
  }
  read_key(j, "ensemble_size", c.ensemble_size);
  read_key(j, "temperature", c.temperature);
  read_key(j, "bins", c.bins);
  read_key(j, "workers", c.workers);
  read_key(j, "seed", c.seed);
  read_key(j, "model", c.model_id);
  read_key(j, "single_agent", c.single_agent);
  read_key(j, "planner_iterations", c.planner_iterations);
  read_key(j, "subagent_iterations", c.subagent_iterations);
  read_key(j, "context_limit_tokens", c.context_limit_tokens);
  return c;
}

json RunConfig::to_json() const {
  return {{"cutoff", format_date(cutoff)},
          {"ensemble_size", ensemble_size},
          {"aggregator", std::string(to_string(aggregator))},
          {"temperature", temperature},
          {"bins", bins},
          {"workers", workers},
          {"seed", seed},
          {"model", model_id},
          {"single_agent", single_agent},
          {"planner_iterations", planner_iterations},
          {"subagent_iterations", subagent_iterations},
          {"context_limit_tokens", context_limit_tokens}};
}

std::string_view to_string(QuestionStatus s) {
  switch (s) {
    case QuestionStatus::forecasted: return "forecasted";
    case QuestionStatus::declined: return "declined";
    case QuestionStatus::error: return "error";
  }
  return "error";
}

QuestionStatus question_status_from_string(std::string_view s) {
  if (s == "forecasted") return QuestionStatus::forecasted;
  if (s == "declined") return QuestionStatus::declined;
  if (s == "error") return QuestionStatus::error;
  throw ValidationError("status", "unknown question status '" + std::string(s) + "'");
}

const ManifestEntry* RunManifest::find(std::string_view question_id) const {
  for (const auto& e : questions) {
    if (e.question_id == question_id) return &e;
  }
  return nullptr;
}

json encode_manifest(const RunManifest& m) {
  json questions = json::array();
  for (const auto& e : m.questions) {
    questions.push_back({{"id", e.question_id},
                         {"status", std::string(to_string(e.status))},
                         {"detail", e.detail},
                         {"usage", encode_usage(e.usage)}});
  }
  return {{"config", m.config},
          {"code_version", m.code_version},
          {"questions", std::move(questions)},
          {"token_totals", encode_usage(m.totals)},
          {"started_at", m.started_at},
          {"finished_at", m.finished_at},
          {"wall_seconds", m.wall_seconds}};
}

RunManifest decode_manifest(const json& j) {
  RunManifest m;
  m.config = j.value("config", json::object());
  m.code_version = j.value("code_version", "");
  for (const auto& q : j.at("questions")) {
    m.questions.push_back({q.at("id").get<std::string>(), question_status_from_string(q.at("status").get<std::string>()),
                           q.value("detail", ""), decode_usage(q.value("usage", json::object()))});
  }
  m.totals = decode_usage(j.value("token_totals", json::object()));
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.wall_seconds = j.value("wall_seconds", 0.0);
  return m;
}

std::optional<RunManifest> load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return decode_manifest(json::parse(buffer.str()));
  } catch (const json::exception& e) {
    throw FormatError(path.string(), 1, e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write manifest " + tmp.string());
    out << encode_manifest(m).dump(2) << "\n";
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

MemberForecaster make_member_forecaster(const RunConfig& config, Backend& backend, SearchProvider& search,
                                        const Sandbox* sandbox) {
  ForecasterSetup setup;
  setup.search = &search;
  setup.sandbox = sandbox;
  setup.cutoff = config.cutoff;
  setup.model_id = config.model_id;
  setup.temperature = config.temperature;
  setup.planner_iterations = config.planner_iterations;
  setup.subagent_iterations = config.subagent_iterations;
  setup.context_limit_tokens = config.context_limit_tokens;
  const Date cutoff = config.cutoff;
  if (config.single_agent) {
    ReactConfig agent = make_single_agent(setup);
    return [agent = std::move(agent), &backend, cutoff](const Question& q, int, const std::string& session) {
      return forecast_single_agent(agent, backend, q, cutoff, session);
    };
  }
  PlannerConfig planner = make_default_planner(setup);
  return [planner = std::move(planner), &backend, cutoff](const Question& q, int, const std::string& session) {
    return forecast_one(planner, backend, q, cutoff, session);
  };
}

ForecastRecord make_record(const Question& q, const RunConfig& config, const std::vector<ForecastOutcome>& members,
                           const std::vector<std::string>& transcript_refs) {
  std::vector<ForecastMember> out;
  std::vector<Forecast> values;
  bool declined = false;
  for (std::size_t m = 0; m < members.size(); ++m) {
    out.push_back({static_cast<int>(m), members[m].result, members[m].raw_value,
                   m < transcript_refs.size() ? transcript_refs[m] : std::string()});
    if (const auto* f = std::get_if<Forecast>(&members[m].result)) {
      values.push_back(*f);
    } else {
      declined = true;
    }
  }
  std::optional<Forecast> agg;
  std::optional<std::uint64_t> seed;
  if (!declined) {
    if (config.aggregator == Aggregator::sampled) seed = question_seed(config.seed, q.id);
    agg = aggregate(values, config.aggregator, seed.value_or(0));
  }
  return ForecastRecord(q.id, std::move(out), config.aggregator, agg, seed);
}

ForecastRunResult run_forecasts(std::span<const Question> dataset, const RunConfig& config,
                                const MemberForecaster& forecaster, const ForecastRunPaths& paths) {
  const auto wall_start = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(paths.out_dir, ec);
  if (ec) throw ConfigError("cannot create " + paths.out_dir.string() + ": " + ec.message());

  const std::optional<RunManifest> previous = load_manifest(paths.manifest());
  std::map<std::string, ForecastRecord> records;
  if (std::filesystem::exists(paths.records())) {
    for (auto& r : load_records(paths.records())) records.emplace(r.question_id(), std::move(r));
  }

  const std::size_t n = dataset.size();
  std::vector<std::optional<ManifestEntry>> entries(n);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n; ++i) {
    const ManifestEntry* old = previous ? previous->find(dataset[i].id) : nullptr;
    if (old != nullptr && records.count(dataset[i].id) != 0) {
      entries[i] = *old;
    } else {
      records.erase(dataset[i].id);
      pending.push_back(i);
    }
  }

  RunManifest manifest;
  manifest.config = config.to_json();
  manifest.code_version = AUGUR_VERSION;
  manifest.started_at = now_text();

  TranscriptStore store(paths.transcripts());
  std::mutex mutex;

  auto persist = [&]() {  // caller holds `mutex`
    std::vector<ForecastRecord> ordered;
    manifest.questions.clear();
    manifest.totals = {};
    for (std::size_t i = 0; i < n; ++i) {
      if (const auto it = records.find(dataset[i].id); it != records.end()) ordered.push_back(it->second);
      if (entries[i]) {
        manifest.questions.push_back(*entries[i]);
        manifest.totals += entries[i]->usage;
      }
    }
    save_records(paths.records(), ordered);
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    save_manifest(paths.manifest(), manifest);
  };

  const int members = config.ensemble_size;
  struct Slot {
    std::optional<ForecastOutcome> outcome;
    std::string error;
  };
  std::vector<std::vector<Slot>> slots(n, std::vector<Slot>(static_cast<std::size_t>(members)));
  std::vector<int> remaining(n, members);

  auto finish_question = [&](std::size_t i) {  // caller holds `mutex`
    const Question& q = dataset[i];
    ManifestEntry entry{q.id, QuestionStatus::error, {}, {}};
    std::vector<ForecastOutcome> outcomes;
    std::string errors;
    for (auto& slot : slots[i]) {
      if (slot.outcome) {
        entry.usage += slot.outcome->usage;
        outcomes.push_back(std::move(*slot.outcome));
      } else {
        if (!errors.empty()) errors += "; ";
        errors += slot.error;
      }
    }
    if (!errors.empty()) {
      entry.detail = errors;
      records.erase(q.id);
      entries[i] = entry;
      return;
    }
    try {
      std::vector<TranscriptTree> trees;
      std::vector<std::string> refs;
      for (int m = 0; m < members; ++m) {
        trees.push_back(outcomes[static_cast<std::size_t>(m)].tree);
        refs.push_back(store.planner_ref(q.id, m));
      }
      store.save(q.id, trees);
      ForecastRecord record = make_record(q, config, outcomes, refs);
      const bool any_backend = std::any_of(outcomes.begin(), outcomes.end(), backend_decline);
      if (!record.declined()) {
        entry.status = QuestionStatus::forecasted;
      } else {
        entry.status = any_backend ? QuestionStatus::error : QuestionStatus::declined;
        for (const auto& o : outcomes) {
          if (const auto* d = std::get_if<Declined>(&o.result)) {
            if (!entry.detail.empty()) entry.detail += "; ";
            entry.detail += std::string(to_string(d->reason)) + ": " + d->detail;
          }
        }
      }
      records.insert_or_assign(q.id, std::move(record));
    } catch (const std::exception& e) {
      entry.status = QuestionStatus::error;
      entry.detail = e.what();
      records.erase(q.id);
    }
    entries[i] = entry;
  };

  std::vector<std::pair<std::size_t, int>> jobs;
  for (std::size_t i : pending) {
    for (int m = 0; m < members; ++m) jobs.emplace_back(i, m);
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr fatal;

  auto worker = [&]() {
    while (!abort.load()) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const auto [i, m] = jobs[j];
      Slot slot;
      try {
        slot.outcome = forecaster(dataset[i], m, member_session(dataset[i].id, m));
      } catch (const AuthError&) {
        std::lock_guard lock(mutex);
        if (!fatal) fatal = std::current_exception();
        abort = true;
        return;
      } catch (const std::exception& e) {
        slot.error = "member " + std::to_string(m) + ": " + e.what();
      }
      std::lock_guard lock(mutex);
      slots[i][static_cast<std::size_t>(m)] = std::move(slot);
      if (--remaining[i] == 0) {
        finish_question(i);
        persist();
      }
    }
  };

  const std::size_t thread_count = std::min<std::size_t>(static_cast<std::size_t>(config.workers), jobs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < thread_count; ++t) threads.emplace_back(worker);
  if (thread_count > 0) worker();
  for (auto& t : threads) t.join();

  std::lock_guard lock(mutex);
  manifest.finished_at = now_text();
  persist();
  if (fatal) std::rethrow_exception(fatal);

  ForecastRunResult result;
  for (const auto& q : dataset) {
    if (const auto it = records.find(q.id); it != records.end()) result.records.push_back(it->second);
  }
  for (std::size_t i : pending) result.computed.push_back(dataset[i].id);
  result.manifest = manifest;
  return result;
}

CurateResult curate(MarketClient& client, Backend& judge, const CurateOptions& options) {
  CurateResult result;
  std::vector<MarketRecord> window = fetch_window(client, options.from, options.to, &result.warnings);
  std::vector<MarketRecord> kept;
  std::map<std::string, Category> categories;
  for (auto& record : window) {
    const FilterVerdict verdict = llm_filter(judge, record.question_text, options.filter_model);
    json row = {{"market_id", record.market_id},
                {"question", record.question_text},
                {"verdict", std::string(to_string(verdict.verdict))},
                {"judge_reply", verdict.judge_reply},
                {"note", verdict.note}};
    if (verdict.verdict == Verdict::keep) {
      const Category c = classify_category(judge, record.question_text, options.category_model);
      categories[record.market_id] = c;
      row["category"] = std::string(to_string(c));
      kept.push_back(std::move(record));
    } else {
      ++result.dropped;
    }
    if (!verdict.note.empty()) result.warnings.push_back("market " + row["market_id"].get<std::string>() + ": " + verdict.note);
    result.audit.push_back(std::move(row));
  }
  result.kept = snapshot(kept, options.at, categories);
  if (result.kept.size() < kept.size()) {
    result.warnings.push_back(std::to_string(kept.size() - result.kept.size()) +
                              " kept market(s) had already closed at snapshot time and were skipped");
  }
  return result;
}

ScoreReport score_methods(std::span<const MethodInput> methods, std::span<const Question> dataset,
                          std::size_t bins) {
  if (bins == 0) throw ConfigError("bin count must be positive");
  std::map<std::string, const Question*> by_id;
  for (const auto& q : dataset) by_id[q.id] = &q;

  std::map<std::string, MethodForecasts> forecasts;
  std::map<std::string, std::map<std::string, const ForecastRecord*>> record_index;
  std::vector<std::string> labels;
  for (const auto& method : methods) {
    if (forecasts.count(method.label) != 0) throw ConfigError("duplicate method label " + method.label);
    labels.push_back(method.label);
    auto& table = forecasts[method.label];
    for (const auto& r : method.records) {
      if (by_id.count(r.question_id()) == 0) {
        throw UniverseMismatch("method " + method.label + " forecasts " + r.question_id() + ", absent from the dataset");
      }
      table.insert_or_assign(r.question_id(), r.declined()
                                                  ? MemberResult(Declined{DeclineReason::no_number, "record declined"})
                                                  : MemberResult(*r.aggregate()));
      record_index[method.label][r.question_id()] = &r;
    }
  }

  std::vector<std::string> universe;
  if (!methods.empty()) {
    for (const auto& [qid, result] : forecasts.begin()->second) universe.push_back(qid);
  } else {
    for (const auto& q : dataset) universe.push_back(q.id);
  }

  const bool any_crowd = std::any_of(universe.begin(), universe.end(),
                                     [&](const std::string& id) { return by_id.at(id)->crowd_prob.has_value(); });
  if (any_crowd) {
    if (forecasts.count(std::string(kCrowdLabel)) != 0) throw ConfigError("method label Crowd is reserved");
    labels.emplace_back(kCrowdLabel);
    auto& table = forecasts[std::string(kCrowdLabel)];
    for (const auto& id : universe) {
      const auto& crowd = by_id.at(id)->crowd_prob;
      table.insert_or_assign(
          id, crowd ? MemberResult(Forecast(*crowd)) : MemberResult(Declined{DeclineReason::no_number, "no crowd"}));
    }
  }

  ScoreReport report;
  report.bins = bins;
  std::map<std::string, int> outcomes;
  for (const auto& id : universe) {
    const Question& q = *by_id.at(id);
    if (q.outcome && !(q.flag && *q.flag == ResolutionFlag::excluded)) {
      outcomes[id] = *q.outcome;
    } else {
      ++report.unresolved;
    }
  }

  DropResult dropped = apply_drop_rule(forecasts, outcomes);
  report.dropped = dropped.dropped;
  for (const auto& label : labels) {
    const ScoredSet& set = dropped.sets.at(label);
    if (set.empty()) throw EmptySet();
    MethodScore score;
    score.label = label;
    score.n = set.size();
    score.brier = brier(set);
    score.accuracy = accuracy(set);
    if (set.size() >= bins) score.calibration = calibration_index(set, bins);
    if (const auto it = record_index.find(label); it != record_index.end()) {
      std::vector<ForecastRecord> survivors;
      bool ensemble = true;
      for (const auto& pair : set.pairs()) {
        const ForecastRecord* r = it->second.at(pair.question_id);
        if (r->member_values().size() < 2) ensemble = false;
        survivors.push_back(*r);
      }
      if (ensemble) score.stdev = ensemble_std(survivors);
    }
    report.methods.push_back(std::move(score));
  }
  return report;
}

}  // namespace augur
