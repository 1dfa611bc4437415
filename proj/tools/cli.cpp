#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "augur/cassette.hpp"
#include "augur/chat_http.hpp"
#include "augur/errors.hpp"
#include "augur/market.hpp"
#include "augur/pipeline.hpp"
#include "augur/probe.hpp"
#include "augur/report.hpp"
#include "augur/sandbox.hpp"
#include "augur/search.hpp"

namespace augur::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::string config_path;
  std::string cassette;
  bool record = false;
  std::string cutoff;
  int ensemble = 0;
  std::string aggregator;
  std::size_t bins = 0;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string model;

  CLI::Option* seed_opt = nullptr;
};

/// Owns the backend chain selected by --cassette/--record.
struct BackendChain {
  std::unique_ptr<Backend> live;
  std::unique_ptr<Backend> outer;

  Backend& get() { return outer ? *outer : *live; }
};

BackendChain make_backend(const Globals& g) {
  BackendChain chain;
  if (!g.cassette.empty() && !g.record) {
    chain.live = std::make_unique<ReplayBackend>(Cassette::load(g.cassette));
    return chain;
  }
  if (g.record && g.cassette.empty()) throw ConfigError("--record needs --cassette");
  LiveBackendOptions options = live_options_from_env();
  auto limiter = std::make_shared<RateLimiter>(options.requests_per_minute);
  chain.live = std::make_unique<LiveBackend>(options, make_default_transport(), limiter);
  if (g.record) chain.outer = std::make_unique<RecordingBackend>(*chain.live, g.cassette);
  return chain;
}

std::unique_ptr<SearchProvider> make_search(const std::string& fixture) {
  if (!fixture.empty()) return std::make_unique<FixtureSearchProvider>(FixtureSearchProvider::load(fixture));
  GoogleSearchOptions options;
  const char* key = std::getenv("SEARCH_API_KEY");
  if (key == nullptr || *key == '\0') throw ConfigError("environment variable SEARCH_API_KEY is not set");
  const char* engine = std::getenv("SEARCH_ENGINE_ID");
  if (engine == nullptr || *engine == '\0') throw ConfigError("environment variable SEARCH_ENGINE_ID is not set");
  options.api_key = key;
  options.engine_id = engine;
  return std::make_unique<GoogleSearchProvider>(options, make_default_transport(), std::make_shared<RateLimiter>(60.0));
}

std::unique_ptr<MarketClient> make_markets(const std::string& fixture) {
  if (!fixture.empty()) return std::make_unique<FixtureMarketClient>(FixtureMarketClient::load(fixture));
  return std::make_unique<ManifoldClient>(ManifoldOptions{}, make_default_transport(),
                                          std::make_shared<RateLimiter>(300.0));
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

RunConfig resolve_config(const Globals& g) {
  RunConfig config = g.config_path.empty() ? RunConfig{} : RunConfig::from_json(read_json_file(g.config_path));
  if (!g.cutoff.empty()) {
    try {
      config.cutoff = parse_date(g.cutoff);
    } catch (const std::exception& e) {
      throw ConfigError("--cutoff: " + std::string(e.what()));
    }
  }
  if (g.ensemble != 0) config.ensemble_size = g.ensemble;
  if (!g.aggregator.empty()) config.aggregator = aggregator_from_string(g.aggregator);
  if (g.bins != 0) config.bins = g.bins;
  if (g.seed_opt != nullptr && g.seed_opt->count() > 0) config.seed = g.seed;
  if (g.workers != 0) config.workers = g.workers;
  if (!g.model.empty()) config.model_id = g.model;
  return config;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

int cmd_curate(const Globals& g, const std::string& from, const std::string& to, const std::string& out_path,
               std::string audit_path, const std::string& markets_fixture, const std::string& at_text,
               std::ostream& out, std::ostream& err) {
  CurateOptions options;
  options.from = parse_date(from);
  options.to = parse_date(to);
  options.at = at_text.empty() ? std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now())
                               : parse_timestamp(at_text);
  if (!g.model.empty()) options.filter_model = options.category_model = g.model;

  auto markets = make_markets(markets_fixture);
  BackendChain judge = make_backend(g);
  CurateResult result = curate(*markets, judge.get(), options);

  save_questions(out_path, result.kept);
  if (audit_path.empty()) audit_path = out_path + ".audit.jsonl";
  write_json_lines(audit_path, result.audit);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  if (result.audit.empty()) err << "warning: no markets in the window\n";
  out << "kept " << result.kept.size() << " / dropped " << result.dropped << "\n";
  out << render_category_table(result.kept);
  return kExitOk;
}

int cmd_resolve(const std::string& dataset_path, std::string out_path, const std::string& markets_fixture,
                std::ostream& out) {
  std::vector<Question> dataset = load_questions(dataset_path);
  auto markets = make_markets(markets_fixture);
  const BackfillSummary summary = backfill_resolutions(*markets, dataset);
  if (out_path.empty()) out_path = dataset_path;
  save_questions(out_path, dataset);
  out << "resolved " << summary.resolved << ", excluded " << summary.excluded << ", pending " << summary.pending
      << "\n";
  return kExitOk;
}

int cmd_forecast(const Globals& g, const std::string& dataset_path, const std::string& out_dir,
                 const std::string& search_fixture, bool single_agent, bool no_code, std::ostream& out,
                 std::ostream& err) {
  RunConfig config = resolve_config(g);
  if (single_agent) config.single_agent = true;
  config.validate(today_utc());

  const std::vector<Question> dataset = load_questions(dataset_path);
  if (dataset.empty()) {
    err << "error: dataset " << dataset_path << " has no questions\n";
    return kExitEmpty;
  }
  BackendChain backend = make_backend(g);
  auto search = make_search(search_fixture);
  std::optional<Sandbox> sandbox;
  if (!no_code) sandbox.emplace(SandboxConfig{});

  const MemberForecaster forecaster =
      make_member_forecaster(config, backend.get(), *search, sandbox ? &*sandbox : nullptr);
  const ForecastRunResult result = run_forecasts(dataset, config, forecaster, {out_dir});

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& e : result.manifest.questions) ++counts[static_cast<int>(e.status)];
  out << "forecasted " << counts[0] << ", declined " << counts[1] << ", error " << counts[2] << " ("
      << result.computed.size() << " run now, " << dataset.size() - result.computed.size() << " resumed)\n";
  for (const auto& e : result.manifest.questions) {
    if (e.status == QuestionStatus::error) err << "warning: " << e.question_id << ": " << e.detail << "\n";
  }
  out << "records: " << ForecastRunPaths{out_dir}.records().string() << "\n";
  return kExitOk;
}

int cmd_score(const Globals& g, const std::string& dataset_path, const std::vector<std::string>& forecast_args,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const RunConfig config = resolve_config(g);
  const std::vector<Question> dataset = load_questions(dataset_path);
  std::vector<MethodInput> methods;
  for (const auto& arg : forecast_args) {
    const auto eq = arg.find('=');
    const std::string path = arg.substr(0, eq);
    const std::string label = eq == std::string::npos ? fs::path(path).stem().string() : arg.substr(eq + 1);
    methods.push_back({label, load_records(path)});
  }

  ScoreReport report;
  try {
    report = score_methods(methods, dataset, config.bins);
  } catch (const EmptySet&) {
    err << "error: no scorable questions\n";
    return kExitEmpty;
  }
  if (report.methods.empty()) {
    err << "error: no scorable questions\n";
    return kExitEmpty;
  }
  if (report.unresolved > 0) err << "warning: " << report.unresolved << " unresolved question(s) excluded\n";

  const std::string text = render_report(report);
  write_text(fs::path(out_dir) / "report.md", text);
  write_json_lines(fs::path(out_dir) / "scores.jsonl", score_rows(report));
  out << text;
  return kExitOk;
}

int cmd_probe(const Globals& g, const std::string& probes_path, const std::string& cutoff_hint, std::ostream& out,
              std::ostream& err) {
  const std::vector<ProbeQuestion> probes = load_probes(probes_path);
  if (probes.empty()) {
    err << "error: no probes in " << probes_path << "\n";
    return kExitEmpty;
  }
  BackendChain backend = make_backend(g);
  const std::string model = g.model.empty() ? RunConfig{}.model_id : g.model;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& probe : probes) {
    try {
      const ProbeOutcome outcome = leakage_probe(backend.get(), model, probe, cutoff_hint);
      ++counts[static_cast<int>(outcome.result)];
      out << to_string(outcome.result) << "\t" << probe.question << "\t" << outcome.rule << "\n";
    } catch (const AuthError&) {
      throw;
    } catch (const BackendError& e) {
      out << "Error\t" << probe.question << "\t" << e.what() << "\n";
    }
  }
  out << "leaked " << counts[0] << ", cutoff respected " << counts[1] << ", inconclusive " << counts[2] << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Judgmental forecasting with hierarchical ReAct agents", "augur"};
  app.set_version_flag("--version", std::string(AUGUR_VERSION));
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--cassette", g.cassette, "Replay chat responses from this cassette");
  app.add_flag("--record", g.record, "Call the live backend and append every exchange to --cassette");
  app.add_option("--cutoff", g.cutoff, "Search cutoff date, YYYY-MM-DD");
  app.add_option("--ensemble", g.ensemble, "Ensemble size")->check(CLI::PositiveNumber);
  app.add_option("--aggregator", g.aggregator, "Ensemble aggregator")
      ->check(CLI::IsMember({"mean", "median", "sampled"}));
  app.add_option("--bins", g.bins, "Calibration bins K")->check(CLI::PositiveNumber);
  g.seed_opt = app.add_option("--seed", g.seed, "Seed for sampled aggregation");
  app.add_option("--workers", g.workers, "Concurrent workers")->check(CLI::PositiveNumber);
  app.add_option("--model", g.model, "Model id for every request");

  std::string from, to, curate_out, audit, markets_fixture, at;
  CLI::App* curate_cmd = app.add_subcommand("curate", "Fetch, filter and snapshot markets into a dataset");
  curate_cmd->add_option("--from", from, "First close date, inclusive")->required();
  curate_cmd->add_option("--to", to, "Last close date, inclusive")->required();
  curate_cmd->add_option("--out", curate_out, "Dataset file to write")->required();
  curate_cmd->add_option("--audit", audit, "Filter verdict log (default: <out>.audit.jsonl)");
  curate_cmd->add_option("--markets-fixture", markets_fixture, "Read markets from a file instead of the API");
  curate_cmd->add_option("--at", at, "Snapshot timestamp (default: now)");

  std::string resolve_dataset, resolve_out;
  CLI::App* resolve_cmd = app.add_subcommand("resolve", "Back-fill outcomes for a dataset");
  resolve_cmd->add_option("--dataset", resolve_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  resolve_cmd->add_option("--out", resolve_out, "Output file (default: rewrite the dataset)");
  resolve_cmd->add_option("--markets-fixture", markets_fixture, "Read markets from a file instead of the API");

  std::string forecast_dataset, forecast_out, search_fixture;
  bool single_agent = false;
  bool no_code = false;
  CLI::App* forecast_cmd = app.add_subcommand("forecast", "Forecast every question of a dataset");
  forecast_cmd->add_option("--dataset", forecast_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  forecast_cmd->add_option("--out", forecast_out, "Run directory")->required();
  forecast_cmd->add_option("--search-fixture", search_fixture, "Canned search results instead of the live API");
  forecast_cmd->add_flag("--single-agent", single_agent, "Ablation: one agent with raw tools, no compaction");
  forecast_cmd->add_flag("--no-code", no_code, "Do not offer the code interpreter");

  std::string score_dataset, score_out = ".";
  std::vector<std::string> forecast_files;
  CLI::App* score_cmd = app.add_subcommand("score", "Score forecast files against resolved outcomes");
  score_cmd->add_option("--dataset", score_dataset, "Resolved dataset file")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--forecasts", forecast_files, "Records file per method, optionally path=Label");
  score_cmd->add_option("--out", score_out, "Directory for report.md and scores.jsonl");

  std::string probes_path = "data/probes.jsonl";
  std::string cutoff_hint = "October 2023";
  CLI::App* probe_cmd = app.add_subcommand("probe", "Check a model for answer leakage");
  probe_cmd->add_option("--probes", probes_path, "Probe questions file")->check(CLI::ExistingFile);
  probe_cmd->add_option("--cutoff-hint", cutoff_hint, "Model knowledge cutoff as written in replies");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*curate_cmd) return cmd_curate(g, from, to, curate_out, audit, markets_fixture, at, out, err);
    if (*resolve_cmd) return cmd_resolve(resolve_dataset, resolve_out, markets_fixture, out);
    if (*forecast_cmd) {
      return cmd_forecast(g, forecast_dataset, forecast_out, search_fixture, single_agent, no_code, out, err);
    }
    if (*score_cmd) return cmd_score(g, score_dataset, forecast_files, score_out, out, err);
    if (*probe_cmd) return cmd_probe(g, probes_path, cutoff_hint, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}

}  // namespace augur::cli
