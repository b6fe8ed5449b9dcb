#include "banditlab/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "banditlab/harness.hpp"
#include "banditlab/infotheory.hpp"
#include "banditlab/sbi.hpp"
#include "banditlab/stats.hpp"

namespace banditlab {

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Opens `path` for writing, or returns `fallback` when path is empty.
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::vector<StrategyId> strategies_from_flag(const std::string& flag, const GameConfig& cfg) {
  if (flag == "all") return cfg.strategy_pool();
  if (flag == "representative") return representative_strategies(cfg);
  std::vector<StrategyId> out;
  std::stringstream ss(flag);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(parse_strategy(item));
  for (const auto& s : out) {
    if (!cfg.is_valid_strategy(s)) throw ConfigError("strategy " + to_string(s) + " not in pool");
  }
  return out;
}

void print_warnings(const ValidationReport& report, std::ostream& err) {
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
}

void require_valid(const GameConfig& cfg, std::ostream& err) {
  const ValidationReport report = validate_config(cfg);
  print_warnings(report, err);
  if (!report.ok()) {
    std::string msg;
    for (const auto& e : report.errors) msg += (msg.empty() ? "" : "; ") + e;
    throw ConfigError(msg);
  }
}

nlohmann::json goodness_json(const GoodnessReport& g) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& s : g.per_strategy) {
    per.push_back({{"strategy", to_string(s.strategy)},
                   {"accuracy", s.accuracy},
                   {"radius3sigma", s.radius},
                   {"mean_stopping_round", s.mean_stopping_round},
                   {"truncated", s.truncated}});
  }
  return {{"trials", g.trials},
          {"min_accuracy", g.min_accuracy},
          {"good_0_95", g.good},
          {"meets_0_99", g.meets_0_99},
          {"per_strategy", per}};
}

struct SimulateArgs {
  std::string config;
  std::string learner = "exp4";
  std::string learner_json;
  std::int64_t trials = 1;
  std::string trace;
  std::string advice_jsonl;
  std::string estimator = "realized";
  bool proper = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  GameConfig cfg = read_json_file(a.config).get<GameConfig>();
  require_valid(cfg, err);
  LearnerSpec spec = a.learner_json.empty()
                         ? parse_learner_spec(nlohmann::json(a.learner))
                         : parse_learner_spec(nlohmann::json::parse(a.learner_json));
  if (a.proper) spec.proper = true;
  if (a.trials < 1) throw ConfigError("--trials must be >= 1");
  const RegretEstimator estimator = parse_estimator(a.estimator);
  const bool keep = !a.trace.empty() || !a.advice_jsonl.empty();

  std::vector<GameOutcome> outcomes;
  for (std::int64_t i = 0; i < a.trials; ++i) {
    auto learner = make_learner(spec, cfg, cfg.strategy, static_cast<std::uint64_t>(i));
    outcomes.push_back(play_game(cfg, cfg.strategy, *learner, cfg.T,
                                 static_cast<std::uint64_t>(i), keep && i == 0));
  }
  if (!a.trace.empty()) {
    std::ofstream f(a.trace, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.trace);
    write_trace_csv(f, *outcomes.front().trace);
  }
  if (!a.advice_jsonl.empty()) {
    std::ofstream f(a.advice_jsonl, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.advice_jsonl);
    write_advice_jsonl(f, *outcomes.front().trace);
  }

  const auto [comparator, comp_loss] = comparator_expected_loss(cfg.strategy, cfg);
  nlohmann::json report{{"config", cfg},
                        {"learner", spec.label()},
                        {"trials", a.trials},
                        {"comparator", to_string(comparator)},
                        {"comparator_loss", comp_loss},
                        {"estimator", to_string(estimator)}};
  std::vector<double> regrets;
  for (const auto& o : outcomes) regrets.push_back(trial_regret(o, comp_loss, estimator));
  const auto ms = stats::mean_and_stderr(regrets);
  report["mean_regret"] = ms.mean;
  report["stderr"] = a.trials >= 2 ? nlohmann::json(ms.stderr_mean) : nlohmann::json(nullptr);
  report["batch_pulls"] = outcomes.front().batch_pulls;
  out << report.dump(2) << '\n';
  return kExitOk;
}

struct SweepArgs {
  std::string spec;
  std::string out_dir;
  int threads = 0;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentSpec spec = parse_experiment_spec(read_json_file(a.spec));
  if (!a.out_dir.empty()) spec.output_dir = a.out_dir;
  if (a.threads > 0) spec.threads = a.threads;
  const SweepResult r = run_sweep(spec);
  for (const auto& f : r.failures) err << fmt::format("cell {} failed: {}\n", f.id, f.message);
  for (const auto& e : r.io_errors) err << "io error: " << e << '\n';
  if (spec.output_dir.empty()) write_summary_csv(out, r.summary);
  else out << fmt::format("{} cells, {} trial rows -> {}\n", r.summary.size(), r.trials.size(),
                          spec.output_dir.string());
  if (!r.io_errors.empty()) return kExitRuntime;
  return r.failures.empty() ? kExitOk : kExitValidation;
}

struct KlArgs {
  int nmax = 3;
  int tmax = 3;
  std::vector<double> eps{0.02, 0.05, 0.1};
  std::string out;
};

int cmd_klcheck(const KlArgs& a, std::ostream& out, std::ostream& err) {
  const auto rows = info::kl_check_grid(a.nmax, a.tmax, a.eps);
  OutputTarget target(a.out, out);
  info::write_klcheck_csv(target.get(), rows);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.pass;
  if (failed) {
    err << failed << " of " << rows.size() << " grid points failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct SbiArgs {
  std::string mode = "scan";
  int K = 5;
  int N = 41;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  std::int64_t trials = 100;
  std::int64_t budget = 0;
  double threshold = -1.0;
  std::int64_t t_star = 10000;
  std::string learner = "oracle";
  std::string strategies = "representative";
  int batch = 1;
  std::string out;
  bool raw_loss = false;
  std::int64_t round_cap = 100'000'000;
};

int cmd_sbi(const SbiArgs& a, std::ostream& out, std::ostream& err) {
  GameConfig cfg = make_config(a.K, a.N, a.t_star, a.epsilon, a.seed);
  require_valid(cfg, err);
  SbiOptions options;
  options.round_cap = a.round_cap;
  if (a.raw_loss) options.mode = ObservationMode::raw_loss;
  BatchScanParams params = a.budget > 0 ? BatchScanParams::with_budget(a.budget, a.epsilon)
                                        : BatchScanParams::defaults(cfg.n, a.epsilon);
  if (a.threshold >= 0.0) params.threshold = a.threshold;

  std::unique_ptr<OutputTarget> csv;
  if (!a.out.empty()) {
    csv = std::make_unique<OutputTarget>(a.out, out);
    write_sbi_csv_header(csv->get());
  }

  if (a.mode == "scan") {
    const auto strategies = strategies_from_flag(a.strategies, cfg);
    std::vector<SbiResult> results;
    const auto g = evaluate_goodness(
        [&] { return std::make_unique<BatchScan>(cfg.k, cfg.n, params); }, cfg, strategies,
        a.trials, options, &results);
    if (csv) {
      for (std::size_t i = 0; i < results.size(); ++i) {
        write_sbi_csv_row(csv->get(), results[i], static_cast<std::int64_t>(i) % a.trials);
      }
    }
    nlohmann::json j = goodness_json(g);
    j["budget"] = params.budget;
    j["threshold"] = params.threshold;
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  if (a.mode == "reduce") {
    const auto strategies = strategies_from_flag(a.strategies, cfg);
    const LearnerSpec spec = parse_learner_spec(nlohmann::json(a.learner));
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : strategies) {
      std::int64_t hits = 0;
      for (std::int64_t i = 0; i < a.trials; ++i) {
        auto learner = make_learner(spec, cfg, s, static_cast<std::uint64_t>(i));
        const auto r = sbi_reduce(*learner, a.t_star, s, cfg, static_cast<std::uint64_t>(i));
        hits += r.sbi.correct;
        if (csv) write_sbi_csv_row(csv->get(), r.sbi, i);
      }
      per.push_back({{"strategy", to_string(s)},
                     {"accuracy", static_cast<double>(hits) / static_cast<double>(a.trials)}});
    }
    out << nlohmann::json{{"t_star", a.t_star}, {"learner", spec.label()}, {"per_strategy", per}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  if (a.mode == "embed") {
    const GameConfig small = make_config(3, cfg.n + 1, a.t_star, a.epsilon, a.seed);
    const std::vector<StrategyId> strategies =
        a.strategies == "representative" || a.strategies == "all"
            ? std::vector<StrategyId>{StrategyId::null(), StrategyId::special(1, 1)}
            : strategies_from_flag(a.strategies, small);
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : strategies) {
      std::int64_t hits = 0;
      double small_rounds = 0.0;
      double big_rounds = 0.0;
      for (std::int64_t i = 0; i < a.trials; ++i) {
        BatchScan scan(cfg.k, cfg.n, params);
        const auto r = embed_one_batch(scan, cfg.k, a.batch, small, s,
                                       static_cast<std::uint64_t>(i), {}, options);
        hits += r.small.correct;
        small_rounds += static_cast<double>(r.small.stopping_round);
        big_rounds += static_cast<double>(r.big_rounds);
        if (csv) write_sbi_csv_row(csv->get(), r.small, i);
      }
      const double t = static_cast<double>(a.trials);
      per.push_back({{"strategy", to_string(s)},
                     {"accuracy", static_cast<double>(hits) / t},
                     {"mean_small_rounds", small_rounds / t},
                     {"mean_big_rounds", big_rounds / t}});
    }
    out << nlohmann::json{{"batch", a.batch}, {"big_k", cfg.k}, {"n", cfg.n}, {"per_strategy", per}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  if (a.mode == "budget") {
    const auto strategies = strategies_from_flag(a.strategies, cfg);
    const auto search = min_batchscan_budget(cfg, strategies, a.trials);
    out << nlohmann::json{{"epsilon", a.epsilon},
                          {"min_budget", search.min_budget},
                          {"accuracy_at_min", search.accuracy_at_min},
                          {"evaluated", search.evaluated}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  throw ConfigError("unknown sbi mode '" + a.mode + "'");
}

struct FitArgs {
  std::string summary;
  std::string axis = "T";
  std::string learner;
  std::string strategy;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream f(a.summary);
  if (!f) throw ConfigError("cannot open " + a.summary);
  const auto rows = read_summary_csv(f);
  const ScalingAxis axis = parse_axis(a.axis);
  std::vector<ScalingPoint> points;
  for (const auto& r : rows) {
    if (!a.learner.empty() && r.learner != a.learner) continue;
    if (!a.strategy.empty() && r.strategy != a.strategy) continue;
    points.push_back({axis_value(r, axis), r.mean_regret});
  }
  const ScalingFit fit = fit_scaling(points);
  for (const auto& w : fit.warnings) err << "warning: " << w << '\n';
  out << scaling_fit_to_json(fit, axis).dump(2) << '\n';
  return kExitOk;
}

struct PlotArgs {
  std::string summary;
  std::string out;
};

int cmd_plot_data(const PlotArgs& a, std::ostream& out, std::ostream&) {
  std::ifstream f(a.summary);
  if (!f) throw ConfigError("cannot open " + a.summary);
  const auto rows = read_summary_csv(f);
  OutputTarget target(a.out, out);
  target.get() << plot_data(rows).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"banditlab: bandits with expert advice, lower-bound construction toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one cell and emit a trace and report");
  simulate->add_option("--config", sim.config, "Game config JSON")->required();
  simulate->add_option("--learner", sim.learner, "exp4 | uniform | oracle");
  simulate->add_option("--learner-json", sim.learner_json, "Learner spec as JSON");
  simulate->add_option("--trials", sim.trials, "Number of trials");
  simulate->add_option("--trace", sim.trace, "Write the first trial's trace CSV here");
  simulate->add_option("--advice-jsonl", sim.advice_jsonl, "Write full advice snapshots here");
  simulate->add_option("--estimator", sim.estimator, "realized | conditional");
  simulate->add_flag("--proper", sim.proper, "Delay advice by one round");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment grid");
  sweep->add_option("--spec", sw.spec, "Experiment spec JSON")->required();
  sweep->add_option("--out", sw.out_dir, "Output directory (overrides the spec)");
  sweep->add_option("--threads", sw.threads, "Worker threads");

  KlArgs kl;
  auto* klcheck = app.add_subcommand("klcheck", "Exact KL verification grid");
  klcheck->add_option("--nmax", kl.nmax, "Largest batch size");
  klcheck->add_option("--tmax", kl.tmax, "Largest horizon");
  klcheck->add_option("--eps", kl.eps, "Gap values")->delimiter(',');
  klcheck->add_option("--out", kl.out, "CSV output file (default stdout)");

  SbiArgs sb;
  auto* sbi = app.add_subcommand("sbi", "Special batch identification experiments");
  sbi->add_option("--mode", sb.mode, "scan | reduce | embed | budget")
      ->check(CLI::IsMember({"scan", "reduce", "embed", "budget"}));
  sbi->add_option("--K", sb.K, "Arms");
  sbi->add_option("--N", sb.N, "Experts");
  sbi->add_option("--epsilon", sb.epsilon, "Gap");
  sbi->add_option("--seed", sb.seed, "Root seed");
  sbi->add_option("--trials", sb.trials, "Trials per strategy");
  sbi->add_option("--budget", sb.budget, "BatchScan rounds per batch (0: default)");
  sbi->add_option("--threshold", sb.threshold, "BatchScan threshold (default m/2 + eps m/2)");
  sbi->add_option("--tstar", sb.t_star, "Rounds for the reduction");
  sbi->add_option("--learner", sb.learner, "Learner for --mode reduce");
  sbi->add_option("--strategies", sb.strategies,
                  "all | representative | list like 'S0;S(1:1)'");
  sbi->add_option("--batch", sb.batch, "Embedded batch for --mode embed");
  sbi->add_option("--out", sb.out, "Per-trial CSV output");
  sbi->add_flag("--raw-loss", sb.raw_loss, "Deliver raw losses instead of correct sides");
  sbi->add_option("--round-cap", sb.round_cap, "Hard round cap per trial");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Log-log regression on a summary CSV");
  fit->add_option("--summary", fa.summary, "Summary CSV")->required();
  fit->add_option("--axis", fa.axis, "T | K-logNK");
  fit->add_option("--learner", fa.learner, "Only rows with this learner label");
  fit->add_option("--strategy", fa.strategy, "Only rows with this strategy");

  PlotArgs pa;
  auto* plot = app.add_subcommand("plot-data", "Reshape a summary CSV into JSON series");
  plot->add_option("--summary", pa.summary, "Summary CSV")->required();
  plot->add_option("--out", pa.out, "JSON output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out, err);
    if (*sweep) return cmd_sweep(sw, out, err);
    if (*klcheck) return cmd_klcheck(kl, out, err);
    if (*sbi) return cmd_sbi(sb, out, err);
    if (*fit) return cmd_fit(fa, out, err);
    if (*plot) return cmd_plot_data(pa, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "fault: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace banditlab
