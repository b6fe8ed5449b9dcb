#include "banditlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "banditlab/stats.hpp"

namespace banditlab {

namespace {

template <typename T>
std::vector<T> as_list(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

}  // namespace

double auto_epsilon_for(int k, int n, std::int64_t T) {
  if (n <= 10) {
    throw ConfigError(fmt::format("auto epsilon needs n > 10, got n={}", n));
  }
  return std::sqrt(k * std::log(n / 10.0) / (100.0 * static_cast<double>(T)));
}

ExperimentSpec parse_experiment_spec(const nlohmann::json& j) {
  ExperimentSpec spec;
  try {
    spec.K = as_list<int>(j, "K");
    spec.N = as_list<int>(j, "N");
    spec.T = as_list<std::int64_t>(j, "T");
    const auto& eps = j.at("epsilon");
    if (eps.is_string()) {
      if (eps.get<std::string>() != "auto") {
        throw ConfigError("epsilon must be a list of numbers or \"auto\"");
      }
      spec.auto_epsilon = true;
    } else {
      spec.epsilon = as_list<double>(j, "epsilon");
    }

    const auto& strategies = j.contains("strategies") ? j.at("strategies")
                                                      : nlohmann::json("S0");
    if (strategies.is_string() && strategies.get<std::string>() == "all") {
      spec.strategy_set = ExperimentSpec::StrategySet::all;
    } else if (strategies.is_string() &&
               strategies.get<std::string>() == "representative") {
      spec.strategy_set = ExperimentSpec::StrategySet::representative;
    } else if (strategies.is_array()) {
      for (const auto& s : strategies) spec.strategies.push_back(s.get<StrategyId>());
    } else {
      spec.strategies.push_back(strategies.get<StrategyId>());
    }

    const auto& learners = j.at("learners");
    if (learners.is_array()) {
      for (const auto& l : learners) spec.learners.push_back(parse_learner_spec(l));
    } else {
      spec.learners.push_back(parse_learner_spec(learners));
    }

    spec.trials = j.value("trials", std::int64_t{10});
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.output_dir = j.value("output_dir", std::string{});
    spec.threads = j.value("threads", 0);
    spec.estimator = parse_estimator(j.value("estimator", std::string{"realized"}));
    spec.trial_log = j.value("trial_log", true);
    spec.traces = j.value("traces", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment spec: ") + e.what());
  }
  if (spec.trials < 2) throw ConfigError("experiment needs at least 2 trials per cell");
  return spec;
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec,
                               std::vector<CellFailure>* failures) {
  std::vector<Cell> cells;
  std::int64_t id = 0;
  const std::vector<double> eps_list =
      spec.auto_epsilon ? std::vector<double>{std::nan("")} : spec.epsilon;

  for (int K : spec.K) {
    for (int N : spec.N) {
      for (std::int64_t T : spec.T) {
        for (double eps : eps_list) {
          // Strategy lists depend on (k, n); build them per configuration.
          std::vector<StrategyId> strategies = spec.strategies;
          std::optional<GameConfig> base;
          std::string error;
          try {
            base = make_config(K, N, T, eps);
            if (spec.auto_epsilon) base->epsilon = auto_epsilon_for(base->k, base->n, T);
            if (spec.strategy_set == ExperimentSpec::StrategySet::all) {
              strategies = base->strategy_pool();
            } else if (spec.strategy_set == ExperimentSpec::StrategySet::representative) {
              strategies = {StrategyId::null()};
              for (int u = 1; u <= base->k; ++u) strategies.push_back(StrategyId::special(u, 1));
            }
          } catch (const std::exception& e) {
            error = e.what();
          }
          const std::size_t count =
              base ? strategies.size() * spec.learners.size()
                   : std::max<std::size_t>(spec.strategies.size(), 1) * spec.learners.size();
          if (!base) {
            for (std::size_t i = 0; i < count; ++i) {
              if (failures) failures->push_back({id, error});
              ++id;
            }
            continue;
          }
          for (const auto& strategy : strategies) {
            for (const auto& learner : spec.learners) {
              Cell cell{id++, *base, strategy, learner};
              cell.config.strategy = strategy;
              ValidationReport v = validate_config(cell.config);
              if (!v.ok()) {
                std::string msg;
                for (const auto& e : v.errors) msg += (msg.empty() ? "" : "; ") + e;
                if (failures) failures->push_back({cell.id, msg});
                continue;
              }
              cells.push_back(std::move(cell));
            }
          }
        }
      }
    }
  }
  return cells;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BANDITLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

namespace {

GameOutcome run_trial(const Cell& cell, std::int64_t trial, std::uint64_t root_seed,
                      bool keep_trace) {
  GameConfig cfg = cell.config;
  cfg.seed = derive_seed(root_seed, static_cast<std::uint64_t>(cell.id),
                         static_cast<std::uint64_t>(trial));
  auto learner =
      make_learner(cell.learner, cfg, cell.strategy, static_cast<std::uint64_t>(trial));
  return play_game(cfg, cell.strategy, *learner, cfg.T,
                   static_cast<std::uint64_t>(trial), keep_trace);
}

}  // namespace

std::vector<GameOutcome> run_cell(const Cell& cell, std::int64_t trials,
                                  std::uint64_t root_seed, bool keep_trace) {
  std::vector<GameOutcome> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (std::int64_t i = 0; i < trials; ++i) {
    out.push_back(run_trial(cell, i, root_seed, keep_trace));
  }
  return out;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  SweepResult result;
  const std::vector<Cell> cells = expand_cells(spec, &result.failures);
  const auto trials = static_cast<std::size_t>(spec.trials);
  const std::size_t total = cells.size() * trials;

  std::vector<GameOutcome> outcomes(total);
  std::vector<std::string> errors(total);
  std::mutex io_mutex;

  const bool write_traces = spec.traces && !spec.output_dir.empty();
  if (write_traces) {
    std::error_code ec;
    std::filesystem::create_directories(spec.output_dir / "traces", ec);
    if (ec) result.io_errors.push_back("traces/: " + ec.message());
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t item = next++; item < total; item = next++) {
      const Cell& cell = cells[item / trials];
      const auto trial = static_cast<std::int64_t>(item % trials);
      try {
        outcomes[item] = run_trial(cell, trial, spec.seed, write_traces);
        if (write_traces) {
          const auto path = spec.output_dir / "traces" /
                            fmt::format("cell{}_trial{}.csv", cell.id, trial);
          std::ofstream f(path);
          if (f) write_trace_csv(f, *outcomes[item].trace);
          outcomes[item].trace.reset();
          if (!f) {
            std::lock_guard lock(io_mutex);
            result.io_errors.push_back(path.string() + ": write failed");
          }
        }
      } catch (const std::exception& e) {
        errors[item] = e.what();
      }
    }
  };

  const int threads =
      std::min<int>(resolve_threads(spec.threads), static_cast<int>(std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const std::span<const GameOutcome> cell_outcomes(outcomes.data() + c * trials, trials);
    std::string failure;
    for (std::size_t i = 0; i < trials && failure.empty(); ++i) {
      failure = errors[c * trials + i];
    }
    if (!failure.empty()) {
      result.failures.push_back({cell.id, failure});
      continue;
    }
    SummaryRow row{cell.id, cell.config, cell.strategy, cell.learner.label(),
                   estimate_pseudo_regret(cell_outcomes, cell.strategy, cell.config,
                                          spec.estimator)};
    result.summary.push_back(std::move(row));
    for (std::size_t i = 0; i < trials; ++i) {
      const GameOutcome& o = cell_outcomes[i];
      const double comp = comparator_expected_loss(cell.strategy, cell.config).second;
      result.trials.push_back(
          {cell.id, static_cast<std::int64_t>(i),
           derive_seed(spec.seed, static_cast<std::uint64_t>(cell.id), i),
           o.realized_loss, comp, trial_regret(o, comp, spec.estimator)});
    }
  }
  std::sort(result.failures.begin(), result.failures.end(),
            [](const CellFailure& a, const CellFailure& b) { return a.id < b.id; });

  if (!spec.output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(spec.output_dir, ec);
    if (ec) result.io_errors.push_back(spec.output_dir.string() + ": " + ec.message());
    auto write = [&](const char* name, auto&& fn) {
      const auto path = spec.output_dir / name;
      std::ofstream f(path, std::ios::binary);
      if (f) fn(f);
      if (!f) result.io_errors.push_back(path.string() + ": write failed");
    };
    write("summary.csv", [&](std::ostream& f) { write_summary_csv(f, result.summary); });
    if (spec.trial_log) {
      write("trials.csv", [&](std::ostream& f) { write_trials_csv(f, result.trials); });
    }
  }
  return result;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "K,N,T,epsilon,strategy,learner,trials,mean_regret,stderr,comparator\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", r.config.K, r.config.N,
               r.config.T, r.config.epsilon, to_string(r.strategy), r.learner,
               r.report.trials, r.report.mean_regret, r.report.stderr_regret,
               to_string(r.report.comparator));
  }
}

void write_trials_csv(std::ostream& out, std::span<const TrialRow> rows) {
  out << "cell,trial,seed,realized_loss,comparator_loss,regret\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{}\n", r.cell, r.trial, r.seed, r.realized_loss,
               r.comparator_loss, r.regret);
  }
}

std::vector<SummaryRecord> read_summary_csv(std::istream& in) {
  std::vector<SummaryRecord> rows;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("summary CSV is empty");
  if (line.rfind("K,N,T,epsilon,strategy,learner,trials,mean_regret,stderr,comparator", 0) != 0) {
    throw ConfigError("unexpected summary CSV header: " + line);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 10) {
      throw ConfigError(fmt::format("summary CSV line {}: expected 10 fields", lineno));
    }
    try {
      rows.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stoll(f[2]), std::stod(f[3]),
                      f[4], f[5], std::stoll(f[6]), std::stod(f[7]), std::stod(f[8]), f[9]});
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("summary CSV line {}: malformed number", lineno));
    }
  }
  return rows;
}

ScalingAxis parse_axis(const std::string& text) {
  if (text == "T") return ScalingAxis::horizon;
  if (text == "K-logNK" || text == "KlogNK") return ScalingAxis::k_log_n_over_k;
  throw ConfigError("axis must be 'T' or 'K-logNK', got '" + text + "'");
}

const char* to_string(ScalingAxis axis) {
  return axis == ScalingAxis::horizon ? "T" : "K-logNK";
}

double axis_value(const SummaryRecord& r, ScalingAxis axis) {
  if (axis == ScalingAxis::horizon) return static_cast<double>(r.T);
  return r.K * std::log(static_cast<double>(r.N) / r.K);
}

ScalingFit fit_scaling(std::span<const ScalingPoint> points) {
  ScalingFit fit;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : points) {
    if (!(p.mean > 0.0) || !(p.x > 0.0)) {
      fit.warnings.push_back(
          fmt::format("excluded point x={} with non-positive value {}", p.x, p.mean));
      continue;
    }
    x.push_back(std::log(p.x));
    y.push_back(std::log(p.mean));
  }
  if (x.size() < 4) {
    throw ConfigError(fmt::format("fit_scaling needs >= 4 usable cells, got {}", x.size()));
  }
  const auto ols = stats::ols(x, y);
  fit.slope = ols.slope;
  fit.intercept = ols.intercept;
  fit.ci_low = ols.slope_ci_low;
  fit.ci_high = ols.slope_ci_high;
  fit.residuals = ols.residuals;
  fit.points_used = x.size();
  return fit;
}

nlohmann::json scaling_fit_to_json(const ScalingFit& fit, ScalingAxis axis) {
  return {{"axis", to_string(axis)},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"ci95", {fit.ci_low, fit.ci_high}},
          {"residuals", fit.residuals},
          {"points", fit.points_used},
          {"warnings", fit.warnings}};
}

nlohmann::json plot_data(std::span<const SummaryRecord> rows) {
  std::map<std::string, std::vector<const SummaryRecord*>> series;
  for (const auto& r : rows) {
    series[fmt::format("{}|{}|K={}|N={}", r.learner, r.strategy, r.K, r.N)].push_back(&r);
  }
  nlohmann::json out = nlohmann::json::object();
  for (auto& [name, members] : series) {
    std::stable_sort(members.begin(), members.end(),
                     [](const SummaryRecord* a, const SummaryRecord* b) { return a->T < b->T; });
    nlohmann::json arr = nlohmann::json::array();
    for (const auto* r : members) {
      arr.push_back({{"T", r->T},
                     {"epsilon", r->epsilon},
                     {"mean_regret", r->mean_regret},
                     {"stderr", r->stderr_regret}});
    }
    out[name] = std::move(arr);
  }
  return out;
}

}  // namespace banditlab
