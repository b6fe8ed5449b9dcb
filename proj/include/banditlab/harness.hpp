#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "banditlab/core.hpp"
#include "banditlab/learners.hpp"
#include "banditlab/regret.hpp"

namespace banditlab {

// A grid of cells (K x N x T x epsilon x strategy x learner, in that nesting
// order), each run for `trials` independent trials.
struct ExperimentSpec {
  std::vector<int> K;
  std::vector<int> N;
  std::vector<std::int64_t> T;
  std::vector<double> epsilon;  // ignored when auto_epsilon is set
  bool auto_epsilon = false;    // eps = sqrt(k ln(n/10) / (100 T)) per cell
  enum class StrategySet { listed, all, representative };
  StrategySet strategy_set = StrategySet::listed;
  std::vector<StrategyId> strategies;
  std::vector<LearnerSpec> learners;
  std::int64_t trials = 10;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  int threads = 0;  // 0: BANDITLAB_THREADS, else hardware concurrency
  RegretEstimator estimator = RegretEstimator::realized;
  bool trial_log = true;
  bool traces = false;
};

// Parses the experiment JSON. "epsilon" is a list of numbers or "auto";
// "strategies" is a list of "S0" / {"u","v"} entries, "all" or
// "representative".
ExperimentSpec parse_experiment_spec(const nlohmann::json& j);

// sqrt(k ln(n/10) / (100 T)); throws ConfigError unless n > 10.
double auto_epsilon_for(int k, int n, std::int64_t T);

struct Cell {
  std::int64_t id = 0;
  GameConfig config;
  StrategyId strategy;
  LearnerSpec learner;
};

struct CellFailure {
  std::int64_t id = 0;
  std::string message;
};

struct SummaryRow {
  std::int64_t cell = 0;
  GameConfig config;
  StrategyId strategy;
  std::string learner;
  RegretReport report;
};

struct TrialRow {
  std::int64_t cell = 0;
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  std::int64_t realized_loss = 0;
  double comparator_loss = 0.0;
  double regret = 0.0;
};

struct SweepResult {
  std::vector<SummaryRow> summary;
  std::vector<TrialRow> trials;
  std::vector<CellFailure> failures;
  std::vector<std::string> io_errors;
};

// Expands the grid. Cells that cannot be built are returned as failures.
std::vector<Cell> expand_cells(const ExperimentSpec& spec,
                               std::vector<CellFailure>* failures = nullptr);

// Worker count: spec.threads if positive, else BANDITLAB_THREADS, else the
// number of logical cores.
int resolve_threads(int requested);

// Runs every trial of every cell on a bounded worker pool. Trial i of cell c
// seeds its game with derive_seed(spec.seed, c, i). When output_dir is set,
// writes summary.csv, trials.csv and (if requested) per-trial traces.
SweepResult run_sweep(const ExperimentSpec& spec);

// Runs one cell serially, returning per-trial outcomes.
std::vector<GameOutcome> run_cell(const Cell& cell, std::int64_t trials,
                                  std::uint64_t root_seed, bool keep_trace = false);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
void write_trials_csv(std::ostream& out, std::span<const TrialRow> rows);

struct SummaryRecord {
  int K = 0;
  int N = 0;
  std::int64_t T = 0;
  double epsilon = 0.0;
  std::string strategy;
  std::string learner;
  std::int64_t trials = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  std::string comparator;
};

std::vector<SummaryRecord> read_summary_csv(std::istream& in);

enum class ScalingAxis { horizon, k_log_n_over_k };

ScalingAxis parse_axis(const std::string& text);
const char* to_string(ScalingAxis axis);
double axis_value(const SummaryRecord& r, ScalingAxis axis);

struct ScalingPoint {
  double x = 0.0;
  double mean = 0.0;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> residuals;
  std::size_t points_used = 0;
  std::vector<std::string> warnings;
};

// OLS of ln(mean) on ln(x). Points with mean <= 0 are dropped with a warning;
// at least four must remain.
ScalingFit fit_scaling(std::span<const ScalingPoint> points);

nlohmann::json scaling_fit_to_json(const ScalingFit& fit, ScalingAxis axis);

// Groups summary rows into series keyed "learner|strategy|K=..|N=..", each an
// array of {T, epsilon, mean_regret, stderr} sorted by T.
nlohmann::json plot_data(std::span<const SummaryRecord> rows);

}  // namespace banditlab
