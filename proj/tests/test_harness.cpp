#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "banditlab/harness.hpp"
#include "banditlab/stats.hpp"
#include "doctest.h"

using namespace banditlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("banditlab_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// Expected per-round loss of a uniform pick over arm 0 and the 2k batch arms,
// with the special batch's advised side at 1/2 - eps and the other at 1/2 + eps.
double uniform_round_loss(int k, double eps) {
  const double arms = 2.0 * k + 1;
  return ((0.5 - eps / 2) + (0.5 - eps) + (0.5 + eps) + 2.0 * (k - 1) * 0.5) / arms;
}

}  // namespace

TEST_CASE("comparator") {
  auto [e0, l0] = comparator_expected_loss(StrategyId::null(), 0.1, 1000);
  CHECK(e0 == ExpertId::zero());
  CHECK(l0 == doctest::Approx(450.0));
  auto [e1, l1] = comparator_expected_loss(StrategyId::special(2, 3), 0.1, 1000);
  CHECK(e1 == ExpertId::pair(2, 3));
  CHECK(l1 == doctest::Approx(400.0));
}

TEST_CASE("pseudo-regret of reference learners") {
  const auto cfg = make_config(5, 41, 2000, 0.1, 4);
  const auto s = StrategyId::special(1, 1);
  Cell cell{0, cfg, s, {}};

  SUBCASE("uniform") {
    cell.learner.kind = LearnerSpec::Kind::uniform;
    const auto outcomes = run_cell(cell, 400, 1);
    const double expected = (uniform_round_loss(2, 0.1) - 0.4) * cfg.T;
    CHECK(expected == doctest::Approx(0.9 * 0.1 * cfg.T));
    for (auto est : {RegretEstimator::realized, RegretEstimator::conditional}) {
      const auto rep = estimate_pseudo_regret(outcomes, s, cfg, est);
      CHECK(std::abs(rep.mean_regret - expected) < 3.0 * rep.stderr_regret);
    }
  }
  SUBCASE("oracle") {
    cell.learner.kind = LearnerSpec::Kind::oracle;
    const auto outcomes = run_cell(cell, 200, 1);
    const auto rep = estimate_pseudo_regret(outcomes, s, cfg);
    CHECK(std::abs(rep.mean_regret) < 3.0 * rep.stderr_regret);
    const auto cond = estimate_pseudo_regret(outcomes, s, cfg, RegretEstimator::conditional);
    CHECK(std::abs(cond.mean_regret) < 1e-9);
  }
  SUBCASE("arm 0 under a special strategy") {
    cell.learner.kind = LearnerSpec::Kind::fixed;
    const auto outcomes = run_cell(cell, 200, 1);
    const auto cond = estimate_pseudo_regret(outcomes, s, cfg, RegretEstimator::conditional);
    CHECK(cond.mean_regret == doctest::Approx(0.05 * cfg.T).epsilon(1e-12));
    const auto rep = estimate_pseudo_regret(outcomes, s, cfg);
    CHECK(std::abs(rep.mean_regret - 0.05 * cfg.T) < 3.0 * rep.stderr_regret);
  }
  CHECK_THROWS_AS(estimate_pseudo_regret(run_cell(cell, 1, 1), s, cfg), ConfigError);
}

TEST_CASE("stats helpers") {
  std::vector<double> xs{1e16, 1.0, -1e16, 3.0};
  CHECK(stats::sorted_pairwise_sum(xs) == 4.0);
  std::vector<double> rev(xs.rbegin(), xs.rend());
  CHECK(stats::sorted_pairwise_sum(rev) == stats::sorted_pairwise_sum(xs));
  stats::CompensatedSum cs;
  for (int i = 0; i < 10; ++i) cs.add(0.1);
  CHECK(cs.value() == 1.0);
  const std::vector<double> v{1, 2, 3, 4};
  const auto m = stats::mean_and_stderr(v);
  CHECK(m.mean == 2.5);
  CHECK(m.stderr_mean == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("scaling fit") {
  std::vector<ScalingPoint> pts;
  for (double T : {1024.0, 4096.0, 16384.0, 65536.0}) pts.push_back({T, 3.0 * std::sqrt(T)});
  auto fit = fit_scaling(pts);
  CHECK(std::abs(fit.slope - 0.5) < 1e-9);
  CHECK(fit.ci_low <= 0.5 + 1e-9);
  CHECK(fit.ci_high >= 0.5 - 1e-9);

  for (auto& p : pts) p.mean = 7.0;
  CHECK(std::abs(fit_scaling(pts).slope) < 1e-12);

  pts.push_back({100.0, -1.0});
  fit = fit_scaling(pts);
  CHECK(fit.points_used == 4);
  CHECK(fit.warnings.size() == 1);

  pts.resize(3);
  CHECK_THROWS_AS(fit_scaling(pts), ConfigError);

  const auto j = scaling_fit_to_json(fit, ScalingAxis::horizon);
  CHECK(j.at("axis") == "T");
}

TEST_CASE("experiment spec parsing") {
  auto j = nlohmann::json::parse(R"({
    "K": [5], "N": 41, "T": [100, 200], "epsilon": "auto",
    "strategies": "representative", "learners": [{"learner": "exp4"}, "uniform"],
    "trials": 3, "seed": 9, "estimator": "conditional"})");
  const auto spec = parse_experiment_spec(j);
  CHECK(spec.auto_epsilon);
  CHECK(spec.T == std::vector<std::int64_t>{100, 200});
  CHECK(spec.learners.size() == 2);
  CHECK(spec.estimator == RegretEstimator::conditional);
  const auto cells = expand_cells(spec);
  CHECK(cells.size() == 2 * 3 * 2);
  CHECK(cells[0].config.epsilon == doctest::Approx(auto_epsilon_for(2, 20, 100)));
  CHECK(auto_epsilon_for(2, 20, 100) == doctest::Approx(std::sqrt(2 * std::log(2.0) / 10000)));

  j["trials"] = 1;
  CHECK_THROWS_AS(parse_experiment_spec(j), ConfigError);
}

TEST_CASE("failed cells do not abort the sweep") {
  ExperimentSpec spec;
  spec.K = {3, 5};
  spec.N = {11, 41};
  spec.T = {50};
  spec.auto_epsilon = true;  // (3, 11) and (5, 11) have n <= 10
  spec.strategies = {StrategyId::null()};
  spec.learners = {LearnerSpec{}};
  spec.trials = 2;
  spec.threads = 1;
  const auto r = run_sweep(spec);
  CHECK(r.failures.size() == 2);
  CHECK(r.summary.size() == 2);
}

TEST_CASE("sweep output and determinism") {
  ExperimentSpec spec;
  spec.K = {5};
  spec.N = {41};
  spec.T = {100, 300};
  spec.epsilon = {0.1};
  spec.strategies = {StrategyId::special(1, 1)};
  spec.learners = {LearnerSpec{}};
  spec.trials = 10;
  spec.seed = 77;

  spec.output_dir = scratch("serial");
  spec.threads = 1;
  const auto serial = run_sweep(spec);
  CHECK(serial.summary.size() == 2);
  CHECK(serial.trials.size() == 20);
  const auto serial_csv = slurp(spec.output_dir / "summary.csv");
  const auto serial_trials = slurp(spec.output_dir / "trials.csv");

  spec.output_dir = scratch("parallel");
  spec.threads = 4;
  spec.traces = true;
  run_sweep(spec);
  CHECK(slurp(spec.output_dir / "summary.csv") == serial_csv);
  CHECK(slurp(spec.output_dir / "trials.csv") == serial_trials);
  CHECK(std::filesystem::exists(spec.output_dir / "traces" / "cell1_trial9.csv"));

  std::istringstream in(serial_csv);
  const auto records = read_summary_csv(in);
  REQUIRE(records.size() == 2);
  CHECK(records[1].T == 300);
  CHECK(records[1].strategy == "S(1:1)");
  CHECK(records[1].mean_regret == serial.summary[1].report.mean_regret);

  const auto plot = plot_data(records);
  REQUIRE(plot.size() == 1);
  CHECK(plot.begin().value().size() == 2);

  spec.T.clear();
  spec.output_dir = scratch("empty");
  const auto empty = run_sweep(spec);
  CHECK(empty.summary.empty());
  CHECK(slurp(spec.output_dir / "summary.csv") ==
        "K,N,T,epsilon,strategy,learner,trials,mean_regret,stderr,comparator\n");
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}
