#include <cmath>
#include <numeric>

#include "banditlab/learners.hpp"
#include "banditlab/regret.hpp"
#include "banditlab/sbi.hpp"
#include "doctest.h"

using namespace banditlab;

TEST_CASE("exp4 arm distribution") {
  const auto cfg = make_config(3, 3, 100, 0.1);  // k = 1, n = 2
  AdviceState advice(1, 2);                       // both advise (1, 0)
  const std::vector<double> w(3, 1.0);
  const auto arms = advised_arm_indices(cfg, advice);
  CHECK(arms == std::vector<int>{0, 1, 1});

  const auto p = exp4_arm_probabilities(w, arms, 3, 0.0);
  CHECK(p[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(p[2] == 0.0);

  const auto u = exp4_arm_probabilities(w, arms, 3, 1.0);
  for (double x : u) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-15));

  const auto est = exp4_loss_estimates(p, 1, 1);
  CHECK(est[1] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(est[0] == 0.0);
  CHECK_THROWS_AS(exp4_loss_estimates(p, 2, 1), NumericalFault);
}

TEST_CASE("exp4 update") {
  std::vector<double> lw{0.0, 0.0};
  const std::vector<int> arms{1, 2};
  exp4_update_log_weights(lw, arms, 1, 0.5, 0, 0.1);
  CHECK(lw[0] == doctest::Approx(0.0));
  CHECK(lw[1] == doctest::Approx(0.0));

  exp4_update_log_weights(lw, arms, 1, 0.5, 1, 0.1);
  CHECK(std::abs(std::exp(lw[0] - lw[1]) - std::exp(-0.2)) < 1e-12);
  CHECK(std::exp(lw[0]) + std::exp(lw[1]) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(exp4_update_log_weights(lw, arms, 1, 1e-13, 1, 0.1), NumericalFault);
}

TEST_CASE("exp4 defaults") {
  const auto cfg = make_config(5, 41, 10000, 0.1);
  const auto p = Exp4Params::defaults(cfg);
  CHECK(p.eta == doctest::Approx(std::sqrt(2 * std::log(41.0) / (10000 * 5.0))));
  CHECK(p.gamma == doctest::Approx(std::sqrt(5 * std::log(41.0) / 10000)));
  CHECK(Exp4Params::defaults(make_config(5, 41, 3, 0.1)).gamma == 1.0);
}

TEST_CASE("exp4 stays a distribution with exploration floor") {
  const auto cfg = make_config(5, 41, 5000, 0.1);
  const auto params = Exp4Params::defaults(cfg);
  Exp4Learner learner(cfg, params, RngStream(2, {"learner", 0, 0}));
  Environment env(cfg, StrategyId::special(1, 7), 0);
  for (std::int64_t t = 1; t <= cfg.T; ++t) {
    const auto p = learner.arm_probabilities(env.advice());
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    REQUIRE(std::abs(sum - 1.0) < 1e-9);
    for (double x : p) REQUIRE(x >= params.gamma / cfg.K - 1e-15);
    run_round(env, learner, t);
  }
  const auto w = learner.weights();
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(41.0).epsilon(1e-12));
}

TEST_CASE("exp4 weights stay finite and positive over a long run") {
  const std::int64_t T = 1000000;
  const auto cfg = make_config(5, 41, T, 0.1);
  Exp4Learner learner(cfg, Exp4Params::defaults(cfg), RngStream(3, {"learner", 0, 0}));
  const auto out = play_game(cfg, StrategyId::special(2, 3), learner, T);
  CHECK(out.rounds == T);
  for (double w : learner.weights()) {
    CHECK(std::isfinite(w));
    CHECK(w > 0.0);
  }
  const auto lw = learner.log_weights();
  const auto best = std::max_element(lw.begin(), lw.end()) - lw.begin();
  CHECK(cfg.expert_at(static_cast<int>(best)) == ExpertId::pair(2, 3));
}

TEST_CASE("exp4 expert loss estimates are unbiased") {
  const auto cfg = make_config(5, 41, 1, 0.1);
  const auto strategy = StrategyId::special(1, 4);
  RngStream adv(4, {"advice", 0, 0});
  const auto advice = init_advice(cfg, adv);
  std::vector<double> w(41);
  RngStream wr(4, {"weights", 0, 0});
  for (double& x : w) x = 0.1 + wr.uniform();
  const auto arms = advised_arm_indices(cfg, advice);
  const auto p = exp4_arm_probabilities(w, arms, cfg.K, 0.2);

  RngStream rng(4, {"loss", 0, 0});
  const int draws = 200000;
  std::vector<double> sum(5, 0.0);
  std::vector<double> sumsq(5, 0.0);
  for (int i = 0; i < draws; ++i) {
    const double x = rng.uniform();
    int pulled = 0;
    for (double acc = p[0]; x >= acc && pulled < 4; acc += p[++pulled]) {
    }
    const auto losses = draw_losses(strategy, advice, cfg.epsilon, rng);
    const auto est = exp4_loss_estimates(p, pulled, losses.loss(cfg.arm_at(pulled)));
    for (int r = 0; r < 5; ++r) {
      sum[r] += est[r];
      sumsq[r] += est[r] * est[r];
    }
  }
  for (int r = 0; r < 5; ++r) {
    const double mean = sum[r] / draws;
    const double sd = std::sqrt(sumsq[r] / draws - mean * mean);
    const double truth = expected_arm_loss(strategy, advice, cfg.epsilon, cfg.arm_at(r));
    CHECK(std::abs(mean - truth) < 3.5 * sd / std::sqrt(double(draws)));
  }
}

TEST_CASE("exp4 is reproducible") {
  const auto cfg = make_config(5, 41, 500, 0.1, 17);
  LearnerSpec spec;
  auto a = make_learner(spec, cfg, StrategyId::special(1, 1), 3);
  auto b = make_learner(spec, cfg, StrategyId::special(1, 1), 3);
  const auto oa = play_game(cfg, StrategyId::special(1, 1), *a, cfg.T, 3);
  const auto ob = play_game(cfg, StrategyId::special(1, 1), *b, cfg.T, 3);
  CHECK(oa.realized_loss == ob.realized_loss);
  CHECK(oa.batch_pulls == ob.batch_pulls);
}

TEST_CASE("oracle learner") {
  AdviceState advice(2, 3);
  advice.set_bit(2, 3, 1);
  CHECK(oracle_choose(StrategyId::null(), advice) == ArmId::zero());
  CHECK(oracle_choose(StrategyId::special(2, 3), advice) == ArmId::pair(2, 1));
  CHECK(oracle_choose(StrategyId::special(2, 2), advice) == ArmId::pair(2, 0));

  // Conditional expected loss of the oracle equals the comparator exactly.
  const auto cfg = make_config(5, 41, 1000, 0.1);
  for (auto s : {StrategyId::null(), StrategyId::special(2, 9)}) {
    OracleLearner oracle(s);
    const auto out = play_game(cfg, s, oracle, cfg.T);
    CHECK(out.expected_loss ==
          doctest::Approx(comparator_expected_loss(s, cfg).second).epsilon(1e-12));
  }
}

namespace {

class RecordingLearner : public Learner {
 public:
  std::vector<AdviceState> seen;
  ArmId choose(const AdviceState& advice) override {
    seen.push_back(advice);
    return ArmId::pair(1, 0);
  }
  void observe(const AdviceState&, const ArmId&, int) override {}
  std::string name() const override { return "recording"; }
};

}  // namespace

TEST_CASE("proper wrapper shows the previous round's advice") {
  const auto cfg = make_config(5, 41, 20, 0.1);
  auto inner = std::make_unique<RecordingLearner>();
  auto* rec = inner.get();
  ProperLearner proper(cfg, std::move(inner));
  const auto out = play_game(cfg, StrategyId::null(), proper, cfg.T, 0, true);
  REQUIRE(rec->seen.size() == 20);
  CHECK(rec->seen[0] == AdviceState(cfg.k, cfg.n));
  for (std::size_t t = 1; t < 20; ++t) CHECK(rec->seen[t] == out.trace->rounds[t - 1].advice);
  CHECK(proper.name() == "proper-recording");
}

TEST_CASE("learner specs") {
  auto spec = parse_learner_spec(nlohmann::json::parse(R"({"learner":"exp4","eta":0.5})"));
  CHECK(spec.kind == LearnerSpec::Kind::exp4);
  CHECK(spec.eta == 0.5);
  CHECK_FALSE(spec.gamma);
  CHECK(spec.label() == "exp4[eta=0.5]");
  spec = parse_learner_spec(nlohmann::json::parse(R"({"learner":"fixed","arm":"2:1","proper":true})"));
  CHECK(spec.arm == ArmId::pair(2, 1));
  CHECK(spec.label() == "proper-fixed(2:1)");
  CHECK(parse_learner_spec(learner_spec_to_json(spec)).label() == spec.label());
  CHECK_THROWS_AS(parse_learner_spec(nlohmann::json::parse(R"({"learner":"magic"})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_arm("x"), ConfigError);
  const auto cfg = make_config(5, 41, 10, 0.1);
  spec.arm = ArmId::pair(3, 0);
  CHECK_THROWS_AS(make_learner(spec, cfg, StrategyId::null(), 0), ConfigError);
}

TEST_CASE("batchscan parameters") {
  const auto p = BatchScanParams::defaults(20, 0.1);
  CHECK(p.budget == static_cast<std::int64_t>(std::ceil(800 * std::log(2000.0))));
  CHECK(p.threshold == doctest::Approx(p.budget * 0.55));
}

TEST_CASE("batchscan with zero budget stops at once") {
  BatchScan scan(2, 20, BatchScanParams::with_budget(0, 0.1));
  const auto action = scan.decide(AdviceState(2, 20));
  REQUIRE(std::holds_alternative<StopWith>(action));
  CHECK(std::get<StopWith>(action).output == 0);
}

TEST_CASE("batchscan scans batches in order") {
  BatchScan scan(2, 3, BatchScanParams::with_budget(4, 0.1));
  AdviceState advice(2, 3);
  advice.set_bit(2, 1, 1);
  std::optional<SbiObservation> last;
  std::vector<int> visited;
  for (int step = 0; step < 100; ++step) {
    const auto action = scan.step(advice, last);
    if (std::holds_alternative<StopWith>(action)) {
      // expert (2,1) matched every round of batch 2
      CHECK(std::get<StopWith>(action).output == 2);
      break;
    }
    const int u = std::get<PullBatch>(action).batch;
    visited.push_back(u);
    last = SbiObservation{u, 0, 0, u == 2 ? 1 : 0};
    if (u == 1) last->correct_side = step % 2;
  }
  CHECK(visited == std::vector<int>{1, 1, 1, 1, 2, 2, 2, 2});
  CHECK_THROWS_AS(scan.observe(SbiObservation{1, 0, 0, 0}), ProtocolViolation);
}

TEST_CASE("batchscan identifies the special batch") {
  const auto cfg = make_config(5, 41, 1, 0.1, 5);
  const auto params = BatchScanParams::defaults(cfg.n, cfg.epsilon);
  const auto strategies = representative_strategies(cfg);
  const auto report = evaluate_goodness(
      [&] { return std::make_unique<BatchScan>(cfg.k, cfg.n, params); }, cfg, strategies,
      400);
  CHECK(report.good);
  CHECK(report.min_accuracy >= 0.95);
}

TEST_CASE("batchscan is blind at eps = 0") {
  auto cfg = make_config(5, 41, 1, 0.1, 6);
  const auto params = BatchScanParams::with_budget(400, 0.1);
  cfg.epsilon = 0.0;
  const std::int64_t trials = 2000;
  std::array<std::array<double, 3>, 2> freq{};
  const std::array<StrategyId, 2> strategies{StrategyId::null(), StrategyId::special(1, 1)};
  for (int s = 0; s < 2; ++s) {
    for (std::int64_t i = 0; i < trials; ++i) {
      BatchScan scan(cfg.k, cfg.n, params);
      const auto r = run_sbi(scan, strategies[s], cfg, static_cast<std::uint64_t>(i) + s * trials);
      freq[s][r.output] += 1.0 / trials;
    }
  }
  for (int o = 0; o < 3; ++o) {
    const double p = (freq[0][o] + freq[1][o]) / 2;
    const double tol = 3.0 * std::sqrt(2 * p * (1 - p) / trials) + 1e-12;
    CHECK(std::abs(freq[0][o] - freq[1][o]) <= tol);
  }
}
