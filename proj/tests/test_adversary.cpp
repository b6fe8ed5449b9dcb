#include <cmath>
#include <sstream>

#include "banditlab/adversary.hpp"
#include "banditlab/learners.hpp"
#include "doctest.h"

using namespace banditlab;

namespace {

double three_sigma(double p, double draws) { return 3.0 * std::sqrt(p * (1 - p) / draws); }

class ScriptedLearner : public Learner {
 public:
  explicit ScriptedLearner(std::vector<ArmId> arms) : arms_(std::move(arms)) {}
  ArmId choose(const AdviceState&) override { return arms_[i_++ % arms_.size()]; }
  void observe(const AdviceState&, const ArmId&, int) override {}
  std::string name() const override { return "scripted"; }

 private:
  std::vector<ArmId> arms_;
  std::size_t i_ = 0;
};

}  // namespace

TEST_CASE("initial advice is fair and reproducible") {
  const auto cfg = make_config(3, 5, 1, 0.1);  // k = 1, n = 4
  const int draws = 100000;
  std::vector<int> ones(4, 0);
  for (int i = 0; i < draws; ++i) {
    RngStream rng(0, {"advice", 1, static_cast<std::uint64_t>(i)});
    const auto s = init_advice(cfg, rng);
    for (int v = 1; v <= 4; ++v) ones[v - 1] += s.bit(1, v);
  }
  for (int c : ones) CHECK(std::abs(c / double(draws) - 0.5) < 0.005);

  RngStream a(42, {"advice", 1, 0});
  RngStream b(42, {"advice", 1, 0});
  CHECK(init_advice(cfg, a) == init_advice(cfg, b));
}

TEST_CASE("refresh touches only the pulled batch") {
  const auto cfg = make_config(7, 31, 1, 0.1);  // k = 3, n = 10
  RngStream rng(3, {"advice", 0, 0});
  const auto s = init_advice(cfg, rng);
  CHECK(refresh_advice(s, ArmId::zero(), rng) == s);
  CHECK(refresh_advice(s, ArmId::padded(0), rng) == s);

  const int draws = 100000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) {
    const auto next = refresh_advice(s, ArmId::pair(2, 1), rng);
    REQUIRE(next.batch_string(1) == s.batch_string(1));
    REQUIRE(next.batch_string(3) == s.batch_string(3));
    ones += next.bit(2, 4);
  }
  CHECK(std::abs(ones / double(draws) - 0.5) < three_sigma(0.5, draws));
}

TEST_CASE("loss structure") {
  const auto cfg = make_config(5, 41, 1, 0.1);
  RngStream adv(1, {"advice", 0, 0});
  RngStream rng(1, {"loss", 0, 0});
  for (const auto& strategy : cfg.strategy_pool()) {
    const auto s = init_advice(cfg, adv);
    for (int r = 0; r < 250; ++r) {
      const auto losses = draw_losses(strategy, s, cfg.epsilon, rng);
      for (int u = 1; u <= cfg.k; ++u) {
        REQUIRE(losses.loss(ArmId::pair(u, 0)) + losses.loss(ArmId::pair(u, 1)) == 1);
      }
    }
  }
  LossVector lv(2);
  CHECK(lv.loss(ArmId::padded(0)) == 1);
}

TEST_CASE("arm-0 loss and special advantage frequencies") {
  const auto cfg = make_config(3, 11, 1, 0.1);
  RngStream adv(5, {"advice", 0, 0});
  RngStream rng(5, {"loss", 0, 0});
  const auto strategy = StrategyId::special(1, 3);
  const int draws = 1000000;
  int zero_losses = 0;
  int advised_losses = 0;
  auto s = init_advice(cfg, adv);
  for (int i = 0; i < draws; ++i) {
    const auto losses = draw_losses(strategy, s, cfg.epsilon, rng);
    zero_losses += losses.zero_loss();
    advised_losses += losses.loss(s.advised_arm(ExpertId::pair(1, 3)));
    s = refresh_advice(s, ArmId::pair(1, 0), adv);
  }
  CHECK(std::abs(zero_losses / double(draws) - 0.45) < three_sigma(0.45, draws));
  CHECK(std::abs(advised_losses / double(draws) - 0.4) < three_sigma(0.4, draws));
}

TEST_CASE("eps = 0 makes strategies indistinguishable") {
  auto cfg = make_config(5, 41, 1, 0.1);
  cfg.epsilon = 0.0;
  const int draws = 1000000;
  std::array<int, 2> side1_wins{};
  std::array<int, 2> advised_wins{};
  const std::array<StrategyId, 2> strategies{StrategyId::null(), StrategyId::special(1, 1)};
  for (int which = 0; which < 2; ++which) {
    RngStream adv(9, {"advice", 0, static_cast<std::uint64_t>(which)});
    RngStream rng(9, {"loss", 0, static_cast<std::uint64_t>(which)});
    auto s = init_advice(cfg, adv);
    for (int i = 0; i < draws; ++i) {
      const auto losses = draw_losses(strategies[which], s, 0.0, rng);
      side1_wins[which] += losses.correct_side(1);
      advised_wins[which] += losses.correct_side(1) == s.bit(1, 1) ? 1 : 0;
      s = refresh_advice(s, ArmId::pair(1, 0), adv);
    }
  }
  const double tol = 3.0 * std::sqrt(2 * 0.25 / draws);
  CHECK(std::abs(side1_wins[0] - side1_wins[1]) / double(draws) < tol);
  CHECK(std::abs(advised_wins[0] - advised_wins[1]) / double(draws) < tol);
}

TEST_CASE("special expert advantage over an EXP4 run") {
  const auto cfg = make_config(5, 41, 20000, 0.1);
  const auto strategy = StrategyId::special(2, 5);
  Exp4Learner learner(cfg, Exp4Params::defaults(cfg), RngStream(1, {"learner", 0, 0}));
  Environment env(cfg, strategy, 0);
  int special_correct = 0;
  int other_correct = 0;
  for (std::int64_t t = 1; t <= cfg.T; ++t) {
    const auto rec = run_round(env, learner, t);
    special_correct += rec.losses.loss(rec.advice.advised_arm(ExpertId::pair(2, 5))) == 0;
    other_correct += rec.losses.loss(rec.advice.advised_arm(ExpertId::pair(1, 5))) == 0;
  }
  const double delta = 4.0 * std::sqrt(1.0 / (4.0 * cfg.T));
  const double gap = (special_correct - other_correct) / double(cfg.T);
  CHECK(gap >= cfg.epsilon - delta);
}

TEST_CASE("round protocol") {
  const auto cfg = make_config(5, 41, 50, 0.1);

  SUBCASE("arm 0 keeps the advice fixed") {
    FixedArmLearner zero(ArmId::zero());
    Environment env(cfg, StrategyId::special(1, 1), 0);
    const auto first = env.advice();
    for (std::int64_t t = 1; t <= cfg.T; ++t) {
      const auto rec = run_round(env, zero, t);
      REQUIRE(rec.advice == first);
      REQUIRE(rec.revealed == rec.losses.zero_loss());
    }
  }

  SUBCASE("alternating batches refresh in turn") {
    ScriptedLearner alt({ArmId::pair(1, 0), ArmId::pair(2, 1)});
    Environment env(cfg, StrategyId::null(), 0);
    for (std::int64_t t = 1; t <= cfg.T; ++t) {
      const auto before = env.advice();
      const auto rec = run_round(env, alt, t);
      const int pulled = rec.pulled.batch;
      const int other = 3 - pulled;
      REQUIRE(pulled == (t % 2 == 1 ? 1 : 2));
      REQUIRE(env.advice().batch_string(other) == before.batch_string(other));
      REQUIRE(env.advice().batch_string(pulled) != before.batch_string(pulled));
      REQUIRE(rec.revealed == rec.losses.loss(rec.pulled));
    }
  }

  SUBCASE("violations") {
    ScriptedLearner bad({ArmId::pair(3, 0)});
    Environment env(cfg, StrategyId::null(), 0);
    CHECK_THROWS_AS(run_round(env, bad, 1), ProtocolViolation);
    FixedArmLearner zero(ArmId::zero());
    CHECK_THROWS_AS(run_round(env, zero, 2), ProtocolViolation);
    CHECK_THROWS_AS(Environment(cfg, StrategyId::special(3, 1), 0), ConfigError);
  }
}

TEST_CASE("play_game accounting and determinism") {
  const auto cfg = make_config(6, 12, 300, 0.1, 11);  // one padded arm
  auto run = [&] {
    UniformLearner learner(cfg, RngStream(cfg.seed, {"learner", 0, 0}));
    return play_game(cfg, StrategyId::special(1, 2), learner, cfg.T, 0, true);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.realized_loss == b.realized_loss);
  std::int64_t pulls = a.padded_pulls;
  for (auto c : a.batch_pulls) pulls += c;
  CHECK(pulls == cfg.T);
  CHECK(a.padded_pulls > 0);
  REQUIRE(a.trace);
  CHECK(a.trace->rounds.size() == static_cast<std::size_t>(cfg.T));

  std::ostringstream csv;
  write_trace_csv(csv, *a.trace);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,I_t,loss_pulled,correct_bits,advice_hash");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == cfg.T);

  std::ostringstream jsonl;
  write_advice_jsonl(jsonl, *a.trace);
  CHECK(jsonl.str().find("\"advice\"") != std::string::npos);
  std::ostringstream tiny;
  CHECK_THROWS_AS(write_advice_jsonl(tiny, *a.trace, 100), ConfigError);
}
