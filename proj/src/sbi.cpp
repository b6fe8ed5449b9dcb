#include "banditlab/sbi.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "banditlab/learners.hpp"
#include "banditlab/stats.hpp"

namespace banditlab {

namespace {

void check_pull(const PullBatch& pull, int k, const std::string& who) {
  if (pull.batch < 1 || pull.batch > k) {
    throw ProtocolViolation(
        fmt::format("{} pulled batch {} (allowed: 1..{})", who, pull.batch, k));
  }
}

int check_output(const StopWith& stop, int k, const std::string& who) {
  if (stop.output < 0 || stop.output > k) {
    throw ProtocolViolation(
        fmt::format("{} output batch {} (allowed: 0..{})", who, stop.output, k));
  }
  return stop.output;
}

}  // namespace

SbiResult run_sbi(Identifier& identifier, const StrategyId& strategy,
                  const GameConfig& cfg, std::uint64_t trial,
                  const SbiOptions& options) {
  Environment env(cfg, strategy, trial);
  SbiResult result;
  result.strategy = strategy;
  result.truth = strategy.special_batch();
  result.pulls.assign(static_cast<std::size_t>(cfg.k) + 1, 0);

  while (true) {
    const SbiAction action = identifier.decide(env.advice());
    if (const auto* stop = std::get_if<StopWith>(&action)) {
      result.output = check_output(*stop, cfg.k, identifier.name());
      break;
    }
    if (result.stopping_round >= options.round_cap) {
      result.output = 0;
      result.truncated = true;
      break;
    }
    const auto& pull = std::get<PullBatch>(action);
    check_pull(pull, cfg.k, identifier.name());
    const RoundRecord rec = env.play(ArmId::pair(pull.batch, 0));
    ++result.stopping_round;
    ++result.pulls[static_cast<std::size_t>(pull.batch)];

    SbiObservation obs{pull.batch, 0, rec.revealed, -1};
    if (options.mode == ObservationMode::correct_bit) {
      obs.correct_side = rec.losses.correct_side(pull.batch);
    }
    identifier.observe(obs);
  }
  result.correct = result.output == result.truth;
  return result;
}

std::vector<StrategyId> representative_strategies(const GameConfig& cfg) {
  std::vector<StrategyId> s{StrategyId::null()};
  for (int u = 1; u <= cfg.k; ++u) s.push_back(StrategyId::special(u, 1));
  return s;
}

GoodnessReport evaluate_goodness(const IdentifierFactory& factory,
                                 const GameConfig& cfg,
                                 std::span<const StrategyId> strategies,
                                 std::int64_t trials, const SbiOptions& options,
                                 std::vector<SbiResult>* results) {
  GoodnessReport report;
  report.trials = trials;
  report.min_accuracy = 1.0;
  for (const auto& strategy : strategies) {
    StrategyAccuracy acc;
    acc.strategy = strategy;
    acc.trials = trials;
    std::int64_t hits = 0;
    double rounds = 0.0;
    for (std::int64_t i = 0; i < trials; ++i) {
      auto identifier = factory();
      SbiResult r = run_sbi(*identifier, strategy, cfg,
                            static_cast<std::uint64_t>(i), options);
      hits += r.correct;
      acc.truncated += r.truncated;
      rounds += static_cast<double>(r.stopping_round);
      if (results) results->push_back(std::move(r));
    }
    const double t = static_cast<double>(std::max<std::int64_t>(trials, 1));
    acc.accuracy = static_cast<double>(hits) / t;
    acc.radius = 3.0 * std::sqrt(acc.accuracy * (1.0 - acc.accuracy) / t);
    acc.mean_stopping_round = rounds / t;
    report.min_accuracy = std::min(report.min_accuracy, acc.accuracy);
    report.per_strategy.push_back(acc);
  }
  if (strategies.empty()) report.min_accuracy = 0.0;
  report.good = report.min_accuracy >= 0.95;
  report.meets_0_99 = report.min_accuracy >= 0.99;
  return report;
}

int argmax_batch(std::span<const std::int64_t> counts) {
  int best = 0;
  for (std::size_t u = 1; u < counts.size(); ++u) {
    if (counts[u] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(u);
  }
  return best;
}

ReductionResult sbi_reduce(Learner& learner, std::int64_t t_star,
                           const StrategyId& strategy, const GameConfig& cfg,
                           std::uint64_t trial) {
  if (t_star < 1) throw ConfigError("sbi_reduce: T* must be >= 1");
  ReductionResult r;
  r.game = play_game(cfg, strategy, learner, t_star, trial);
  r.sbi.strategy = strategy;
  r.sbi.truth = strategy.special_batch();
  r.sbi.pulls = r.game.batch_pulls;
  r.sbi.stopping_round = t_star;
  r.sbi.output = argmax_batch(r.sbi.pulls);
  r.sbi.correct = r.sbi.output == r.sbi.truth;
  return r;
}

DisplacementReport pull_fraction_bound_check(const LearnerFactory& factory,
                                             const StrategyId& strategy,
                                             const GameConfig& cfg,
                                             std::int64_t t_star,
                                             std::int64_t trials,
                                             RegretEstimator estimator) {
  const double comparator =
      comparator_expected_loss(strategy, cfg.epsilon, t_star).second;
  std::vector<double> displacement;
  std::vector<double> regret;
  std::vector<double> slack;
  for (std::int64_t i = 0; i < trials; ++i) {
    auto learner = factory(cfg, strategy, static_cast<std::uint64_t>(i));
    const ReductionResult r =
        sbi_reduce(*learner, t_star, strategy, cfg, static_cast<std::uint64_t>(i));
    const double d = static_cast<double>(
        t_star - r.sbi.pulls[static_cast<std::size_t>(strategy.special_batch())]);
    const double reg = trial_regret(r.game, comparator, estimator);
    displacement.push_back(d);
    regret.push_back(reg);
    slack.push_back(reg - cfg.epsilon / 2 * d);
  }
  DisplacementReport rep;
  rep.trials = trials;
  const auto d = stats::mean_and_stderr(displacement);
  const auto g = stats::mean_and_stderr(regret);
  const auto s = stats::mean_and_stderr(slack);
  rep.mean_displacement = d.mean;
  rep.displacement_stderr = d.stderr_mean;
  rep.mean_regret = g.mean;
  rep.regret_stderr = g.stderr_mean;
  rep.lhs = cfg.epsilon / 2 * d.mean;
  rep.slack_mean = s.mean;
  rep.slack_stderr = s.stderr_mean;
  rep.holds = s.mean >= -3.0 * s.stderr_mean;
  return rep;
}

EmbedResult embed_one_batch(Identifier& big, int big_k, int u,
                            const GameConfig& small_cfg,
                            const StrategyId& small_strategy,
                            std::uint64_t trial, const EmbedObserver& observer,
                            const SbiOptions& options) {
  if (small_cfg.k != 1) throw ConfigError("embed_one_batch: small instance needs k = 1");
  if (u < 1 || u > big_k) {
    throw ConfigError(fmt::format("embed_one_batch: batch {} not in 1..{}", u, big_k));
  }
  const int n = small_cfg.n;
  Environment small(small_cfg, small_strategy, trial);

  // Everything outside batch u is simulated from the simulator's own streams.
  AdviceState advice(big_k, n);
  std::vector<RngStream> advice_streams;
  advice_streams.reserve(static_cast<std::size_t>(big_k));
  for (int b = 1; b <= big_k; ++b) {
    advice_streams.emplace_back(small_cfg.seed,
                                StreamLabel{"embed-advice", static_cast<std::uint64_t>(b), trial});
    if (b != u) redraw_batch(advice, b, advice_streams.back());
  }
  RngStream correct_stream(small_cfg.seed, {"embed-correct", 0, trial});
  auto sync_embedded = [&] {
    const auto src = small.advice().batch(1);
    std::copy(src.begin(), src.end(), advice.batch(u).begin());
  };
  sync_embedded();

  EmbedResult result;
  SbiResult& s = result.small;
  s.strategy = small_strategy;
  s.truth = small_strategy.special_batch();
  s.pulls.assign(2, 0);

  while (true) {
    const SbiAction action = big.decide(advice);
    if (const auto* stop = std::get_if<StopWith>(&action)) {
      result.big_output = check_output(*stop, big_k, big.name());
      s.output = result.big_output == u ? 1 : 0;
      break;
    }
    if (result.big_rounds >= options.round_cap) {
      s.output = 0;
      s.truncated = true;
      break;
    }
    const auto& pull = std::get<PullBatch>(action);
    check_pull(pull, big_k, big.name());
    ++result.big_rounds;

    SbiObservation obs{pull.batch, 0, 0, -1};
    int correct = 0;
    if (pull.batch == u) {
      const RoundRecord rec = small.play(ArmId::pair(1, 0));
      correct = rec.losses.correct_side(1);
      obs.loss = rec.revealed;
      ++s.stopping_round;
      ++s.pulls[1];
      if (observer) observer(advice, pull.batch, correct);
      sync_embedded();
    } else {
      correct = correct_stream.bernoulli(0.5) ? 1 : 0;
      obs.loss = correct == 0 ? 0 : 1;
      if (observer) observer(advice, pull.batch, correct);
      redraw_batch(advice, pull.batch,
                   advice_streams[static_cast<std::size_t>(pull.batch - 1)]);
    }
    if (options.mode == ObservationMode::correct_bit) obs.correct_side = correct;
    big.observe(obs);
  }
  s.correct = s.output == s.truth;
  return result;
}

SbiAction RoundRobinIdentifier::decide(const AdviceState&) {
  if (done_ >= steps_) return StopWith{0};
  return PullBatch{static_cast<int>(done_ % k_) + 1};
}

BudgetSearch min_batchscan_budget(const GameConfig& cfg,
                                  std::span<const StrategyId> strategies,
                                  std::int64_t trials, double target,
                                  std::int64_t max_budget) {
  BudgetSearch search;
  auto accuracy_at = [&](std::int64_t m) {
    const auto params = BatchScanParams::with_budget(m, cfg.epsilon);
    const IdentifierFactory factory = [&] {
      return std::make_unique<BatchScan>(cfg.k, cfg.n, params);
    };
    const double acc =
        evaluate_goodness(factory, cfg, strategies, trials).min_accuracy;
    search.evaluated.emplace_back(m, acc);
    return acc;
  };

  std::int64_t hi = 1;
  double acc_hi = accuracy_at(hi);
  while (acc_hi < target) {
    if (hi >= max_budget) {
      throw NumericalFault(fmt::format(
          "no budget up to {} reaches accuracy {}", max_budget, target));
    }
    hi = std::min(hi * 2, max_budget);
    acc_hi = accuracy_at(hi);
  }
  std::int64_t lo = hi / 2;  // fails the target (or is 0)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    const double acc = accuracy_at(mid);
    if (acc >= target) {
      hi = mid;
      acc_hi = acc;
    } else {
      lo = mid;
    }
  }
  search.min_budget = hi;
  search.accuracy_at_min = acc_hi;
  return search;
}

void write_sbi_csv_header(std::ostream& out) {
  out << "strategy,trial,output,stopping_round,T_u,correct\n";
}

void write_sbi_csv_row(std::ostream& out, const SbiResult& r, std::int64_t trial) {
  fmt::print(out, "{},{},{},{},{},{}\n", to_string(r.strategy), trial, r.output,
             r.stopping_round, fmt::join(r.pulls, ";"), r.correct ? 1 : 0);
}

}  // namespace banditlab
