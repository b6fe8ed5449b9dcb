#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "banditlab/adversary.hpp"
#include "banditlab/core.hpp"

namespace banditlab {

// The expert with the smallest expected per-round loss under `strategy`, with
// its expected cumulative loss over `rounds` rounds: expert 0 at
// (1/2 - eps/2) per round under S0, expert (u, v) at (1/2 - eps) under S(u, v).
std::pair<ExpertId, double> comparator_expected_loss(const StrategyId& strategy,
                                                     double epsilon,
                                                     std::int64_t rounds);
std::pair<ExpertId, double> comparator_expected_loss(const StrategyId& strategy,
                                                     const GameConfig& cfg);

// How a trial's learner loss enters the regret estimate. `realized` uses the
// sampled cumulative loss; `conditional` uses the sum of the pulled arms'
// expected losses given the advice, which has the same expectation with far
// less variance.
enum class RegretEstimator { realized, conditional };

const char* to_string(RegretEstimator e);
RegretEstimator parse_estimator(const std::string& text);

double trial_regret(const GameOutcome& outcome, double comparator_loss,
                    RegretEstimator estimator);

struct RegretReport {
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  ExpertId comparator;
  double comparator_loss = 0.0;
  std::int64_t trials = 0;
};

// Mean over trials of learner loss minus the comparator's exact expected loss.
// Requires at least two trials.
RegretReport estimate_pseudo_regret(std::span<const GameOutcome> outcomes,
                                    const StrategyId& strategy,
                                    const GameConfig& cfg,
                                    RegretEstimator estimator = RegretEstimator::realized);

}  // namespace banditlab
