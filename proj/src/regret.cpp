#include "banditlab/regret.hpp"

#include "banditlab/stats.hpp"

namespace banditlab {

std::pair<ExpertId, double> comparator_expected_loss(const StrategyId& strategy,
                                                     double epsilon,
                                                     std::int64_t rounds) {
  const double T = static_cast<double>(rounds);
  if (strategy.is_null()) return {ExpertId::zero(), (0.5 - epsilon / 2) * T};
  return {ExpertId::pair(strategy.batch, strategy.index), (0.5 - epsilon) * T};
}

std::pair<ExpertId, double> comparator_expected_loss(const StrategyId& strategy,
                                                     const GameConfig& cfg) {
  return comparator_expected_loss(strategy, cfg.epsilon, cfg.T);
}

const char* to_string(RegretEstimator e) {
  return e == RegretEstimator::realized ? "realized" : "conditional";
}

RegretEstimator parse_estimator(const std::string& text) {
  if (text == "realized") return RegretEstimator::realized;
  if (text == "conditional") return RegretEstimator::conditional;
  throw ConfigError("estimator must be 'realized' or 'conditional', got '" + text + "'");
}

double trial_regret(const GameOutcome& outcome, double comparator_loss,
                    RegretEstimator estimator) {
  const double loss = estimator == RegretEstimator::realized
                          ? static_cast<double>(outcome.realized_loss)
                          : outcome.expected_loss;
  return loss - comparator_loss;
}

RegretReport estimate_pseudo_regret(std::span<const GameOutcome> outcomes,
                                    const StrategyId& strategy,
                                    const GameConfig& cfg,
                                    RegretEstimator estimator) {
  if (outcomes.size() < 2) {
    throw ConfigError("estimate_pseudo_regret needs at least two trials");
  }
  RegretReport report;
  std::vector<double> regrets;
  regrets.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    const auto [expert, loss] = comparator_expected_loss(strategy, cfg.epsilon, o.rounds);
    report.comparator = expert;
    report.comparator_loss = loss;
    regrets.push_back(trial_regret(o, loss, estimator));
  }
  const auto ms = stats::mean_and_stderr(regrets);
  report.mean_regret = ms.mean;
  report.stderr_regret = ms.stderr_mean;
  report.trials = static_cast<std::int64_t>(outcomes.size());
  return report;
}

}  // namespace banditlab
