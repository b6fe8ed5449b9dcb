#include "banditlab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace banditlab {

Exp4Params Exp4Params::defaults(const GameConfig& cfg) {
  const double K = cfg.K;
  const double T = static_cast<double>(std::max<std::int64_t>(cfg.T, 1));
  const double log_n = std::log(static_cast<double>(cfg.N));
  return {std::sqrt(2.0 * log_n / (T * K)),
          std::min(1.0, std::sqrt(K * log_n / T))};
}

std::vector<int> advised_arm_indices(const GameConfig& cfg,
                                     const AdviceState& advice) {
  std::vector<int> arms(static_cast<std::size_t>(cfg.N), 0);
  for (int u = 1; u <= cfg.k; ++u) {
    const auto row = advice.batch(u);
    const int base = 1 + 2 * (u - 1);
    for (int v = 1; v <= cfg.n; ++v) {
      arms[static_cast<std::size_t>(1 + (u - 1) * cfg.n + (v - 1))] =
          base + row[static_cast<std::size_t>(v - 1)];
    }
  }
  return arms;
}

std::vector<double> exp4_arm_probabilities(std::span<const double> weights,
                                           std::span<const int> advised_arm,
                                           int num_arms, double gamma) {
  std::vector<double> mass(static_cast<std::size_t>(num_arms), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    mass[static_cast<std::size_t>(advised_arm[j])] += weights[j];
    total += weights[j];
  }
  const double explore = gamma / num_arms;
  for (double& p : mass) p = (1.0 - gamma) * p / total + explore;
  return mass;
}

std::vector<double> exp4_loss_estimates(std::span<const double> arm_probs,
                                        int pulled, int loss) {
  std::vector<double> est(arm_probs.size(), 0.0);
  const double p = arm_probs[static_cast<std::size_t>(pulled)];
  if (p < 1e-12) {
    throw NumericalFault(fmt::format("p(pulled)={:.3g} below 1e-12", p));
  }
  est[static_cast<std::size_t>(pulled)] = loss / p;
  return est;
}

void exp4_update_log_weights(std::span<double> log_weights,
                             std::span<const int> advised_arm, int pulled,
                             double p_pulled, int loss, double eta) {
  if (p_pulled < 1e-12) {
    throw NumericalFault(fmt::format("p(pulled)={:.3g} below 1e-12", p_pulled));
  }
  const double step = eta * loss / p_pulled;
  if (step != 0.0) {
    for (std::size_t j = 0; j < log_weights.size(); ++j) {
      if (advised_arm[j] == pulled) log_weights[j] -= step;
    }
  }
  // Shift so that sum_j exp(log_w_j) = count.
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double sum = 0.0;
  for (double lw : log_weights) sum += std::exp(lw - top);
  const double shift =
      std::log(static_cast<double>(log_weights.size())) - (top + std::log(sum));
  for (double& lw : log_weights) lw += shift;
}

Exp4Learner::Exp4Learner(const GameConfig& cfg, Exp4Params params, RngStream rng)
    : cfg_(cfg),
      params_(params),
      rng_(rng),
      log_w_(static_cast<std::size_t>(cfg.N), 0.0) {
  if (!(params_.eta > 0.0)) throw ConfigError("exp4: eta must be > 0");
  if (!(params_.gamma >= 0.0 && params_.gamma <= 1.0)) {
    throw ConfigError("exp4: gamma must lie in [0, 1]");
  }
}

std::vector<double> Exp4Learner::weights() const {
  std::vector<double> w(log_w_.size());
  std::transform(log_w_.begin(), log_w_.end(), w.begin(),
                 [](double lw) { return std::exp(lw); });
  return w;
}

std::vector<double> Exp4Learner::arm_probabilities(const AdviceState& advice) const {
  const auto arms = advised_arm_indices(cfg_, advice);
  const double top = *std::max_element(log_w_.begin(), log_w_.end());
  std::vector<double> scaled(log_w_.size());
  std::transform(log_w_.begin(), log_w_.end(), scaled.begin(),
                 [top](double lw) { return std::exp(lw - top); });
  return exp4_arm_probabilities(scaled, arms, cfg_.K, params_.gamma);
}

ArmId Exp4Learner::choose(const AdviceState& advice) {
  last_probs_ = arm_probabilities(advice);
  const double x = rng_.uniform();
  double acc = 0.0;
  int chosen = cfg_.K - 1;
  for (int r = 0; r < cfg_.K; ++r) {
    acc += last_probs_[static_cast<std::size_t>(r)];
    if (x < acc) {
      chosen = r;
      break;
    }
  }
  // Rounding can leave the tail short of 1; never land on a zero-mass arm.
  while (last_probs_[static_cast<std::size_t>(chosen)] <= 0.0 && chosen > 0) --chosen;
  return cfg_.arm_at(chosen);
}

void Exp4Learner::observe(const AdviceState& advice, const ArmId& pulled, int loss) {
  if (last_probs_.empty()) last_probs_ = arm_probabilities(advice);
  const int idx = cfg_.arm_index(pulled);
  const auto arms = advised_arm_indices(cfg_, advice);
  exp4_update_log_weights(log_w_, arms, idx,
                          last_probs_[static_cast<std::size_t>(idx)], loss,
                          params_.eta);
  last_probs_.clear();
}

ArmId oracle_choose(const StrategyId& strategy, const AdviceState& advice) {
  if (strategy.is_null()) return ArmId::zero();
  return ArmId::pair(strategy.batch, advice.bit(strategy.batch, strategy.index));
}

ProperLearner::ProperLearner(const GameConfig& cfg, std::unique_ptr<Learner> inner)
    : inner_(std::move(inner)), previous_(cfg.k, cfg.n) {}

ArmId ProperLearner::choose(const AdviceState&) { return inner_->choose(previous_); }

void ProperLearner::observe(const AdviceState& advice, const ArmId& pulled,
                            int loss) {
  inner_->observe(previous_, pulled, loss);
  previous_ = advice;
}

std::string LearnerSpec::label() const {
  std::string base;
  switch (kind) {
    case Kind::exp4:
      base = "exp4";
      if (eta) base += fmt::format("[eta={}]", *eta);
      if (gamma) base += fmt::format("[gamma={}]", *gamma);
      break;
    case Kind::uniform:
      base = "uniform";
      break;
    case Kind::oracle:
      base = "oracle";
      break;
    case Kind::fixed:
      base = "fixed(" + to_string(arm) + ")";
      break;
  }
  return proper ? "proper-" + base : base;
}

ArmId parse_arm(const std::string& text) {
  if (text == "0") return ArmId::zero();
  if (text.rfind("pad", 0) == 0) return ArmId::padded(std::stoi(text.substr(3)));
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("unrecognized arm '" + text + "'");
  try {
    return ArmId::pair(std::stoi(text.substr(0, colon)),
                       std::stoi(text.substr(colon + 1)));
  } catch (const std::exception&) {
    throw ConfigError("unrecognized arm '" + text + "'");
  }
}

namespace {

std::optional<double> auto_or_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  if (v.is_number()) return v.get<double>();
  throw ConfigError(fmt::format("'{}' must be \"auto\" or a number", key));
}

}  // namespace

LearnerSpec parse_learner_spec(const nlohmann::json& j) {
  LearnerSpec spec;
  const std::string kind = j.is_string() ? j.get<std::string>()
                                         : j.at("learner").get<std::string>();
  if (kind == "exp4") {
    spec.kind = LearnerSpec::Kind::exp4;
  } else if (kind == "uniform") {
    spec.kind = LearnerSpec::Kind::uniform;
  } else if (kind == "oracle") {
    spec.kind = LearnerSpec::Kind::oracle;
  } else if (kind == "fixed") {
    spec.kind = LearnerSpec::Kind::fixed;
    spec.arm = parse_arm(j.at("arm").get<std::string>());
  } else {
    throw ConfigError("unknown learner '" + kind + "'");
  }
  if (j.is_object()) {
    spec.eta = auto_or_number(j, "eta");
    spec.gamma = auto_or_number(j, "gamma");
    spec.proper = j.value("proper", false);
  }
  return spec;
}

nlohmann::json learner_spec_to_json(const LearnerSpec& spec) {
  nlohmann::json j;
  switch (spec.kind) {
    case LearnerSpec::Kind::exp4:
      j["learner"] = "exp4";
      j["eta"] = spec.eta ? nlohmann::json(*spec.eta) : nlohmann::json("auto");
      j["gamma"] = spec.gamma ? nlohmann::json(*spec.gamma) : nlohmann::json("auto");
      break;
    case LearnerSpec::Kind::uniform:
      j["learner"] = "uniform";
      break;
    case LearnerSpec::Kind::oracle:
      j["learner"] = "oracle";
      break;
    case LearnerSpec::Kind::fixed:
      j["learner"] = "fixed";
      j["arm"] = to_string(spec.arm);
      break;
  }
  if (spec.proper) j["proper"] = true;
  return j;
}

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec,
                                      const GameConfig& cfg,
                                      const StrategyId& strategy,
                                      std::uint64_t trial) {
  RngStream rng(cfg.seed, {"learner", 0, trial});
  std::unique_ptr<Learner> learner;
  switch (spec.kind) {
    case LearnerSpec::Kind::exp4: {
      Exp4Params params = Exp4Params::defaults(cfg);
      if (spec.eta) params.eta = *spec.eta;
      if (spec.gamma) params.gamma = *spec.gamma;
      learner = std::make_unique<Exp4Learner>(cfg, params, rng);
      break;
    }
    case LearnerSpec::Kind::uniform:
      learner = std::make_unique<UniformLearner>(cfg, rng);
      break;
    case LearnerSpec::Kind::oracle:
      learner = std::make_unique<OracleLearner>(strategy);
      break;
    case LearnerSpec::Kind::fixed:
      if (!cfg.is_valid_arm(spec.arm)) {
        throw ConfigError("fixed learner arm " + to_string(spec.arm) +
                          " not in this game");
      }
      learner = std::make_unique<FixedArmLearner>(spec.arm);
      break;
  }
  if (spec.proper) return std::make_unique<ProperLearner>(cfg, std::move(learner));
  return learner;
}

BatchScanParams BatchScanParams::defaults(int n, double epsilon) {
  const auto m = static_cast<std::int64_t>(
      std::ceil(8.0 * std::log(n / 0.01) / (epsilon * epsilon)));
  return with_budget(m, epsilon);
}

BatchScanParams BatchScanParams::with_budget(std::int64_t m, double epsilon) {
  const double md = static_cast<double>(m);
  return {m, md / 2 + (epsilon / 2) * md};
}

BatchScan::BatchScan(int k, int n, BatchScanParams params)
    : k_(k), n_(n), params_(params), counts_(static_cast<std::size_t>(n), 0) {}

SbiAction BatchScan::decide(const AdviceState& advice) {
  if (decided_) return StopWith{*decided_};
  if (params_.budget <= 0) {
    decided_ = 0;
    return StopWith{0};
  }
  while (true) {
    if (batch_ > k_) {
      decided_ = 0;
      return StopWith{0};
    }
    if (rounds_in_batch_ < params_.budget) break;
    const auto best = *std::max_element(counts_.begin(), counts_.end());
    if (static_cast<double>(best) >= params_.threshold) {
      decided_ = batch_;
      return StopWith{batch_};
    }
    ++batch_;
    rounds_in_batch_ = 0;
    std::fill(counts_.begin(), counts_.end(), 0);
  }
  const auto row = advice.batch(batch_);
  pending_.assign(row.begin(), row.end());
  return PullBatch{batch_};
}

void BatchScan::observe(const SbiObservation& obs) {
  if (obs.batch != batch_ || pending_.empty()) {
    throw ProtocolViolation(
        fmt::format("batchscan: observation for batch {} while scanning {}",
                    obs.batch, batch_));
  }
  const int correct = obs.resolved_correct_side();
  for (int v = 0; v < n_; ++v) {
    counts_[static_cast<std::size_t>(v)] += pending_[static_cast<std::size_t>(v)] == correct;
  }
  pending_.clear();
  ++rounds_in_batch_;
}

SbiAction BatchScan::step(const AdviceState& advice,
                          const std::optional<SbiObservation>& last) {
  if (last) observe(*last);
  return decide(advice);
}

}  // namespace banditlab
