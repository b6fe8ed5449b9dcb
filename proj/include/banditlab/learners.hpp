#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "banditlab/adversary.hpp"
#include "banditlab/identifier.hpp"
#include "banditlab/rng.hpp"

namespace banditlab {

// ---- EXP4 -------------------------------------------------------------------
//
//   p(r)  = (1 - gamma) * sum_{j : e(j) = r} w_j / sum_j w_j + gamma / K
//   I     ~ p
//   est_j = loss / p(I) if e(j) = I, else 0
//   w_j  <- w_j * exp(-eta * est_j), renormalized so that sum_j w_j = N
//
// Weights are kept as logarithms so that long runs cannot underflow them.

struct Exp4Params {
  double eta = 0.0;
  double gamma = 0.0;

  // eta = sqrt(2 ln N / (T K)), gamma = min(1, sqrt(K ln N / T)).
  static Exp4Params defaults(const GameConfig& cfg);
};

// Arm index (GameConfig::arm_index) advised by each expert, in expert order.
std::vector<int> advised_arm_indices(const GameConfig& cfg,
                                     const AdviceState& advice);

std::vector<double> exp4_arm_probabilities(std::span<const double> weights,
                                           std::span<const int> advised_arm,
                                           int num_arms, double gamma);

// Importance-weighted loss estimate of every arm.
std::vector<double> exp4_loss_estimates(std::span<const double> arm_probs,
                                        int pulled, int loss);

// Applies the exponential update to log-weights and shifts them so that the
// weights sum to their count. Throws NumericalFault if p_pulled < 1e-12.
void exp4_update_log_weights(std::span<double> log_weights,
                             std::span<const int> advised_arm, int pulled,
                             double p_pulled, int loss, double eta);

class Exp4Learner : public Learner {
 public:
  Exp4Learner(const GameConfig& cfg, Exp4Params params, RngStream rng);

  ArmId choose(const AdviceState& advice) override;
  void observe(const AdviceState& advice, const ArmId& pulled, int loss) override;
  std::string name() const override { return "exp4"; }

  const Exp4Params& params() const { return params_; }
  // Current weights, normalized to sum N.
  std::vector<double> weights() const;
  std::span<const double> log_weights() const { return log_w_; }
  // Arm distribution for the given advice under the current weights.
  std::vector<double> arm_probabilities(const AdviceState& advice) const;

 private:
  GameConfig cfg_;
  Exp4Params params_;
  RngStream rng_;
  std::vector<double> log_w_;
  std::vector<double> last_probs_;
};

// ---- Baselines --------------------------------------------------------------

// Plays the special expert's advised arm, or arm 0 under S0.
ArmId oracle_choose(const StrategyId& strategy, const AdviceState& advice);

class OracleLearner : public Learner {
 public:
  explicit OracleLearner(StrategyId strategy) : strategy_(strategy) {}
  ArmId choose(const AdviceState& advice) override {
    return oracle_choose(strategy_, advice);
  }
  void observe(const AdviceState&, const ArmId&, int) override {}
  std::string name() const override { return "oracle"; }

 private:
  StrategyId strategy_;
};

// Uniform over all K arms, padded ones included.
class UniformLearner : public Learner {
 public:
  UniformLearner(const GameConfig& cfg, RngStream rng) : cfg_(cfg), rng_(rng) {}
  ArmId choose(const AdviceState&) override {
    return cfg_.arm_at(static_cast<int>(rng_.below(static_cast<std::uint64_t>(cfg_.K))));
  }
  void observe(const AdviceState&, const ArmId&, int) override {}
  std::string name() const override { return "uniform"; }

 private:
  GameConfig cfg_;
  RngStream rng_;
};

class FixedArmLearner : public Learner {
 public:
  explicit FixedArmLearner(ArmId arm) : arm_(arm) {}
  ArmId choose(const AdviceState&) override { return arm_; }
  void observe(const AdviceState&, const ArmId&, int) override {}
  std::string name() const override { return "fixed(" + to_string(arm_) + ")"; }

 private:
  ArmId arm_;
};

// Shows the wrapped learner the previous round's advice instead of the
// current one (all zeros in round 1), turning it into a proper learner.
class ProperLearner : public Learner {
 public:
  ProperLearner(const GameConfig& cfg, std::unique_ptr<Learner> inner);
  ArmId choose(const AdviceState& advice) override;
  void observe(const AdviceState& advice, const ArmId& pulled, int loss) override;
  std::string name() const override { return "proper-" + inner_->name(); }

 private:
  std::unique_ptr<Learner> inner_;
  AdviceState previous_;
};

// ---- Learner selection --------------------------------------------------------

struct LearnerSpec {
  enum class Kind { exp4, uniform, oracle, fixed };

  Kind kind = Kind::exp4;
  std::optional<double> eta;    // nullopt: auto
  std::optional<double> gamma;  // nullopt: auto
  ArmId arm;                    // for Kind::fixed
  bool proper = false;

  std::string label() const;
};

// {"learner": "exp4", "eta": "auto" | x, "gamma": "auto" | x}, {"learner":
// "uniform"}, {"learner": "oracle"}, {"learner": "fixed", "arm": "0" | "u:b"}.
// An optional "proper": true wraps the learner in ProperLearner.
LearnerSpec parse_learner_spec(const nlohmann::json& j);
nlohmann::json learner_spec_to_json(const LearnerSpec& spec);
ArmId parse_arm(const std::string& text);

// The learner's stream is ("learner", 0, trial) under cfg.seed.
std::unique_ptr<Learner> make_learner(const LearnerSpec& spec,
                                      const GameConfig& cfg,
                                      const StrategyId& strategy,
                                      std::uint64_t trial);

// ---- BatchScan identifier -------------------------------------------------------
//
// Pulls batch 1 for m rounds, counting per expert how often its advice matched
// the correct side. Declares the batch special if the best count reaches
// theta, otherwise moves on to the next batch; outputs 0 after batch k.

struct BatchScanParams {
  std::int64_t budget = 0;  // m, rounds per batch
  double threshold = 0.0;   // theta

  // m = ceil(8 ln(n / 0.01) / eps^2), theta = m/2 + (eps/2) m.
  static BatchScanParams defaults(int n, double epsilon);
  // theta = m/2 + (eps/2) m for a given m.
  static BatchScanParams with_budget(std::int64_t m, double epsilon);
};

class BatchScan : public Identifier {
 public:
  BatchScan(int k, int n, BatchScanParams params);

  SbiAction decide(const AdviceState& advice) override;
  void observe(const SbiObservation& obs) override;
  std::string name() const override { return "batchscan"; }

  // Feeds the last observation (if any) and returns the next decision.
  SbiAction step(const AdviceState& advice,
                 const std::optional<SbiObservation>& last);

  int current_batch() const { return batch_; }
  std::span<const std::int64_t> match_counts() const { return counts_; }

 private:
  int k_;
  int n_;
  BatchScanParams params_;
  int batch_ = 1;
  std::int64_t rounds_in_batch_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<std::uint8_t> pending_;
  std::optional<int> decided_;
};

}  // namespace banditlab
