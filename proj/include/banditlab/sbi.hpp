#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "banditlab/adversary.hpp"
#include "banditlab/identifier.hpp"
#include "banditlab/regret.hpp"

namespace banditlab {

enum class ObservationMode { correct_bit, raw_loss };

struct SbiOptions {
  std::int64_t round_cap = 100'000'000;
  ObservationMode mode = ObservationMode::correct_bit;
};

struct SbiResult {
  StrategyId strategy;
  int output = 0;
  int truth = 0;  // special batch of the strategy
  std::int64_t stopping_round = 0;
  std::vector<std::int64_t> pulls;  // index 0: arm 0, u: batch u
  bool correct = false;
  bool truncated = false;
};

// Plays the identification game until the identifier stops. A pull of batch u
// is executed as arm (u, 0); pulling arm 0 is a protocol violation. Hitting
// the round cap truncates the run with output 0.
SbiResult run_sbi(Identifier& identifier, const StrategyId& strategy,
                  const GameConfig& cfg, std::uint64_t trial = 0,
                  const SbiOptions& options = {});

using IdentifierFactory = std::function<std::unique_ptr<Identifier>()>;

struct StrategyAccuracy {
  StrategyId strategy;
  double accuracy = 0.0;
  double radius = 0.0;  // 3 sigma
  double mean_stopping_round = 0.0;
  std::int64_t trials = 0;
  std::int64_t truncated = 0;
};

struct GoodnessReport {
  std::vector<StrategyAccuracy> per_strategy;
  std::int64_t trials = 0;
  double min_accuracy = 0.0;
  bool good = false;         // min accuracy >= 0.95
  bool meets_0_99 = false;   // min accuracy >= 0.99
};

// Trial i of every strategy uses environment trial index i.
GoodnessReport evaluate_goodness(const IdentifierFactory& factory,
                                 const GameConfig& cfg,
                                 std::span<const StrategyId> strategies,
                                 std::int64_t trials,
                                 const SbiOptions& options = {},
                                 std::vector<SbiResult>* results = nullptr);

// Null plus S(u, 1) for every batch; experts within a batch are exchangeable,
// so these cover every distinct behaviour of a batch-symmetric identifier.
std::vector<StrategyId> representative_strategies(const GameConfig& cfg);

// argmax over counts with ties going to the lowest index.
int argmax_batch(std::span<const std::int64_t> counts);

struct ReductionResult {
  SbiResult sbi;
  GameOutcome game;
};

// Runs the learner for exactly t_star rounds of the full game and outputs the
// batch (arm 0 counting as batch 0) it pulled most often.
ReductionResult sbi_reduce(Learner& learner, std::int64_t t_star,
                           const StrategyId& strategy, const GameConfig& cfg,
                           std::uint64_t trial = 0);

using LearnerFactory = std::function<std::unique_ptr<Learner>(
    const GameConfig&, const StrategyId&, std::uint64_t trial)>;

struct DisplacementReport {
  double mean_displacement = 0.0;  // E[T* - T_{u*}]
  double displacement_stderr = 0.0;
  double mean_regret = 0.0;
  double regret_stderr = 0.0;
  double lhs = 0.0;          // eps/2 * mean displacement
  double slack_mean = 0.0;   // mean of regret - eps/2 * displacement, per trial
  double slack_stderr = 0.0;
  bool holds = false;        // slack_mean >= -3 * slack_stderr
  std::int64_t trials = 0;
};

// Checks eps/2 * E[T* - T_{u*}] <= pseudo-regret on paired trials.
DisplacementReport pull_fraction_bound_check(
    const LearnerFactory& factory, const StrategyId& strategy,
    const GameConfig& cfg, std::int64_t t_star, std::int64_t trials,
    RegretEstimator estimator = RegretEstimator::realized);

// Visits one step of the simulated big instance: the advice shown, the batch
// queried and the correct side handed back.
using EmbedObserver =
    std::function<void(const AdviceState& advice, int batch, int correct_side)>;

struct EmbedResult {
  SbiResult small;          // the run of the one-batch instance
  int big_output = 0;       // what the big identifier declared
  std::int64_t big_rounds = 0;
};

// Runs a big-instance identifier (big_k batches of the small instance's size)
// against a one-batch instance by embedding that instance as batch u. Queries
// to other batches are answered with self-drawn fair correct sides and
// self-refreshed advice; only queries to u consume small-instance rounds. The
// output maps u to 1 and everything else to 0.
EmbedResult embed_one_batch(Identifier& big, int big_k, int u,
                            const GameConfig& small_cfg,
                            const StrategyId& small_strategy,
                            std::uint64_t trial = 0,
                            const EmbedObserver& observer = {},
                            const SbiOptions& options = {});

// Cycles through batches 1..k for a fixed number of pulls, then outputs 0.
class RoundRobinIdentifier : public Identifier {
 public:
  RoundRobinIdentifier(int k, std::int64_t steps) : k_(k), steps_(steps) {}
  SbiAction decide(const AdviceState&) override;
  void observe(const SbiObservation&) override { ++done_; }
  std::string name() const override { return "roundrobin"; }

 private:
  int k_;
  std::int64_t steps_;
  std::int64_t done_ = 0;
};

struct BudgetSearch {
  std::int64_t min_budget = 0;
  double accuracy_at_min = 0.0;
  std::vector<std::pair<std::int64_t, double>> evaluated;  // (m, min accuracy)
};

// Smallest BatchScan budget m (with theta = m/2 + (eps/2) m) whose minimum
// accuracy over `strategies` reaches `target`. Doubles m until the target is
// met, then bisects, treating accuracy as nondecreasing in m. Every candidate
// reuses trial indices 0..trials-1.
BudgetSearch min_batchscan_budget(const GameConfig& cfg,
                                  std::span<const StrategyId> strategies,
                                  std::int64_t trials, double target = 0.95,
                                  std::int64_t max_budget = 1 << 24);

void write_sbi_csv_header(std::ostream& out);
void write_sbi_csv_row(std::ostream& out, const SbiResult& r, std::int64_t trial);

}  // namespace banditlab
