#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "banditlab/core.hpp"
#include "banditlab/rng.hpp"

namespace banditlab {

// Binary advice of the k batches: bit (u, v) is the side expert (u, v)
// advises, i.e. it recommends arm (u, bit). Expert 0 and padded experts always
// advise arm 0 and are not stored.
class AdviceState {
 public:
  AdviceState() = default;
  AdviceState(int k, int n) : k_(k), n_(n), bits_(static_cast<std::size_t>(k) * n, 0) {}

  int batches() const { return k_; }
  int batch_size() const { return n_; }

  std::uint8_t bit(int u, int v) const { return bits_[offset(u) + (v - 1)]; }
  void set_bit(int u, int v, std::uint8_t b) { bits_[offset(u) + (v - 1)] = b; }

  std::span<const std::uint8_t> batch(int u) const {
    return {bits_.data() + offset(u), static_cast<std::size_t>(n_)};
  }
  std::span<std::uint8_t> batch(int u) {
    return {bits_.data() + offset(u), static_cast<std::size_t>(n_)};
  }

  ArmId advised_arm(const ExpertId& expert) const;

  // FNV-1a over all bits, batch-major.
  std::uint64_t hash() const;
  // Batch u as a string of '0'/'1'.
  std::string batch_string(int u) const;

  friend bool operator==(const AdviceState&, const AdviceState&) = default;

 private:
  std::size_t offset(int u) const { return static_cast<std::size_t>(u - 1) * n_; }

  int k_ = 0;
  int n_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Losses of one round. Each batch stores its correct side c_u, so that
// loss(u, c_u) = 0 and loss(u, 1 - c_u) = 1; padded arms always lose.
class LossVector {
 public:
  LossVector() = default;
  explicit LossVector(int k) : correct_(static_cast<std::size_t>(k), 0) {}

  int zero_loss() const { return zero_loss_; }
  void set_zero_loss(int loss) { zero_loss_ = loss; }

  int correct_side(int u) const { return correct_[u - 1]; }
  void set_correct_side(int u, int side) {
    correct_[u - 1] = static_cast<std::uint8_t>(side);
  }
  int batches() const { return static_cast<int>(correct_.size()); }

  int loss(const ArmId& arm) const;
  // Correct sides of batches 1..k as a string of '0'/'1'.
  std::string correct_string() const;

  friend bool operator==(const LossVector&, const LossVector&) = default;

 private:
  int zero_loss_ = 0;
  std::vector<std::uint8_t> correct_;
};

// Fills batch u with iid fair bits.
void redraw_batch(AdviceState& state, int u, RngStream& rng);

// Every entry iid Ber(1/2), drawn batch by batch from a single stream.
AdviceState init_advice(const GameConfig& cfg, RngStream& rng);

// Redraws the batch of the pulled arm; every other batch is copied unchanged.
AdviceState refresh_advice(const AdviceState& state, const ArmId& pulled,
                           RngStream& rng);

LossVector draw_losses(const StrategyId& strategy, const AdviceState& state,
                       double epsilon, RngStream& rng);

// Expected loss of `arm` given the current advice, before losses are drawn.
double expected_arm_loss(const StrategyId& strategy, const AdviceState& state,
                         double epsilon, const ArmId& arm);

struct RoundRecord {
  std::int64_t t = 0;
  AdviceState advice;
  ArmId pulled;
  LossVector losses;
  int revealed = 0;
  double expected_loss = 0.0;  // expected_arm_loss of the pulled arm
};

struct Trace {
  GameConfig config;
  StrategyId strategy;
  std::vector<RoundRecord> rounds;
};

// Learner-facing side of the round protocol: sees the advice of the current
// round, pulls an arm, then learns only the loss of that arm.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual ArmId choose(const AdviceState& advice) = 0;
  virtual void observe(const AdviceState& advice, const ArmId& pulled,
                       int loss) = 0;
  virtual std::string name() const = 0;
};

// The adaptive adversary of one trial. Advice of batch u is drawn from stream
// ("advice", u, trial) and losses from ("loss", 0, trial), all under cfg.seed.
class Environment {
 public:
  Environment(const GameConfig& cfg, StrategyId strategy, std::uint64_t trial = 0);

  const GameConfig& config() const { return cfg_; }
  const StrategyId& strategy() const { return strategy_; }
  const AdviceState& advice() const { return advice_; }
  std::int64_t rounds_played() const { return t_; }

  // Draws this round's losses, then refreshes the batch of `pulled`.
  RoundRecord play(const ArmId& pulled);

 private:
  GameConfig cfg_;
  StrategyId strategy_;
  AdviceState advice_;
  std::vector<RngStream> advice_streams_;
  RngStream loss_stream_;
  std::int64_t t_ = 0;
};

// One round: advice shown, arm chosen, losses drawn, own loss revealed,
// advice refreshed. `t` must be the next round index and at most cfg.T.
RoundRecord run_round(Environment& env, Learner& learner, std::int64_t t);

struct GameOutcome {
  std::int64_t rounds = 0;
  std::int64_t realized_loss = 0;
  double expected_loss = 0.0;            // sum of per-round expected_loss
  std::vector<std::int64_t> batch_pulls;  // index 0: arm 0, u: batch u
  std::int64_t padded_pulls = 0;
  std::optional<Trace> trace;
};

GameOutcome play_game(const GameConfig& cfg, const StrategyId& strategy,
                      Learner& learner, std::int64_t rounds,
                      std::uint64_t trial = 0, bool keep_trace = false);

// One row per round: t, pulled arm, revealed loss, correct sides, advice hash.
void write_trace_csv(std::ostream& out, const Trace& trace);

// One JSON object per round with the full advice. Throws ConfigError if the
// output would exceed max_bytes.
void write_advice_jsonl(std::ostream& out, const Trace& trace,
                        std::size_t max_bytes = std::size_t{64} << 20);

}  // namespace banditlab
