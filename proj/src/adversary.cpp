#include "banditlab/adversary.hpp"

#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace banditlab {

ArmId AdviceState::advised_arm(const ExpertId& expert) const {
  if (!expert.is_pair()) return ArmId::zero();
  return ArmId::pair(expert.batch, bit(expert.batch, expert.index));
}

std::uint64_t AdviceState::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bits_) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string AdviceState::batch_string(int u) const {
  std::string s;
  s.reserve(static_cast<std::size_t>(n_));
  for (std::uint8_t b : batch(u)) s.push_back(b ? '1' : '0');
  return s;
}

int LossVector::loss(const ArmId& arm) const {
  switch (arm.kind) {
    case ArmId::Kind::zero:
      return zero_loss_;
    case ArmId::Kind::pair:
      return arm.side == correct_side(arm.batch) ? 0 : 1;
    case ArmId::Kind::padded:
      return 1;
  }
  return 1;
}

std::string LossVector::correct_string() const {
  std::string s;
  s.reserve(correct_.size());
  for (std::uint8_t c : correct_) s.push_back(c ? '1' : '0');
  return s;
}

void redraw_batch(AdviceState& state, int u, RngStream& rng) {
  auto bits = state.batch(u);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (i % 64 == 0) word = rng.next_u64();
    bits[i] = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
  }
}

AdviceState init_advice(const GameConfig& cfg, RngStream& rng) {
  AdviceState state(cfg.k, cfg.n);
  for (int u = 1; u <= cfg.k; ++u) redraw_batch(state, u, rng);
  return state;
}

AdviceState refresh_advice(const AdviceState& state, const ArmId& pulled,
                           RngStream& rng) {
  AdviceState next = state;
  if (pulled.is_pair()) redraw_batch(next, pulled.batch, rng);
  return next;
}

LossVector draw_losses(const StrategyId& strategy, const AdviceState& state,
                       double epsilon, RngStream& rng) {
  LossVector losses(state.batches());
  losses.set_zero_loss(rng.bernoulli(0.5 - epsilon / 2) ? 1 : 0);
  for (int u = 1; u <= state.batches(); ++u) {
    if (u == strategy.special_batch()) {
      const int advised = state.bit(u, strategy.index);
      const bool advised_loses = rng.bernoulli(0.5 - epsilon);
      losses.set_correct_side(u, advised_loses ? 1 - advised : advised);
    } else {
      const bool side0_loses = rng.bernoulli(0.5);
      losses.set_correct_side(u, side0_loses ? 1 : 0);
    }
  }
  return losses;
}

double expected_arm_loss(const StrategyId& strategy, const AdviceState& state,
                         double epsilon, const ArmId& arm) {
  switch (arm.kind) {
    case ArmId::Kind::zero:
      return 0.5 - epsilon / 2;
    case ArmId::Kind::pair:
      if (arm.batch != strategy.special_batch()) return 0.5;
      return arm.side == state.bit(arm.batch, strategy.index) ? 0.5 - epsilon
                                                              : 0.5 + epsilon;
    case ArmId::Kind::padded:
      return 1.0;
  }
  return 1.0;
}

Environment::Environment(const GameConfig& cfg, StrategyId strategy,
                         std::uint64_t trial)
    : cfg_(cfg),
      strategy_(strategy),
      advice_(cfg.k, cfg.n),
      loss_stream_(cfg.seed, {"loss", 0, trial}) {
  if (!cfg_.is_valid_strategy(strategy_)) {
    throw ConfigError("strategy " + to_string(strategy_) +
                      " not in the pool of this game");
  }
  if (!(cfg_.epsilon >= 0.0 && cfg_.epsilon < 0.5)) {
    throw ConfigError("epsilon must lie in [0, 0.5)");
  }
  advice_streams_.reserve(static_cast<std::size_t>(cfg_.k));
  for (int u = 1; u <= cfg_.k; ++u) {
    advice_streams_.emplace_back(cfg_.seed,
                                 StreamLabel{"advice", static_cast<std::uint64_t>(u), trial});
    redraw_batch(advice_, u, advice_streams_.back());
  }
}

RoundRecord Environment::play(const ArmId& pulled) {
  if (!cfg_.is_valid_arm(pulled)) {
    throw ProtocolViolation("invalid arm " + to_string(pulled));
  }
  RoundRecord rec;
  rec.t = ++t_;
  rec.advice = advice_;
  rec.pulled = pulled;
  rec.losses = draw_losses(strategy_, advice_, cfg_.epsilon, loss_stream_);
  rec.revealed = rec.losses.loss(pulled);
  rec.expected_loss = expected_arm_loss(strategy_, advice_, cfg_.epsilon, pulled);
  if (pulled.is_pair()) {
    redraw_batch(advice_, pulled.batch, advice_streams_[pulled.batch - 1]);
  }
  return rec;
}

RoundRecord run_round(Environment& env, Learner& learner, std::int64_t t) {
  if (t != env.rounds_played() + 1) {
    throw ProtocolViolation(fmt::format("round {} out of order (expected {})", t,
                                        env.rounds_played() + 1));
  }
  if (t > env.config().T) {
    throw ProtocolViolation(
        fmt::format("round {} beyond horizon T={}", t, env.config().T));
  }
  const ArmId arm = learner.choose(env.advice());
  if (!env.config().is_valid_arm(arm)) {
    throw ProtocolViolation(learner.name() + " pulled invalid arm " +
                            to_string(arm));
  }
  RoundRecord rec = env.play(arm);
  learner.observe(rec.advice, rec.pulled, rec.revealed);
  return rec;
}

GameOutcome play_game(const GameConfig& cfg, const StrategyId& strategy,
                      Learner& learner, std::int64_t rounds, std::uint64_t trial,
                      bool keep_trace) {
  GameConfig horizon = cfg;
  horizon.T = rounds;
  Environment env(horizon, strategy, trial);

  GameOutcome out;
  out.batch_pulls.assign(static_cast<std::size_t>(cfg.k) + 1, 0);
  if (keep_trace) out.trace = Trace{horizon, strategy, {}};

  for (std::int64_t t = 1; t <= rounds; ++t) {
    RoundRecord rec = run_round(env, learner, t);
    out.realized_loss += rec.revealed;
    out.expected_loss += rec.expected_loss;
    if (rec.pulled.is_pair()) {
      ++out.batch_pulls[static_cast<std::size_t>(rec.pulled.batch)];
    } else if (rec.pulled.is_zero()) {
      ++out.batch_pulls[0];
    } else {
      ++out.padded_pulls;
    }
    if (keep_trace) out.trace->rounds.push_back(std::move(rec));
  }
  out.rounds = rounds;
  return out;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "t,I_t,loss_pulled,correct_bits,advice_hash\n";
  for (const auto& rec : trace.rounds) {
    fmt::print(out, "{},{},{},{},{:016x}\n", rec.t, to_string(rec.pulled),
               rec.revealed, rec.losses.correct_string(), rec.advice.hash());
  }
}

void write_advice_jsonl(std::ostream& out, const Trace& trace,
                        std::size_t max_bytes) {
  const auto& cfg = trace.config;
  const std::size_t per_round =
      static_cast<std::size_t>(cfg.k) * (static_cast<std::size_t>(cfg.n) + 3) + 32;
  if (per_round * trace.rounds.size() > max_bytes) {
    throw ConfigError(fmt::format(
        "advice export of {} rounds would exceed {} bytes", trace.rounds.size(),
        max_bytes));
  }
  for (const auto& rec : trace.rounds) {
    nlohmann::json batches = nlohmann::json::array();
    for (int u = 1; u <= rec.advice.batches(); ++u) {
      batches.push_back(rec.advice.batch_string(u));
    }
    out << nlohmann::json{{"t", rec.t}, {"advice", batches}}.dump() << '\n';
  }
}

}  // namespace banditlab
