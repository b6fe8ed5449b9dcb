#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace banditlab {

// Raised for invalid dimensions or parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a learner or identifier breaks the round protocol.
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an update would divide by a vanishing probability.
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arm 0, a batch arm (u, b) with u in [1..k] and b in {0,1}, or a padded arm
// that always has loss 1.
struct ArmId {
  enum class Kind : std::uint8_t { zero, pair, padded };

  Kind kind = Kind::zero;
  int batch = 0;  // u for pair arms, padding index for padded arms
  int side = 0;

  static constexpr ArmId zero() { return {}; }
  static constexpr ArmId pair(int u, int b) { return {Kind::pair, u, b}; }
  static constexpr ArmId padded(int i) { return {Kind::padded, i, 0}; }

  bool is_zero() const { return kind == Kind::zero; }
  bool is_pair() const { return kind == Kind::pair; }
  bool is_padded() const { return kind == Kind::padded; }

  friend bool operator==(const ArmId&, const ArmId&) = default;
};

// Expert 0, batch expert (u, v), or a padded expert (which advises arm 0).
struct ExpertId {
  enum class Kind : std::uint8_t { zero, pair, padded };

  Kind kind = Kind::zero;
  int batch = 0;
  int index = 0;

  static constexpr ExpertId zero() { return {}; }
  static constexpr ExpertId pair(int u, int v) { return {Kind::pair, u, v}; }
  static constexpr ExpertId padded(int i) { return {Kind::padded, i, 0}; }

  bool is_zero() const { return kind == Kind::zero; }
  bool is_pair() const { return kind == Kind::pair; }

  friend bool operator==(const ExpertId&, const ExpertId&) = default;
};

// S0 (null) or S(u*, v*). The special batch is 0 under the null strategy.
struct StrategyId {
  int batch = 0;  // u*, 0 for the null strategy
  int index = 0;  // v*, 0 for the null strategy

  static constexpr StrategyId null() { return {}; }
  static constexpr StrategyId special(int u, int v) { return {u, v}; }

  bool is_null() const { return batch == 0; }
  int special_batch() const { return batch; }

  friend bool operator==(const StrategyId&, const StrategyId&) = default;
};

std::string to_string(const ArmId& arm);
std::string to_string(const ExpertId& expert);
std::string to_string(const StrategyId& strategy);
// Parses "S0", "S(u:v)" or "S(u,v)".
StrategyId parse_strategy(const std::string& text);

struct PaddingPlan {
  int arms = 0;     // arms beyond 2k+1, constant loss 1
  int experts = 0;  // experts beyond kn+1, advise arm 0

  friend bool operator==(const PaddingPlan&, const PaddingPlan&) = default;
};

struct ReducedDims {
  int k = 0;
  int n = 0;
  PaddingPlan padding;

  friend bool operator==(const ReducedDims&, const ReducedDims&) = default;
};

// Largest k with 2k+1 <= K and largest n with kn+1 <= N.
ReducedDims derive_reduced_dims(int K, int N);

struct GameConfig {
  int K = 3;
  int N = 11;
  std::int64_t T = 1;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  StrategyId strategy;

  // Derived by make_config.
  int k = 1;
  int n = 10;
  PaddingPlan padding;

  int num_arms() const { return K; }
  int num_experts() const { return N; }

  int arm_index(const ArmId& arm) const;
  ArmId arm_at(int index) const;
  bool is_valid_arm(const ArmId& arm) const;

  int expert_index(const ExpertId& expert) const;
  ExpertId expert_at(int index) const;

  bool is_valid_strategy(const StrategyId& s) const;
  // S0 followed by every S(u,v), u-major.
  std::vector<StrategyId> strategy_pool() const;
};

GameConfig make_config(int K, int N, std::int64_t T, double epsilon,
                       std::uint64_t seed = 0,
                       StrategyId strategy = StrategyId::null());

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

ValidationReport validate_config(const GameConfig& cfg);

void to_json(nlohmann::json& j, const StrategyId& s);
void from_json(const nlohmann::json& j, StrategyId& s);
void to_json(nlohmann::json& j, const GameConfig& cfg);
// Reads {K, N, T, epsilon, seed, strategy} and derives the batch structure.
void from_json(const nlohmann::json& j, GameConfig& cfg);

}  // namespace banditlab
