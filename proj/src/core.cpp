#include "banditlab/core.hpp"

#include <cmath>
#include <regex>

#include <fmt/format.h>

namespace banditlab {

std::string to_string(const ArmId& arm) {
  switch (arm.kind) {
    case ArmId::Kind::zero:
      return "0";
    case ArmId::Kind::pair:
      return fmt::format("{}:{}", arm.batch, arm.side);
    case ArmId::Kind::padded:
      return fmt::format("pad{}", arm.batch);
  }
  return "?";
}

std::string to_string(const ExpertId& expert) {
  switch (expert.kind) {
    case ExpertId::Kind::zero:
      return "0";
    case ExpertId::Kind::pair:
      return fmt::format("{}:{}", expert.batch, expert.index);
    case ExpertId::Kind::padded:
      return fmt::format("pad{}", expert.batch);
  }
  return "?";
}

std::string to_string(const StrategyId& strategy) {
  if (strategy.is_null()) return "S0";
  return fmt::format("S({}:{})", strategy.batch, strategy.index);
}

StrategyId parse_strategy(const std::string& text) {
  if (text == "S0" || text == "s0" || text == "null") return StrategyId::null();
  static const std::regex pattern(R"(\s*S?\(?\s*(\d+)\s*[,:]\s*(\d+)\s*\)?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) {
    throw ConfigError("unrecognized strategy '" + text + "'");
  }
  return StrategyId::special(std::stoi(m[1]), std::stoi(m[2]));
}

ReducedDims derive_reduced_dims(int K, int N) {
  if (K < 3) throw ConfigError(fmt::format("K={} < 3: no batch structure", K));
  if (N < K) throw ConfigError(fmt::format("N={} < K={}", N, K));
  ReducedDims d;
  d.k = (K - 1) / 2;
  d.n = (N - 1) / d.k;
  d.padding.arms = K - (2 * d.k + 1);
  d.padding.experts = N - (d.k * d.n + 1);
  return d;
}

GameConfig make_config(int K, int N, std::int64_t T, double epsilon,
                       std::uint64_t seed, StrategyId strategy) {
  const ReducedDims d = derive_reduced_dims(K, N);
  GameConfig cfg;
  cfg.K = K;
  cfg.N = N;
  cfg.T = T;
  cfg.epsilon = epsilon;
  cfg.seed = seed;
  cfg.strategy = strategy;
  cfg.k = d.k;
  cfg.n = d.n;
  cfg.padding = d.padding;
  return cfg;
}

int GameConfig::arm_index(const ArmId& arm) const {
  switch (arm.kind) {
    case ArmId::Kind::zero:
      return 0;
    case ArmId::Kind::pair:
      return 1 + 2 * (arm.batch - 1) + arm.side;
    case ArmId::Kind::padded:
      return 1 + 2 * k + arm.batch;
  }
  return -1;
}

ArmId GameConfig::arm_at(int index) const {
  if (index < 0 || index >= K) {
    throw std::out_of_range(fmt::format("arm index {} out of range", index));
  }
  if (index == 0) return ArmId::zero();
  if (index <= 2 * k) return ArmId::pair((index - 1) / 2 + 1, (index - 1) % 2);
  return ArmId::padded(index - 1 - 2 * k);
}

bool GameConfig::is_valid_arm(const ArmId& arm) const {
  switch (arm.kind) {
    case ArmId::Kind::zero:
      return true;
    case ArmId::Kind::pair:
      return arm.batch >= 1 && arm.batch <= k && (arm.side == 0 || arm.side == 1);
    case ArmId::Kind::padded:
      return arm.batch >= 0 && arm.batch < padding.arms;
  }
  return false;
}

int GameConfig::expert_index(const ExpertId& expert) const {
  switch (expert.kind) {
    case ExpertId::Kind::zero:
      return 0;
    case ExpertId::Kind::pair:
      return 1 + (expert.batch - 1) * n + (expert.index - 1);
    case ExpertId::Kind::padded:
      return 1 + k * n + expert.batch;
  }
  return -1;
}

ExpertId GameConfig::expert_at(int index) const {
  if (index < 0 || index >= N) {
    throw std::out_of_range(fmt::format("expert index {} out of range", index));
  }
  if (index == 0) return ExpertId::zero();
  if (index <= k * n) {
    return ExpertId::pair((index - 1) / n + 1, (index - 1) % n + 1);
  }
  return ExpertId::padded(index - 1 - k * n);
}

bool GameConfig::is_valid_strategy(const StrategyId& s) const {
  if (s.is_null()) return s.index == 0;
  return s.batch >= 1 && s.batch <= k && s.index >= 1 && s.index <= n;
}

std::vector<StrategyId> GameConfig::strategy_pool() const {
  std::vector<StrategyId> pool;
  pool.reserve(static_cast<std::size_t>(k) * n + 1);
  pool.push_back(StrategyId::null());
  for (int u = 1; u <= k; ++u) {
    for (int v = 1; v <= n; ++v) pool.push_back(StrategyId::special(u, v));
  }
  return pool;
}

ValidationReport validate_config(const GameConfig& cfg) {
  ValidationReport report;
  auto& errors = report.errors;

  if (cfg.K < 3) errors.push_back(fmt::format("K={} < 3", cfg.K));
  if (cfg.N < cfg.K) errors.push_back(fmt::format("N={} < K={}", cfg.N, cfg.K));
  if (cfg.T < 1) errors.push_back(fmt::format("T={} < 1", cfg.T));
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 0.1)) {
    errors.push_back(
        fmt::format("epsilon out of range: {} not in (0, 0.1]", cfg.epsilon));
  }
  if (!errors.empty() && (cfg.K < 3 || cfg.N < cfg.K)) return report;

  const ReducedDims d = derive_reduced_dims(cfg.K, cfg.N);
  if (cfg.k != d.k || cfg.n != d.n || cfg.padding.arms != d.padding.arms ||
      cfg.padding.experts != d.padding.experts) {
    errors.push_back(fmt::format(
        "batch structure (k={}, n={}) inconsistent with K={}, N={}", cfg.k,
        cfg.n, cfg.K, cfg.N));
  }
  if (cfg.n < 1) errors.push_back(fmt::format("n={} < 1", cfg.n));
  if (!cfg.is_valid_strategy(cfg.strategy)) {
    errors.push_back(fmt::format("strategy {} invalid for k={}, n={}",
                                 to_string(cfg.strategy), cfg.k, cfg.n));
  }

  if (cfg.n <= 10) report.warnings.push_back(fmt::format("n={} not > 10", cfg.n));
  const double min_horizon =
      cfg.K * std::log(static_cast<double>(cfg.N) / cfg.K);
  if (static_cast<double>(cfg.T) < min_horizon) {
    report.warnings.push_back(
        fmt::format("T={} below K ln(N/K)={:.4g}", cfg.T, min_horizon));
  }
  return report;
}

void to_json(nlohmann::json& j, const StrategyId& s) {
  if (s.is_null()) {
    j = "S0";
  } else {
    j = nlohmann::json{{"u", s.batch}, {"v", s.index}};
  }
}

void from_json(const nlohmann::json& j, StrategyId& s) {
  if (j.is_string()) {
    s = parse_strategy(j.get<std::string>());
  } else if (j.is_object()) {
    s = StrategyId::special(j.at("u").get<int>(), j.at("v").get<int>());
  } else {
    throw ConfigError("strategy must be \"S0\" or {\"u\": int, \"v\": int}");
  }
}

void to_json(nlohmann::json& j, const GameConfig& cfg) {
  j = nlohmann::json{{"K", cfg.K},
                     {"N", cfg.N},
                     {"T", cfg.T},
                     {"epsilon", cfg.epsilon},
                     {"seed", cfg.seed},
                     {"strategy", cfg.strategy}};
}

void from_json(const nlohmann::json& j, GameConfig& cfg) {
  try {
    cfg = make_config(j.at("K").get<int>(), j.at("N").get<int>(),
                      j.at("T").get<std::int64_t>(),
                      j.at("epsilon").get<double>(), j.value("seed", 0ULL),
                      j.contains("strategy") ? j.at("strategy").get<StrategyId>()
                                             : StrategyId::null());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed game config: ") + e.what());
  }
}

}  // namespace banditlab
