#include "banditlab/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "banditlab/core.hpp"
#include "banditlab/stats.hpp"

namespace banditlab::info {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw ConfigError(fmt::format("epsilon {} not in [0, 0.5)", epsilon));
  }
}

void check_batch_size(int n) {
  if (n < 1 || n > kMaxDenseBatchSize) {
    throw ConfigError(fmt::format("batch size n={} outside dense range [1, {}]",
                                  n, kMaxDenseBatchSize));
  }
}

std::uint64_t checked_outcomes(int n, int horizon) {
  check_batch_size(n);
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  const std::uint64_t support = std::uint64_t{1} << (n + 1);
  std::uint64_t total = 1;
  for (int t = 0; t < horizon; ++t) {
    if (total > kMaxSequenceOutcomes / support) {
      throw ConfigError(fmt::format(
          "(2^{})^{} outcome sequences exceed the enumeration limit 2^24", n + 1,
          horizon));
    }
    total *= support;
  }
  return total;
}

// Probability of outcome x under the round law of expert v (0: null).
double round_prob(int n, double epsilon, int v, std::uint32_t x) {
  const double base = std::ldexp(1.0, -n);
  if (v == 0) return base * 0.5;
  const std::uint32_t a_v = (x >> (v - 1)) & 1U;
  const std::uint32_t c = (x >> n) & 1U;
  return base * (c == a_v ? 0.5 + epsilon : 0.5 - epsilon);
}

}  // namespace

RoundPmf round_pmf(int n, double epsilon, int special) {
  check_batch_size(n);
  check_epsilon(epsilon);
  if (special < 0 || special > n) {
    throw ConfigError(fmt::format("special expert {} not in [0, {}]", special, n));
  }
  RoundPmf pmf{n, epsilon, special, {}};
  const std::uint32_t support = 1U << (n + 1);
  pmf.probs.resize(support);
  for (std::uint32_t x = 0; x < support; ++x) {
    pmf.probs[x] = round_prob(n, epsilon, special, x);
  }
  return pmf;
}

double round_likelihood_ratio(int n, double epsilon, int v, std::uint32_t outcome) {
  const std::uint32_t a_v = (outcome >> (v - 1)) & 1U;
  const std::uint32_t c = (outcome >> n) & 1U;
  const double sign = c == a_v ? 1.0 : -1.0;
  return 1.0 + sign * 2.0 * epsilon;
}

double likelihood_ratio_mean(int n, double epsilon, int v, int v_star) {
  const RoundPmf star = round_pmf(n, epsilon, v_star);
  const RoundPmf null = round_pmf(n, epsilon, 0);
  const RoundPmf alt = round_pmf(n, epsilon, v);
  stats::CompensatedSum sum;
  for (std::size_t x = 0; x < star.probs.size(); ++x) {
    sum.add(star.probs[x] * (alt.probs[x] / null.probs[x]));
  }
  return sum.value();
}

std::uint64_t SequenceDist::outcome_count() const {
  return checked_outcomes(n, horizon);
}

std::vector<double> dense_pmf(const SequenceDist& dist) {
  check_epsilon(dist.epsilon);
  const std::uint64_t total = dist.outcome_count();
  const std::uint32_t support = 1U << (dist.n + 1);
  std::vector<double> out(total);

  std::vector<int> experts;
  if (dist.kind == SequenceDist::Kind::product) {
    experts.push_back(dist.special);
  } else {
    for (int v = 1; v <= dist.n; ++v) experts.push_back(v);
  }
  std::vector<std::vector<double>> rounds;
  for (int v : experts) rounds.push_back(round_pmf(dist.n, dist.epsilon, v).probs);

  std::vector<std::uint32_t> digits(static_cast<std::size_t>(dist.horizon), 0);
  for (std::uint64_t g = 0; g < total; ++g) {
    std::uint64_t rest = g;
    for (auto& d : digits) {
      d = static_cast<std::uint32_t>(rest % support);
      rest /= support;
    }
    stats::CompensatedSum mix;
    for (const auto& probs : rounds) {
      double prod = 1.0;
      for (std::uint32_t d : digits) prod *= probs[d];
      mix.add(prod);
    }
    out[g] = mix.value() / static_cast<double>(rounds.size());
  }
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("kl_divergence: size mismatch");
  stats::CompensatedSum sum;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    sum.add(p[i] * std::log(p[i] / q[i]));
  }
  return std::max(0.0, sum.value());
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("total_variation: size mismatch");
  stats::CompensatedSum sum;
  for (std::size_t i = 0; i < p.size(); ++i) sum.add(std::abs(p[i] - q[i]));
  return 0.5 * sum.value();
}

double bernoulli_kl(double p, double q) {
  auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

double exact_kl_mixture_vs_null(int n, double epsilon, int horizon) {
  check_epsilon(epsilon);
  checked_outcomes(n, horizon);
  if (epsilon == 0.0) return 0.0;

  const std::uint32_t support = 1U << (n + 1);
  const double log_p0 = -static_cast<double>(n + 1) * horizon * std::log(2.0);
  std::vector<std::vector<double>> per_expert;
  for (int v = 1; v <= n; ++v) per_expert.push_back(round_pmf(n, epsilon, v).probs);

  // Depth-first over rounds, carrying each expert's partial product.
  std::vector<std::vector<double>> partial(
      static_cast<std::size_t>(horizon) + 1,
      std::vector<double>(static_cast<std::size_t>(n), 1.0));
  stats::CompensatedSum kl;
  auto visit = [&](auto&& self, int depth) -> void {
    if (depth == horizon) {
      stats::CompensatedSum mix;
      for (double x : partial[static_cast<std::size_t>(depth)]) mix.add(x);
      const double p_mix = mix.value() / n;
      if (p_mix > 0.0) kl.add(p_mix * (std::log(p_mix) - log_p0));
      return;
    }
    const auto& from = partial[static_cast<std::size_t>(depth)];
    auto& to = partial[static_cast<std::size_t>(depth) + 1];
    for (std::uint32_t x = 0; x < support; ++x) {
      for (int v = 0; v < n; ++v) {
        to[static_cast<std::size_t>(v)] =
            from[static_cast<std::size_t>(v)] * per_expert[static_cast<std::size_t>(v)][x];
      }
      self(self, depth + 1);
    }
  };
  visit(visit, 0);
  return std::max(0.0, kl.value());
}

double kl_sufficient_stat(int n, double epsilon, int horizon) {
  check_epsilon(epsilon);
  if (n < 1 || horizon < 1) throw ConfigError("kl_sufficient_stat: n, T must be >= 1");
  const double states = std::pow(static_cast<double>(horizon) + 1.0, n);
  if (states > static_cast<double>(kMaxSequenceOutcomes)) {
    throw ConfigError(fmt::format("(T+1)^n = {} count vectors exceed 2^24", states));
  }
  if (epsilon == 0.0) return 0.0;

  // Binomial(T, 1/2) weights and per-count likelihood ratios.
  std::vector<double> weight(static_cast<std::size_t>(horizon) + 1);
  std::vector<double> ratio(static_cast<std::size_t>(horizon) + 1);
  for (int m = 0; m <= horizon; ++m) {
    weight[static_cast<std::size_t>(m)] =
        std::exp(std::lgamma(horizon + 1.0) - std::lgamma(m + 1.0) -
                 std::lgamma(horizon - m + 1.0) - horizon * std::log(2.0));
    ratio[static_cast<std::size_t>(m)] =
        std::pow(1.0 + 2.0 * epsilon, m) * std::pow(1.0 - 2.0 * epsilon, horizon - m);
  }

  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  stats::CompensatedSum kl;
  while (true) {
    double w = 1.0;
    stats::CompensatedSum lr;
    for (int c : counts) {
      w *= weight[static_cast<std::size_t>(c)];
      lr.add(ratio[static_cast<std::size_t>(c)]);
    }
    const double L = lr.value() / n;
    if (L > 0.0) kl.add(w * L * std::log(L));
    // Odometer increment.
    std::size_t i = 0;
    while (i < counts.size() && counts[i] == horizon) counts[i++] = 0;
    if (i == counts.size()) break;
    ++counts[i];
  }
  return std::max(0.0, kl.value());
}

double mixture_kl_bound(int n, double epsilon, std::int64_t horizon) {
  if (!(epsilon >= 0.0 && epsilon <= 0.1)) {
    throw ConfigError(fmt::format("epsilon {} outside [0, 0.1]", epsilon));
  }
  if (n < 1 || horizon < 0) throw ConfigError("mixture_kl_bound: need n >= 1, T >= 0");
  return std::expm1(static_cast<double>(horizon) * std::log1p(4.0 * epsilon * epsilon)) / n;
}

PinskerReport pinsker_check(std::span<const double> p, std::span<const double> q) {
  PinskerReport r;
  r.tv = total_variation(p, q);
  r.kl = kl_divergence(p, q);
  r.rhs = std::sqrt(r.kl / 2.0);
  r.pass = r.tv <= r.rhs;
  return r;
}

PinskerReport pinsker_check(const SequenceDist& p, const SequenceDist& q) {
  if (p.n != q.n || p.horizon != q.horizon) {
    throw ConfigError("pinsker_check: distributions live on different spaces");
  }
  const auto pp = dense_pmf(p);
  const auto qq = dense_pmf(q);
  return pinsker_check(pp, qq);
}

double event_gap(std::span<const double> p, std::span<const double> q,
                 std::span<const std::uint8_t> event) {
  stats::CompensatedSum gap;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (event[i]) gap.add(p[i] - q[i]);
  }
  return std::abs(gap.value());
}

TStarBounds t_star_threshold(int n, double epsilon, std::optional<int> k) {
  if (n <= 10) throw ConfigError(fmt::format("t_star_threshold needs n > 10, got {}", n));
  if (!(epsilon > 0.0)) throw ConfigError("t_star_threshold needs epsilon > 0");
  const double log_term = std::log(n / 10.0);
  TStarBounds b;
  b.t_star = log_term / (4.0 * epsilon * epsilon);
  b.half = b.t_star / 2.0;
  if (k) b.many_batches = *k * log_term / (20.0 * epsilon * epsilon);
  return b;
}

std::vector<KlCheckRow> kl_check_grid(int n_max, int t_max,
                                      std::span<const double> epsilons) {
  std::vector<KlCheckRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    for (int t = 1; t <= t_max; ++t) {
      for (double eps : epsilons) {
        KlCheckRow row;
        row.n = n;
        row.horizon = t;
        row.epsilon = eps;
        row.exact_kl = exact_kl_mixture_vs_null(n, eps, t);
        row.bound = mixture_kl_bound(n, eps, t);
        const auto pin = pinsker_check(SequenceDist::mixture(n, eps, t),
                                       SequenceDist::null(n, eps, t));
        row.tv = pin.tv;
        row.pinsker_rhs = std::sqrt(row.exact_kl / 2.0);
        row.pass = row.exact_kl <= row.bound && row.tv <= row.pinsker_rhs;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_klcheck_csv(std::ostream& out, std::span<const KlCheckRow> rows) {
  out << "n,T,epsilon,exact_kl,bound,tv,pinsker_rhs,pass\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.n, r.horizon,
               r.epsilon, r.exact_kl, r.bound, r.tv, r.pinsker_rhs, r.pass ? 1 : 0);
  }
}

}  // namespace banditlab::info
