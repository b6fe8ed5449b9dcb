#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace banditlab::info {

// Exact law of one round of the one-batch game, observed as (advice vector a,
// correct side c). Outcome index x = a | (c << n), with bit v-1 of a holding
// the advice of expert v. Arm-0 losses are strategy independent and left out.
//
//   null:       pmf(a, c) = 2^-n * 1/2
//   special v:  pmf(a, c) = 2^-n * (1/2 + eps) if c == a_v, else 2^-n * (1/2 - eps)
struct RoundPmf {
  int n = 1;
  double epsilon = 0.0;
  int special = 0;  // v in [1..n], 0 for the null strategy
  std::vector<double> probs;

  std::size_t support_size() const { return probs.size(); }
};

inline constexpr int kMaxDenseBatchSize = 20;
inline constexpr std::uint64_t kMaxSequenceOutcomes = std::uint64_t{1} << 24;

RoundPmf round_pmf(int n, double epsilon, int special = 0);

// p_v(x) / p_0(x) for one round: 1 + (2 * 1[c == a_v] - 1) * 2 eps.
double round_likelihood_ratio(int n, double epsilon, int v, std::uint32_t outcome);

// E_{x ~ P_(1,v_star)} [p_v(x) / p_0(x)] by summation over the support.
double likelihood_ratio_mean(int n, double epsilon, int v, int v_star);

// Law of T rounds: the T-fold product of one round pmf, or the uniform
// mixture over v of the products of the special pmfs.
struct SequenceDist {
  enum class Kind { product, mixture };

  Kind kind = Kind::product;
  int n = 1;
  double epsilon = 0.0;
  int special = 0;  // for Kind::product
  int horizon = 1;

  static SequenceDist null(int n, double epsilon, int horizon) {
    return {Kind::product, n, epsilon, 0, horizon};
  }
  static SequenceDist product_of(int n, double epsilon, int special, int horizon) {
    return {Kind::product, n, epsilon, special, horizon};
  }
  static SequenceDist mixture(int n, double epsilon, int horizon) {
    return {Kind::mixture, n, epsilon, 0, horizon};
  }

  std::uint64_t outcome_count() const;
};

// Dense pmf over (2^(n+1))^T sequences. Sequence index is mixed radix with the
// first round in the least significant digit.
std::vector<double> dense_pmf(const SequenceDist& dist);

// KL(p || q) in nats with 0 ln(0/q) = 0, compensated summation; +inf if p > 0
// where q = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double total_variation(std::span<const double> p, std::span<const double> q);

// d(Ber(p) || Ber(q)) in nats.
double bernoulli_kl(double p, double q);

// KL(P_mix^T || P_0^T) by enumerating every outcome sequence.
double exact_kl_mixture_vs_null(int n, double epsilon, int horizon);

// The same divergence through the per-expert match counts m_v, which are iid
// Bin(T, 1/2) under the null and carry the whole likelihood ratio
// (1/n) sum_v (1 + 2 eps)^m_v (1 - 2 eps)^(T - m_v).
double kl_sufficient_stat(int n, double epsilon, int horizon);

// ((1 + 4 eps^2)^T - 1) / n.
double mixture_kl_bound(int n, double epsilon, std::int64_t horizon);

struct PinskerReport {
  double tv = 0.0;
  double kl = 0.0;
  double rhs = 0.0;  // sqrt(kl / 2)
  bool pass = false;
};

PinskerReport pinsker_check(const SequenceDist& p, const SequenceDist& q);
PinskerReport pinsker_check(std::span<const double> p, std::span<const double> q);

// |P(E) - Q(E)| for the event marked by `event`.
double event_gap(std::span<const double> p, std::span<const double> q,
                 std::span<const std::uint8_t> event);

struct TStarBounds {
  double t_star = 0.0;       // ln(n/10) / (4 eps^2)
  double half = 0.0;         // T*/2, the one-batch stopping-time bound
  std::optional<double> many_batches;  // k ln(n/10) / (20 eps^2)
};

// Requires n > 10.
TStarBounds t_star_threshold(int n, double epsilon, std::optional<int> k = std::nullopt);

struct KlCheckRow {
  int n = 0;
  int horizon = 0;
  double epsilon = 0.0;
  double exact_kl = 0.0;
  double bound = 0.0;
  double tv = 0.0;
  double pinsker_rhs = 0.0;
  bool pass = false;
};

// Every (n, T, eps) with n in [1..n_max], T in [1..t_max].
std::vector<KlCheckRow> kl_check_grid(int n_max, int t_max,
                                      std::span<const double> epsilons);

void write_klcheck_csv(std::ostream& out, std::span<const KlCheckRow> rows);

}  // namespace banditlab::info
