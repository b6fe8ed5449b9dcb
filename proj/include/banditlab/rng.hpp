#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace banditlab {

// Identifies one child stream under a root seed. Streams with distinct labels
// are independent; the same (seed, label) always replays the same sequence.
struct StreamLabel {
  std::string_view component;
  std::uint64_t batch = 0;
  std::uint64_t trial = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based generator: draw i is splitmix64(key + i * gamma), where the key
// is a hash of (seed, label). Cheap to construct, so every (component, batch,
// trial) triple gets its own stream.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() = default;
  RngStream(std::uint64_t seed, StreamLabel label);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Root seed for trial `trial` of grid cell `cell`, used by the sweep runner.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t cell,
                          std::uint64_t trial);

}  // namespace banditlab
