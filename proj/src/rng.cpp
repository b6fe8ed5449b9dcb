#include "banditlab/rng.hpp"

#include <stdexcept>

namespace banditlab {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGamma;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, StreamLabel label) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ fnv1a(label.component));
  h = splitmix64(h ^ label.batch);
  h = splitmix64(h ^ (label.trial * kGamma));
  key_ = h;
}

std::uint64_t RngStream::next_u64() {
  return splitmix64(key_ + kGamma * counter_++);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RngStream::below: zero bound");
  // Lemire's nearly-divisionless rejection.
  __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t cell,
                          std::uint64_t trial) {
  return splitmix64(splitmix64(root ^ splitmix64(cell)) + trial * kGamma);
}

}  // namespace banditlab
