#pragma once

#include "devrate/types.hpp"

#include <cstdint>
#include <random>

namespace devrate {

using Rng = std::mt19937_64;

/// Independent stream per (seed, stream, substream), so results do not depend on scheduling.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(substream), hi(substream), 0x6465u};
  return Rng(seq);
}

class Gaussian {
 public:
  explicit Gaussian(Rng rng) : rng_(std::move(rng)) {}

  double operator()() { return dist_(rng_); }

  Vec vector(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = dist_(rng_);
    return v;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  Rng& engine() { return rng_; }

 private:
  Rng rng_;
  std::normal_distribution<double> dist_;
};

}  // namespace devrate
