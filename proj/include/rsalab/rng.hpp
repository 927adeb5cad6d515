#pragma once

#include <cmath>
#include <cstdint>

namespace rsalab {

// SplitMix64 finalizer (Steele/Lea/Flood fast splittable generators; Vigna's
// public-domain constants). Used both as a bit mixer for key derivation and
// as the output function of the counter-based stream below.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

// Order-sensitive key chaining: derives stream keys from word sequences such
// as (master seed, stream tag, cell coordinates...). chain(a,b) != chain(b,a).
constexpr std::uint64_t chain(std::uint64_t h, std::uint64_t v) {
  return mix64((h + kGoldenGamma) ^ mix64(v + kGoldenGamma));
}

// Stream tags keep the per-cell, per-site and per-point substreams of one
// master seed disjoint.
enum StreamTag : std::uint64_t {
  kTagCellPoints = 0x01,
  kTagLatticeSite = 0x02,
  kTagPointMark = 0x03,
  kTagPointLifetime = 0x04,
  kTagReplicate = 0x05,
  kTagSample = 0x06,
  kTagInternal = 0x07,
};

// Counter-based stream: output i is mix64(key + i*gamma), i.e. SplitMix64
// seeded with `key`. Streams with distinct keys are independent for all
// practical purposes, and any draw is reachable by counter without
// generating its predecessors.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGoldenGamma); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // Exponential with the given rate. next_unit() < 1, so the log is finite.
  double next_exponential(double rate) {
    return -std::log1p(-next_unit()) / rate;
  }

  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Exact Poisson sampling by multiplying uniforms (Knuth). Chunked so the
  // running product never underflows for large means; cost is O(mean), which
  // is proportional to the number of points a cell then materializes.
  std::uint64_t next_poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 400.0) {
      total += poisson_small(400.0);
      mean -= 400.0;
    }
    return total + poisson_small(mean);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= next_unit();
    } while (prod > limit);
    return k - 1;
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace rsalab
