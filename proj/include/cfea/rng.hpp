#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace cfea {

// Deterministic random source. All distributions are implemented on top of
// the raw mt19937_64 stream so that sequences are reproducible bit-for-bit
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [lo, hi] inclusive (unbiased via rejection).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p = 0.5) { return uniform() < p; }

  // Textual engine state, suitable for bit-exact restore.
  std::string serialize() const;
  void deserialize(const std::string& state);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stateless mixing of seed material into derived seeds (splitmix64 finalizer).
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

}  // namespace cfea
