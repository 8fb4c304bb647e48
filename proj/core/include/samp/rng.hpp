#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace samp {

/// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a purpose tag ("matrix", "signal", "noise", ...).
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for the stream identified by (experiment seed, trial index, purpose).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial,
                                    std::string_view purpose) noexcept {
  return mix64(mix64(base ^ mix64(trial + 0x632be59bd9b4e019ULL)) ^
               tag_hash(purpose));
}

/// Seeded generator with platform-independent uniform and normal draws.
///
/// std::normal_distribution is implementation-defined, so the Gaussian
/// variates are produced here with the polar Box-Muller method on top of the
/// (fully specified) mt19937_64 engine. Streams are therefore bit-identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace samp
