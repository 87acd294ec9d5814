#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace tagsync {

/// Seeded random source with platform-independent uniform and normal draws.
///
/// std::mt19937_64 and std::seed_seq are fully specified by the standard, but
/// the standard distributions are not, so the variates are produced here to
/// keep fixed-seed output identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent generator for a named substream of a scenario seed.
  static Rng substream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Standard normal (Marsaglia polar method).
  double normal();

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace tagsync
