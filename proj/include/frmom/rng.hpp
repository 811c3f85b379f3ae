#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace frmom {

/// xoshiro256** seeded through splitmix64.
///
/// The bitstream is fully specified by the seed, so traces are reproducible
/// across compilers and standard libraries. All derived quantities (uniforms,
/// normals, permutations) are computed here rather than through <random>
/// distributions, whose outputs are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent generator for a named sub-stream of `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double low, double high);

  /// Standard normal via Box-Muller (one value cached).
  double normal();

  /// Uniform integer in [0, bound); bound must be positive.
  std::size_t below(std::size_t bound);

  /// Fisher-Yates shuffle of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t state_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace frmom
