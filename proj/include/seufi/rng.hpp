#pragma once

#include <cstdint>
#include <random>

namespace seufi {

/// One SplitMix64 step; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of the generator for one run. A pure function of its inputs, so
/// the choices made for run i never depend on which worker ran it or when.
std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t repetition,
                              std::uint64_t run_index);

class RunRng {
 public:
  explicit RunRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace seufi
