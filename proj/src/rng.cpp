#include "seufi/rng.hpp"

#include <stdexcept>

namespace seufi {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t repetition,
                              std::uint64_t run_index) {
  std::uint64_t s = master_seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ repetition;
  h = splitmix64(s);
  s = h ^ run_index;
  return splitmix64(s);
}

std::uint64_t RunRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RunRng::below(0)");
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit = -n % n;
  for (;;) {
    const std::uint64_t x = next();
    if (x >= limit) return x % n;
  }
}

}  // namespace seufi
