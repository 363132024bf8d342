#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <set>

#include "seufi/injector.hpp"
#include "seufi/rng.hpp"

namespace seufi {
namespace {

TEST(SplitMix, ReferenceSequenceFromZero) {
  // Reference outputs of the published SplitMix64 generator for state 0.
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xe220a8397b1dcdafull);
  EXPECT_EQ(splitmix64(s), 0x6e789e6aa1b965f4ull);
  EXPECT_EQ(splitmix64(s), 0x06c45d188009454full);
}

TEST(RunSeed, PureAndDistinct) {
  EXPECT_EQ(derive_run_seed(1, 0, 5), derive_run_seed(1, 0, 5));
  std::set<std::uint64_t> seen;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_run_seed(42, rep, i));
  }
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_NE(derive_run_seed(1, 0, 0), derive_run_seed(2, 0, 0));
  EXPECT_NE(derive_run_seed(1, 1, 0), derive_run_seed(1, 0, 1));
}

TEST(RunRng, BelowRangeAndZero) {
  RunRng r(3);
  EXPECT_THROW(r.below(0), std::invalid_argument);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(r.below(7), 7u);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(RunRng, BelowIsUniform) {
  RunRng r(11);
  std::array<int, 6> hist{};
  const int n = 600000;
  for (int i = 0; i < n; ++i) ++hist[r.below(6)];
  for (int h : hist) EXPECT_NEAR(h, n / 6, 5 * std::sqrt(n / 6.0));
}

TEST(DrawTime, RangeContainment) {
  RunRng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double t = draw_injection_time(r, 10.0);
    EXPECT_GE(t, 0.0);
    EXPECT_LT(t, 10.0);
  }
}

TEST(DrawTime, DeterministicUnderSeed) {
  RunRng a(1), b(1);
  EXPECT_EQ(draw_injection_time(a, 10.0), draw_injection_time(b, 10.0));
  EXPECT_EQ(draw_injection_time(a, 10.0), draw_injection_time(b, 10.0));
}

TEST(DrawTime, DecilesHoldTenPercent) {
  RunRng r(2024);
  std::array<int, 10> hist{};
  const int n = 1000000;
  for (int i = 0; i < n; ++i) ++hist[static_cast<int>(draw_injection_time(r, 1.0) * 10.0)];
  for (int h : hist) EXPECT_NEAR(h / double(n), 0.10, 0.005);
  // chi-square with 9 degrees of freedom; 27.88 is the 0.001 critical value
  double chi2 = 0;
  for (int h : hist) chi2 += (h - n / 10.0) * (h - n / 10.0) / (n / 10.0);
  EXPECT_LT(chi2, 27.88);
}

TEST(DrawTime, RejectsNonPositiveDuration) {
  RunRng r(1);
  EXPECT_THROW(draw_injection_time(r, 0.0), std::invalid_argument);
  EXPECT_THROW(draw_injection_time(r, -1.0), std::invalid_argument);
}

TEST(FlipBit, Examples) {
  EXPECT_EQ(flip_bit(0xFF, 8, 0), 0xFEu);
  EXPECT_EQ(flip_bit(0x0, 64, 63), 0x8000000000000000ull);
  EXPECT_THROW(flip_bit(0, 8, 8), std::out_of_range);
  EXPECT_THROW(flip_bit(0, 8, -1), std::out_of_range);
}

TEST(FlipBit, InvolutionAndSingleBit) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 100000; ++i) {
    const int w = 1 + static_cast<int>(gen() % 64);
    const int b = static_cast<int>(gen() % static_cast<unsigned>(w));
    const std::uint64_t v = gen();
    const std::uint64_t f = flip_bit(v, w, b);
    ASSERT_EQ(flip_bit(f, w, b), v);
    ASSERT_EQ(__builtin_popcountll(f ^ v), 1);
  }
}

TEST(RandomChoice, ReproducibleChoices) {
  RandomChoice a(derive_run_seed(9, 0, 3)), b(derive_run_seed(9, 0, 3));
  RegisterAccess acc;
  acc.width_bits = 32;
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.draw_time(2.0), b.draw_time(2.0));
    EXPECT_EQ(a.coin(), b.coin());
    const int bit = a.choose_bit(acc);
    EXPECT_EQ(bit, b.choose_bit(acc));
    EXPECT_LT(bit, 32);
  }
}

}  // namespace
}  // namespace seufi
