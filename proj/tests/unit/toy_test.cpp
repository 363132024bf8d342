#include <gtest/gtest.h>

#include "seufi/toy.hpp"
#include "support/helpers.hpp"

namespace seufi::toy {
namespace {

Program load(const std::string& name) {
  return parse(seufi::testing::read_file(seufi::testing::toy_program(name)));
}

TEST(ToyParse, AcceptsLabelsAndComments) {
  const auto p = load("mixed.toy");
  EXPECT_EQ(p.code.size(), 20u);
  EXPECT_EQ(p.code.back().op, Op::Exit);
}

TEST(ToyParse, Rejections) {
  EXPECT_THROW(parse("li r8, 1"), ParseError);
  EXPECT_THROW(parse("beq r0, r1, nowhere"), ParseError);
  EXPECT_THROW(parse("frob r0"), ParseError);
  EXPECT_THROW(parse("li r0"), ParseError);
  EXPECT_THROW(parse("a: li r0, 1\na: exit 0"), ParseError);
  EXPECT_THROW(parse("li r0, 70000"), ParseError);
}

TEST(ToyExec, FaultFreeRuns) {
  const auto e = execute(load("straight.toy"), 100);
  EXPECT_EQ(e.how, Termination::Exited);
  EXPECT_EQ(e.prints, std::vector<std::uint16_t>{5});
  EXPECT_EQ(e.steps, 3u);
  const auto m = execute(load("mixed.toy"), 1000);
  EXPECT_EQ(m.how, Termination::Exited);
  // 10 + 13 + 16 + 19 + 22 + 25
  EXPECT_EQ(m.prints, std::vector<std::uint16_t>{105});
}

TEST(ToyExec, MemoryBoundsAndFallOff) {
  EXPECT_EQ(execute(parse("li r0, 256\nld r1, r0\nexit 0"), 10).how, Termination::IllegalAccess);
  EXPECT_EQ(execute(parse("li r0, 255\nst r0, r0\nexit 0"), 10).how, Termination::Exited);
  EXPECT_EQ(execute(parse("li r0, 1"), 10).how, Termination::IllegalAccess);
  EXPECT_EQ(execute(parse("l: beq r0, r0, l"), 10).how, Termination::BudgetExceeded);
}

TEST(ToyOracle, FlipBeforePrintCorrupts) {
  const auto res = enumerate_outcomes(load("straight.toy"), 30);
  EXPECT_EQ(res.steps, 3u);
  EXPECT_EQ(res.outcomes.size(), 3u * 8 * 16);
  EXPECT_EQ(res.at(1, 0, 1).kind, OutcomeKind::Corrupted);
  Flip f{1, 0, 1};
  EXPECT_EQ(execute(load("straight.toy"), 30, f).prints, std::vector<std::uint16_t>{7});
}

TEST(ToyOracle, DeadRegistersAreMasked) {
  const auto res = enumerate_outcomes(load("straight.toy"), 30);
  for (std::size_t s = 0; s < res.steps; ++s) {
    for (int r = 1; r < kRegisters; ++r) {
      for (int b = 0; b < kRegisterBits; ++b) EXPECT_EQ(res.at(s, r, b).kind, OutcomeKind::Masked);
    }
  }
  // r0 is overwritten by step 0, so flips before it are dead too
  for (int b = 0; b < kRegisterBits; ++b) EXPECT_EQ(res.at(0, 0, b).kind, OutcomeKind::Masked);
}

TEST(ToyOracle, CompareRegisterFlipNeverMeetsBound) {
  const auto p = load("countdown.toy");
  const auto res = enumerate_outcomes(p, 300);
  // step 3 is the first bne; r1 == 3 there, r2 == 0
  ASSERT_EQ(p.code[3].op, Op::Branch);
  EXPECT_EQ(res.at(3, 2, 2).kind, OutcomeKind::InfiniteExecution);  // bound 4 lies behind r1
  EXPECT_EQ(res.at(3, 2, 0).kind, OutcomeKind::Corrupted);          // stops at 1, prints 1
  EXPECT_EQ(res.at(3, 1, 15).kind, OutcomeKind::InfiniteExecution);
}

TEST(ToyOracle, PreconditionOnBudget) {
  EXPECT_THROW(enumerate_outcomes(load("straight.toy"), 8), std::invalid_argument);
  EXPECT_THROW(enumerate_outcomes(parse("l: beq r0, r0, l"), 300), std::invalid_argument);
  EXPECT_THROW(enumerate_outcomes(parse("detect"), 300), std::invalid_argument);
}

TEST(ToyOracle, ReproducibleBitForBit) {
  const auto a = enumerate_outcomes(load("mixed.toy"), 2000);
  const auto b = enumerate_outcomes(load("mixed.toy"), 2000);
  EXPECT_EQ(a.outcomes, b.outcomes);
}

TEST(ToyOracle, MixedProgramReachesEveryOutcome) {
  const auto res = enumerate_outcomes(load("mixed.toy"), 2000);
  for (auto k : kCountedOutcomes) EXPECT_GT(res.stats.count(k), 0u) << outcome_name(k);
}

TEST(ToySampling, FixedSeedIsReproducible) {
  const auto p = load("mixed.toy");
  RunRng a(5), b(5);
  const auto sa = sample_outcomes(p, a, 1000, 2000);
  const auto sb = sample_outcomes(p, b, 1000, 2000);
  EXPECT_EQ(sa.counts, sb.counts);
  RunRng c(5);
  EXPECT_THROW(sample_outcomes(p, c, 0, 2000), std::invalid_argument);
}

}  // namespace
}  // namespace seufi::toy
