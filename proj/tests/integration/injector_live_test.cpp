#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "seufi/injector.hpp"
#include "seufi/rng.hpp"
#include "support/helpers.hpp"

namespace seufi {
namespace {

using namespace std::chrono_literals;
using testing::fixture;
using testing::ForcedChoice;
using testing::TempDir;

Tracee spawn(const TempDir& d, const std::string& name) {
  SpawnOptions o;
  o.binary = fixture(name);
  o.alarm_seconds = 20;
  o.stdout_path = d / "out";
  o.stderr_path = d / "err";
  return Tracee::spawn(o);
}

std::uint64_t parse_hex(const std::string& s) { return std::stoull(s, nullptr, 16); }

InjectionSettings settings(const char* mask, int budget = 1000) {
  InjectionSettings s;
  s.mask = InjectionMask::parse(mask);
  s.max_retry_steps = budget;
  return s;
}

// Walk forward from `ip` the way the fixture's loop runs until the add.
std::pair<std::uint64_t, int> expected_add(Tracee& t, std::uint64_t ip) {
  int steps = 0;
  for (;;) {
    const auto d = decode_at(t, ip);
    std::uint8_t b[3];
    t.read_memory(ip, b);
    if (b[0] == 0x48 && b[1] == 0x01 && b[2] == 0xd8) return {ip, steps};
    if (b[0] == 0xe2) {
      ip = ip + 2 + static_cast<std::uint64_t>(static_cast<std::int64_t>(static_cast<std::int8_t>(b[1])));
    } else {
      ip += static_cast<std::uint64_t>(d.length_bytes);
    }
    ++steps;
  }
}

TEST(InjectorLive, StepsOverNopsToTheAdd) {
  int sled_hits = 0;
  for (int trial = 0; trial < 12; ++trial) {
    TempDir d;
    auto t = spawn(d, "nopsled");
    std::this_thread::sleep_for(std::chrono::milliseconds(20 + 7 * trial));
    const auto regs = t.stop();
    const auto [add_ip, retries] = expected_add(t, regs.ip());
    RandomChoice policy(derive_run_seed(1, 0, static_cast<std::uint64_t>(trial)));
    auto res = inject(t, settings("rwe"), policy, 0, 0.0);
    ASSERT_TRUE(std::holds_alternative<InjectionPlan>(res));
    const auto& plan = std::get<InjectionPlan>(res);
    EXPECT_EQ(plan.instruction_address, add_ip);
    EXPECT_EQ(plan.retries_used, retries);
    EXPECT_EQ(plan.instruction_bytes_hex, "48 01 d8");
    EXPECT_TRUE(plan.register_name() == "rax" || plan.register_name() == "rbx");
    if (retries > 0) ++sled_hits;
  }
  EXPECT_GT(sled_hits, 0);
}

TEST(InjectorLive, PostExecutionFlipOfWrittenRegister) {
  TempDir d;
  auto t = spawn(d, "nopsled");
  std::this_thread::sleep_for(50ms);
  t.stop();
  ForcedChoice policy(0.0, "rax", 3);
  auto res = inject(t, settings("we"), policy, 0, 0.0);
  ASSERT_TRUE(std::holds_alternative<InjectionPlan>(res));
  const auto& plan = std::get<InjectionPlan>(res);
  EXPECT_EQ(plan.phase, Phase::PostExecution);
  EXPECT_EQ(plan.bit_index, 3);
  EXPECT_EQ(parse_hex(plan.value_before_hex) ^ parse_hex(plan.value_after_hex), 8u);
  const auto regs = t.read_registers();
  EXPECT_EQ(regs.get64(RegisterId::rax), parse_hex(plan.value_after_hex));
  // the add has executed: the next instruction is the loop
  EXPECT_EQ(regs.ip(), plan.instruction_address + 3);
}

// Exactly one bit of one register differs after a PreExecution flip.
TEST(InjectorLive, PreExecutionFlipChangesOneBit) {
  for (int bit : {0, 17, 63}) {
    TempDir d;
    auto t = spawn(d, "nopsled");
    std::this_thread::sleep_for(40ms);
    t.stop();
    ForcedChoice policy(0.0, "rbx", bit);
    // An empty restricted pool steps forward, so snapshot at the add itself.
    auto probe = inject(t, settings("rwe"), policy, 0, 0.0);
    ASSERT_TRUE(std::holds_alternative<InjectionPlan>(probe));
    const auto& plan = std::get<InjectionPlan>(probe);
    EXPECT_EQ(plan.phase, Phase::PreExecution);
    const auto after = t.read_registers();
    EXPECT_EQ(after.ip(), plan.instruction_address);
    EXPECT_EQ(after.get64(RegisterId::rbx), 1ull ^ (1ull << bit));
  }
}

TEST(InjectorLive, RegisterDiffIsOneBit) {
  for (int trial = 0; trial < 6; ++trial) {
    TempDir d;
    auto t = spawn(d, "spin");
    std::this_thread::sleep_for(std::chrono::milliseconds(30 + 11 * trial));
    const RegisterFile before = t.stop();
    ForcedChoice policy(0.0, "rcx", 5 + trial, true);
    auto res = inject(t, settings("rwe"), policy, 0, 0.0);
    ASSERT_TRUE(std::holds_alternative<InjectionPlan>(res));
    if (std::get<InjectionPlan>(res).retries_used != 0) continue;
    const RegisterFile after = t.read_registers();
    int differing = 0;
    for (int r = 0; r < 16; ++r) {
      differing += __builtin_popcountll(before.get64(gpr(r)) ^ after.get64(gpr(r)));
    }
    EXPECT_EQ(differing, 1);
    EXPECT_EQ(before.get64(RegisterId::rcx) ^ after.get64(RegisterId::rcx), 1ull << (5 + trial));
  }
}

TEST(InjectorLive, BudgetExhaustionSkips) {
  TempDir d;
  auto t = spawn(d, "nopsled");
  std::this_thread::sleep_for(30ms);
  t.stop();
  ForcedChoice policy(0.0, "r15", 0);
  auto res = inject(t, settings("rwe", 50), policy, 0, 0.0);
  ASSERT_TRUE(std::holds_alternative<Skip>(res));
  EXPECT_NE(std::get<Skip>(res).reason.find("budget"), std::string::npos);
}

TEST(InjectorLive, LibraryExclusionLandsInMainBinary) {
  int outside_at_stop = 0;
  for (int trial = 0; trial < 10; ++trial) {
    TempDir d;
    auto t = spawn(d, "libc_heavy");
    auto s = settings("rwe");
    s.exclude_library_code = true;
    s.main_regions = executable_regions_of(t.initial_map(), fixture("libc_heavy"));
    ASSERT_FALSE(s.main_regions.empty());
    std::this_thread::sleep_for(std::chrono::milliseconds(20 + 13 * trial));
    const auto regs = t.stop();
    bool inside = false;
    for (const auto& r : s.main_regions) inside |= r.contains(regs.ip());
    if (!inside) ++outside_at_stop;
    RandomChoice policy(static_cast<std::uint64_t>(trial));
    auto res = inject(t, s, policy, 0, 0.0);
    ASSERT_TRUE(std::holds_alternative<InjectionPlan>(res)) << std::get<Skip>(res).reason;
    bool plan_inside = false;
    for (const auto& r : s.main_regions) {
      plan_inside |= r.contains(std::get<InjectionPlan>(res).instruction_address);
    }
    EXPECT_TRUE(plan_inside);
  }
  EXPECT_GT(outside_at_stop, 0);
}

}  // namespace
}  // namespace seufi
