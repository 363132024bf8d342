#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include "seufi/injector.hpp"
#include "seufi/tracer.hpp"
#include "support/helpers.hpp"

namespace seufi {
namespace {

using namespace std::chrono_literals;
using testing::fixture;
using testing::read_file;
using testing::TempDir;

SpawnOptions options(const TempDir& dir, const std::string& name, int alarm = 0,
                     std::vector<std::string> args = {}) {
  SpawnOptions o;
  o.binary = name.front() == '/' ? std::filesystem::path(name) : fixture(name);
  o.args = std::move(args);
  o.alarm_seconds = alarm;
  o.stdout_path = dir / "out";
  o.stderr_path = dir / "err";
  return o;
}

// Output of the fixture run without any tracing.
std::string native_output(const std::string& name) {
  TempDir d;
  const std::string cmd = fixture(name).string() + " > " + (d / "o").string();
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("native run failed");
  return read_file(d / "o");
}

TEST(Tracer, TrueExitsZero) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "/bin/true", 5));
  EXPECT_EQ(t.state(), TraceeState::Running);
  EXPECT_EQ(t.await_exit(), FinalStatus::from_exit(0));
  EXPECT_TRUE(t.terminated());
  EXPECT_GT(t.elapsed_seconds(), 0.0);
}

TEST(Tracer, AlarmEndsRunawayLoop) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "loop_forever", 1));
  const auto st = t.await_exit();
  EXPECT_EQ(st, FinalStatus::from_signal(SIGALRM));
  EXPECT_EQ(st.describe(), "signal SIGALRM");
  EXPECT_NEAR(t.elapsed_seconds(), 1.0, 0.5);
}

TEST(Tracer, RunUntilReturnsEarlyOnExit) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "print_hello"));
  const auto t0 = Tracee::Clock::now();
  EXPECT_FALSE(t.run_until(t0 + 5s));
  EXPECT_LT(Tracee::Clock::now() - t0, 1s);
  EXPECT_EQ(t.final_status(), FinalStatus::from_exit(0));
}

TEST(Tracer, RunUntilPassesSignalsOn) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "loop_forever", 1));
  EXPECT_FALSE(t.run_until(Tracee::Clock::now() + 4s));
  EXPECT_EQ(t.final_status(), FinalStatus::from_signal(SIGALRM));
  EXPECT_NEAR(t.elapsed_seconds(), 1.0, 0.5);
}

TEST(Tracer, RunUntilDeadline) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "spin", 10));
  EXPECT_TRUE(t.run_until(t.started_at() + 100ms));
  EXPECT_GE(Tracee::Clock::now() - t.started_at(), 100ms);
  EXPECT_NO_THROW(t.stop());
}

TEST(Tracer, SpawnFailureIsReported) {
  TempDir d;
  EXPECT_THROW(Tracee::spawn(options(d, "/nonexistent/prog")), SpawnError);
}

TEST(Tracer, CapturesOutput) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "print_hello"));
  t.await_exit();
  EXPECT_EQ(read_file(d / "out"), "hello\n");
}

TEST(Tracer, ArgumentsReachTheChild) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "sleeper", 0, {"20"}));
  t.await_exit();
  EXPECT_EQ(read_file(d / "out"), "slept\n");
  EXPECT_LT(t.elapsed_seconds(), 0.4);
}

TEST(Tracer, StopLandsInsideOwnText) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "spin", 10));
  std::this_thread::sleep_for(100ms);
  const RegisterFile regs = t.stop();
  EXPECT_EQ(t.state(), TraceeState::Stopped);
  const auto own = executable_regions_of(t.initial_map(), fixture("spin"));
  ASSERT_FALSE(own.empty());
  bool inside = false;
  for (const auto& r : own) inside |= r.contains(regs.ip());
  EXPECT_TRUE(inside);
  bool mapped = false;
  for (const auto& r : t.read_memory_map()) mapped |= r.contains(regs.ip());
  EXPECT_TRUE(mapped);
  EXPECT_NO_THROW(decode_at(t, regs.ip()));
}

TEST(Tracer, DynamicFixtureMapsSeveralObjects) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "libc_heavy"));
  std::set<std::string> paths;
  for (const auto& r : t.initial_map()) {
    if (r.is_executable && !r.backing_path.empty()) paths.insert(r.backing_path);
  }
  EXPECT_GE(paths.size(), 2u);
  EXPECT_FALSE(executable_regions_of(t.initial_map(), fixture("libc_heavy")).empty());
}

TEST(Tracer, MemoryMapParsing) {
  std::istringstream in(
      "00400000-00401000 r--p 00000000 08:01 123 /usr/bin/x\n"
      "00401000-00402000 r-xp 00001000 08:01 123 /usr/bin/x\n"
      "7ffff7dd0000-7ffff7df0000 r-xp 00000000 08:01 99 /lib/ld with space.so\n"
      "7ffffffde000-7ffffffff000 rw-p 00000000 00:00 0 [stack]\n");
  const auto m = parse_memory_map(in);
  ASSERT_EQ(m.size(), 4u);
  EXPECT_FALSE(m[0].is_executable);
  EXPECT_TRUE(m[1].is_executable);
  EXPECT_EQ(m[1].start, 0x401000u);
  EXPECT_EQ(m[1].end, 0x402000u);
  EXPECT_EQ(m[2].backing_path, "/lib/ld with space.so");
  EXPECT_EQ(m[3].backing_path, "[stack]");
}

TEST(Tracer, StopAfterExitIsARace) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "print_hello"));
  std::this_thread::sleep_for(300ms);
  EXPECT_THROW(t.stop(), StopRace);
  EXPECT_TRUE(t.terminated());
  EXPECT_EQ(t.final_status(), FinalStatus::from_exit(0));
}

TEST(Tracer, SingleStepAdvances) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "spin", 10));
  std::this_thread::sleep_for(50ms);
  const auto before = t.stop();
  const auto r = t.single_step();
  EXPECT_EQ(r.kind, StepResult::Kind::Advanced);
  const auto after = t.read_registers();
  const auto d0 = decode_at(t, before.ip());
  EXPECT_NE(after.ip(), before.ip());
  if (!d0.is_control_flow) {
    EXPECT_EQ(after.ip(), before.ip() + static_cast<std::uint64_t>(d0.length_bytes));
  }
}

TEST(Tracer, RegisterWriteRoundTrip) {
  TempDir d;
  auto t = Tracee::spawn(options(d, "spin", 10));
  std::this_thread::sleep_for(50ms);
  RegisterFile regs = t.stop();
  regs.flip_view_bit(RegisterId::r11, 64, 0, 40);
  regs.flip_view_bit(vector_register(3), 256, 0, 200);
  regs.flip_view_bit(vector_register(15), 128, 0, 7);
  t.write_registers(regs);
  EXPECT_EQ(t.read_registers(), regs);
}

// Stopping and resuming without writes never changes the output.
TEST(Tracer, ZeroPerturbation) {
  const std::string expected = native_output("checksum");
  for (auto delay : {10ms, 60ms, 150ms}) {
    TempDir d;
    auto t = Tracee::spawn(options(d, "checksum", 10));
    std::this_thread::sleep_for(delay);
    const auto regs = t.stop();
    for (int i = 0; i < 25; ++i) ASSERT_EQ(t.single_step().kind, StepResult::Kind::Advanced);
    t.write_registers(t.read_registers());
    EXPECT_EQ(t.resume_and_await(), FinalStatus::from_exit(0));
    EXPECT_EQ(read_file(d / "out"), expected);
    (void)regs;
  }
}

TEST(Tracer, DestructionKillsAndReaps) {
  pid_t pid;
  {
    TempDir d;
    auto t = Tracee::spawn(options(d, "loop_forever", 30));
    pid = t.pid();
    std::this_thread::sleep_for(20ms);
  }
  EXPECT_EQ(::kill(pid, 0), -1);
  EXPECT_EQ(errno, ESRCH);
}

TEST(Tracer, NoZombiesLeftBehind) {
  for (int i = 0; i < 10; ++i) {
    TempDir d;
    auto t = Tracee::spawn(options(d, i % 2 ? "spin" : "print_hello", 10));
    std::this_thread::sleep_for(5ms);
    try {
      t.stop();
      if (i % 3 == 0) t.kill_and_reap();
    } catch (const StopRace&) {
    }
  }
  int status;
  EXPECT_EQ(::waitpid(-1, &status, WNOHANG), -1);
  EXPECT_EQ(errno, ECHILD);
}

TEST(Tracer, SignalNames) {
  EXPECT_EQ(signal_name(SIGSEGV), "SIGSEGV");
  EXPECT_EQ(signal_name(SIGALRM), "SIGALRM");
  EXPECT_EQ(FinalStatus::from_exit(0).describe(), "exit 0");
}

}  // namespace
}  // namespace seufi
