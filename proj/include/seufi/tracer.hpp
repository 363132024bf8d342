#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seufi/registers.hpp"

namespace seufi {

enum class TraceeState { Running, Stopped, Exited, Signaled };

struct FinalStatus {
  bool exited = true;
  int exit_code = 0;
  int signal = 0;

  static FinalStatus from_exit(int code) { return {true, code, 0}; }
  static FinalStatus from_signal(int sig) { return {false, 0, sig}; }

  /// "exit 0", "signal SIGSEGV".
  std::string describe() const;
  friend bool operator==(const FinalStatus&, const FinalStatus&) = default;
};

struct StepResult {
  enum class Kind { Advanced, StoppedBySignal, Exited };
  Kind kind = Kind::Advanced;
  int signal = 0;
  FinalStatus status;
};

struct MappedRegion {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  bool is_executable = false;
  std::string backing_path;

  bool contains(std::uint64_t addr) const { return addr >= start && addr < end; }
  friend bool operator==(const MappedRegion&, const MappedRegion&) = default;
};

/// Parse the text of a /proc/<pid>/maps file.
std::vector<MappedRegion> parse_memory_map(std::istream& in);

/// Executable regions backed by `binary` (compared after canonicalization).
std::vector<MappedRegion> executable_regions_of(const std::vector<MappedRegion>& map,
                                                const std::filesystem::path& binary);

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// fork or exec failed.
class SpawnError : public TraceError {
 public:
  using TraceError::TraceError;
};

/// The tracee terminated before a stop request landed.
class StopRace : public TraceError {
 public:
  using TraceError::TraceError;
};

struct SpawnOptions {
  std::filesystem::path binary;
  std::vector<std::string> args;
  /// Wall-clock alarm armed in the child before exec; 0 disables it.
  int alarm_seconds = 0;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
  /// Keep load addresses identical across runs.
  bool disable_aslr = true;
};

/// One traced child process. Owned by the thread that spawned it: the
/// kernel only accepts tracing requests from that thread. Destruction kills
/// and reaps a child that is still alive.
class Tracee {
 public:
  using Clock = std::chrono::steady_clock;

  /// Fork, exec under tracing and let the image start running. Output goes
  /// to the capture files, stdin reads /dev/null.
  static Tracee spawn(const SpawnOptions& options);

  Tracee(Tracee&& other) noexcept;
  Tracee& operator=(Tracee&& other) noexcept;
  Tracee(const Tracee&) = delete;
  Tracee& operator=(const Tracee&) = delete;
  ~Tracee();

  pid_t pid() const { return pid_; }
  TraceeState state() const { return state_; }
  bool terminated() const {
    return state_ == TraceeState::Exited || state_ == TraceeState::Signaled;
  }
  /// Valid once terminated().
  const FinalStatus& final_status() const { return final_; }

  /// Moment the image was released after exec, and the moment its
  /// termination was observed.
  Clock::time_point started_at() const { return started_at_; }
  Clock::time_point ended_at() const { return ended_at_; }
  double elapsed_seconds() const;

  /// Memory map captured at the exec stop, before any code ran.
  const std::vector<MappedRegion>& initial_map() const { return initial_map_; }

  /// Let a running child continue until `deadline`, passing on any signal
  /// it receives. Returns false as soon as it terminates.
  bool run_until(Clock::time_point deadline);
  /// Running -> Stopped. Throws StopRace if the child terminated first.
  RegisterFile stop();
  RegisterFile read_registers();
  void write_registers(const RegisterFile& regs);
  StepResult single_step();
  /// Stopped -> terminal.
  FinalStatus resume_and_await();
  /// Running -> terminal, without ever stopping the child.
  FinalStatus await_exit();

  std::vector<MappedRegion> read_memory_map() const;
  /// Copy up to out.size() bytes; returns how many were readable.
  std::size_t read_memory(std::uint64_t address, std::span<std::uint8_t> out) const;

  /// SIGKILL and reap; no-op once terminated.
  void kill_and_reap() noexcept;

 private:
  Tracee() = default;

  int wait_status();
  bool record_termination(int status);
  FinalStatus wait_loop();
  void release();
  void load_vectors(RegisterFile& regs);
  void store_vectors(const RegisterFile& regs);

  pid_t pid_ = -1;
  TraceeState state_ = TraceeState::Exited;
  FinalStatus final_;
  Clock::time_point started_at_{};
  Clock::time_point ended_at_{};
  std::vector<MappedRegion> initial_map_;
  std::deque<int> queued_signals_;
  bool stop_outstanding_ = false;

  std::vector<std::uint8_t> xstate_;
  bool xstate_valid_ = false;
  bool fpregs_valid_ = false;
  RegisterFile last_read_;
};

/// Conventional name of a signal number, e.g. "SIGSEGV".
std::string signal_name(int sig);

}  // namespace seufi
