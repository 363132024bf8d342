#include "seufi/tracer.hpp"

#include <cpuid.h>
#include <elf.h>
#include <fcntl.h>
#include <signal.h>
#include <sys/personality.h>
#include <sys/ptrace.h>
#include <sys/uio.h>
#include <sys/user.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

namespace seufi {

namespace {

constexpr std::size_t kXstateBufferSize = 16384;
constexpr std::size_t kXmmOffset = 160;
constexpr std::size_t kXstateBvOffset = 512;

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

// Offset of the AVX (ymm upper halves) component in the standard xsave
// layout, as reported by the CPU.
std::size_t avx_state_offset() {
  static const std::size_t offset = [] {
    unsigned a = 0, b = 0, c = 0, d = 0;
    if (__get_cpuid_count(0xD, 2, &a, &b, &c, &d) && a >= 256) return std::size_t{b};
    return std::size_t{0};
  }();
  return offset;
}

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

}  // namespace

std::string signal_name(int sig) {
  switch (sig) {
    case SIGHUP: return "SIGHUP";
    case SIGINT: return "SIGINT";
    case SIGQUIT: return "SIGQUIT";
    case SIGILL: return "SIGILL";
    case SIGTRAP: return "SIGTRAP";
    case SIGABRT: return "SIGABRT";
    case SIGBUS: return "SIGBUS";
    case SIGFPE: return "SIGFPE";
    case SIGKILL: return "SIGKILL";
    case SIGUSR1: return "SIGUSR1";
    case SIGSEGV: return "SIGSEGV";
    case SIGUSR2: return "SIGUSR2";
    case SIGPIPE: return "SIGPIPE";
    case SIGALRM: return "SIGALRM";
    case SIGTERM: return "SIGTERM";
    case SIGSTKFLT: return "SIGSTKFLT";
    case SIGCHLD: return "SIGCHLD";
    case SIGCONT: return "SIGCONT";
    case SIGSTOP: return "SIGSTOP";
    case SIGTSTP: return "SIGTSTP";
    case SIGXCPU: return "SIGXCPU";
    case SIGXFSZ: return "SIGXFSZ";
    case SIGSYS: return "SIGSYS";
    default: return "SIG" + std::to_string(sig);
  }
}

std::string FinalStatus::describe() const {
  if (exited) return "exit " + std::to_string(exit_code);
  return "signal " + signal_name(signal);
}

std::vector<MappedRegion> parse_memory_map(std::istream& in) {
  std::vector<MappedRegion> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string range, perms, offset, dev, inode;
    if (!(ls >> range >> perms >> offset >> dev >> inode)) continue;
    const auto dash = range.find('-');
    if (dash == std::string::npos) continue;
    MappedRegion r;
    r.start = std::stoull(range.substr(0, dash), nullptr, 16);
    r.end = std::stoull(range.substr(dash + 1), nullptr, 16);
    r.is_executable = perms.size() >= 3 && perms[2] == 'x';
    std::string rest;
    std::getline(ls, rest);
    const auto first = rest.find_first_not_of(' ');
    if (first != std::string::npos) r.backing_path = rest.substr(first);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MappedRegion> executable_regions_of(const std::vector<MappedRegion>& map,
                                                const std::filesystem::path& binary) {
  std::error_code ec;
  auto canonical = std::filesystem::canonical(binary, ec);
  const std::string want = ec ? binary.string() : canonical.string();
  std::vector<MappedRegion> out;
  for (const auto& r : map) {
    if (r.is_executable && r.backing_path == want) out.push_back(r);
  }
  return out;
}

Tracee Tracee::spawn(const SpawnOptions& options) {
  // Everything the child touches is prepared before fork: the parent may be
  // multi-threaded, so the child sticks to async-signal-safe calls.
  const std::string binary = options.binary.string();
  std::vector<std::string> argv_storage;
  argv_storage.push_back(binary);
  argv_storage.insert(argv_storage.end(), options.args.begin(), options.args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  const std::string out_path = options.stdout_path.string();
  const std::string err_path = options.stderr_path.string();

  int pipefd[2];
  if (::pipe2(pipefd, O_CLOEXEC) != 0) throw SpawnError(errno_text("pipe2"));
  Fd read_end(pipefd[0]);
  Fd write_end(pipefd[1]);

  const pid_t pid = ::fork();
  if (pid < 0) throw SpawnError(errno_text("fork"));
  if (pid == 0) {
    auto fail = [&](int err) {
      (void)!::write(write_end.get(), &err, sizeof err);
      ::_exit(127);
    };
    if (::ptrace(PTRACE_TRACEME, 0, nullptr, nullptr) != 0) fail(errno);
    const int in = ::open("/dev/null", O_RDONLY);
    const int out = ::open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int err = ::open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (in < 0 || out < 0 || err < 0) fail(errno);
    if (::dup2(in, 0) < 0 || ::dup2(out, 1) < 0 || ::dup2(err, 2) < 0) fail(errno);
    ::close(in);
    ::close(out);
    ::close(err);
    if (options.disable_aslr) {
      const int current = ::personality(0xffffffff);
      if (current != -1) ::personality(static_cast<unsigned long>(current) | ADDR_NO_RANDOMIZE);
    }
    if (options.alarm_seconds > 0) ::alarm(static_cast<unsigned>(options.alarm_seconds));
    ::execv(binary.c_str(), argv.data());
    fail(errno);
  }

  write_end.reset();
  Tracee t;
  t.pid_ = pid;
  t.state_ = TraceeState::Stopped;

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(read_end.get(), &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  if (n == static_cast<ssize_t>(sizeof child_errno)) {
    t.kill_and_reap();
    errno = child_errno;
    throw SpawnError(errno_text(("exec " + binary).c_str()));
  }

  const int status = t.wait_status();
  if (!WIFSTOPPED(status) || WSTOPSIG(status) != SIGTRAP) {
    t.record_termination(status);
    t.kill_and_reap();
    throw SpawnError("tracee did not stop at exec of " + binary);
  }
  if (::ptrace(PTRACE_SETOPTIONS, pid, nullptr,
               reinterpret_cast<void*>(PTRACE_O_EXITKILL | PTRACE_O_TRACEEXEC)) != 0) {
    throw SpawnError(errno_text("PTRACE_SETOPTIONS"));
  }
  t.initial_map_ = t.read_memory_map();
  t.started_at_ = Clock::now();
  if (::ptrace(PTRACE_CONT, pid, nullptr, nullptr) != 0) {
    throw SpawnError(errno_text("PTRACE_CONT"));
  }
  t.state_ = TraceeState::Running;
  return t;
}

Tracee::Tracee(Tracee&& other) noexcept { *this = std::move(other); }

Tracee& Tracee::operator=(Tracee&& other) noexcept {
  if (this != &other) {
    kill_and_reap();
    pid_ = std::exchange(other.pid_, -1);
    state_ = std::exchange(other.state_, TraceeState::Exited);
    final_ = other.final_;
    started_at_ = other.started_at_;
    ended_at_ = other.ended_at_;
    initial_map_ = std::move(other.initial_map_);
    queued_signals_ = std::move(other.queued_signals_);
    stop_outstanding_ = other.stop_outstanding_;
    xstate_ = std::move(other.xstate_);
    xstate_valid_ = other.xstate_valid_;
    fpregs_valid_ = other.fpregs_valid_;
    last_read_ = other.last_read_;
  }
  return *this;
}

Tracee::~Tracee() { kill_and_reap(); }

double Tracee::elapsed_seconds() const {
  return std::chrono::duration<double>(ended_at_ - started_at_).count();
}

int Tracee::wait_status() {
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid_, &status, __WALL);
    if (r == pid_) return status;
    if (r < 0 && errno == EINTR) continue;
    throw TraceError(errno_text("waitpid"));
  }
}

bool Tracee::record_termination(int status) {
  if (WIFEXITED(status)) {
    final_ = FinalStatus::from_exit(WEXITSTATUS(status));
    state_ = TraceeState::Exited;
  } else if (WIFSIGNALED(status)) {
    final_ = FinalStatus::from_signal(WTERMSIG(status));
    state_ = TraceeState::Signaled;
  } else {
    return false;
  }
  ended_at_ = Clock::now();
  return true;
}

void Tracee::kill_and_reap() noexcept {
  if (pid_ <= 0 || terminated()) return;
  ::kill(pid_, SIGKILL);
  for (;;) {
    int status = 0;
    const pid_t r = ::waitpid(pid_, &status, __WALL);
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) {
      state_ = TraceeState::Signaled;
      final_ = FinalStatus::from_signal(SIGKILL);
      ended_at_ = Clock::now();
      return;
    }
    if (record_termination(status)) return;
  }
}

bool Tracee::run_until(Clock::time_point deadline) {
  if (state_ != TraceeState::Running) throw TraceError("run_until: tracee is not running");
  for (;;) {
    int status = 0;
    const pid_t r = ::waitpid(pid_, &status, WNOHANG | __WALL);
    if (r < 0 && errno != EINTR) throw TraceError(errno_text("waitpid"));
    if (r == pid_) {
      if (record_termination(status)) return false;
      // Signal-delivery stop: hand the signal straight back.
      const int sig = (status >> 16) ? 0 : WSTOPSIG(status);
      if (::ptrace(PTRACE_CONT, pid_, nullptr, reinterpret_cast<void*>(static_cast<long>(sig))) !=
          0) {
        throw TraceError(errno_text("PTRACE_CONT"));
      }
      continue;
    }
    const auto now = Clock::now();
    if (now >= deadline) return true;
    std::this_thread::sleep_for(std::min<Clock::duration>(deadline - now, std::chrono::milliseconds(2)));
  }
}

RegisterFile Tracee::stop() {
  if (state_ != TraceeState::Running) throw TraceError("stop: tracee is not running");
  if (::kill(pid_, SIGSTOP) != 0 && errno != ESRCH) throw TraceError(errno_text("kill"));
  for (;;) {
    const int status = wait_status();
    if (record_termination(status)) throw StopRace("tracee terminated before the stop landed");
    if (status >> 16) {  // exec event of a nested exec; keep going
      ::ptrace(PTRACE_CONT, pid_, nullptr, nullptr);
      continue;
    }
    const int sig = WSTOPSIG(status);
    if (sig == SIGSTOP) {
      stop_outstanding_ = false;
    } else {
      // Some other signal won the race. The tracee is stopped all the same;
      // the signal is delivered on resume and our SIGSTOP swallowed later.
      queued_signals_.push_back(sig);
      stop_outstanding_ = true;
    }
    break;
  }
  state_ = TraceeState::Stopped;
  return read_registers();
}

RegisterFile Tracee::read_registers() {
  if (state_ != TraceeState::Stopped) throw TraceError("read_registers: tracee is not stopped");
  user_regs_struct u{};
  if (::ptrace(PTRACE_GETREGS, pid_, nullptr, &u) != 0) {
    throw TraceError(errno_text("PTRACE_GETREGS"));
  }
  RegisterFile r;
  const std::uint64_t gprs[16] = {u.rax, u.rcx, u.rdx, u.rbx, u.rsp, u.rbp, u.rsi, u.rdi,
                                  u.r8,  u.r9,  u.r10, u.r11, u.r12, u.r13, u.r14, u.r15};
  for (int i = 0; i < 16; ++i) r.set64(gpr(i), gprs[i]);
  r.set64(RegisterId::rip, u.rip);
  r.set64(RegisterId::rflags, u.eflags);
  load_vectors(r);
  last_read_ = r;
  return r;
}

void Tracee::load_vectors(RegisterFile& regs) {
  xstate_.assign(kXstateBufferSize, 0);
  iovec iov{xstate_.data(), xstate_.size()};
  xstate_valid_ = ::ptrace(PTRACE_GETREGSET, pid_, reinterpret_cast<void*>(NT_X86_XSTATE),
                           &iov) == 0;
  if (xstate_valid_) {
    xstate_.resize(iov.iov_len);
    std::uint64_t bv = 0;
    std::memcpy(&bv, xstate_.data() + kXstateBvOffset, sizeof bv);
    const std::size_t avx = avx_state_offset();
    const bool upper = avx != 0 && avx + 256 <= xstate_.size();
    regs.set_has_upper_vectors(upper);
    for (int i = 0; i < kVectorCount; ++i) {
      RegisterValue v{};
      std::memcpy(v.data(), xstate_.data() + kXmmOffset + 16 * i, 16);
      if (upper && (bv & 4)) std::memcpy(v.data() + 2, xstate_.data() + avx + 16 * i, 16);
      regs.set(vector_register(i), v);
    }
    return;
  }
  user_fpregs_struct fp{};
  fpregs_valid_ = ::ptrace(PTRACE_GETFPREGS, pid_, nullptr, &fp) == 0;
  if (!fpregs_valid_) throw TraceError(errno_text("PTRACE_GETFPREGS"));
  regs.set_has_upper_vectors(false);
  for (int i = 0; i < kVectorCount; ++i) {
    RegisterValue v{};
    std::memcpy(v.data(), &fp.xmm_space[4 * i], 16);
    regs.set(vector_register(i), v);
  }
}

void Tracee::write_registers(const RegisterFile& regs) {
  if (state_ != TraceeState::Stopped) throw TraceError("write_registers: tracee is not stopped");
  user_regs_struct u{};
  if (::ptrace(PTRACE_GETREGS, pid_, nullptr, &u) != 0) {
    throw TraceError(errno_text("PTRACE_GETREGS"));
  }
  unsigned long long* slots[16] = {&u.rax, &u.rcx, &u.rdx, &u.rbx, &u.rsp, &u.rbp,
                                   &u.rsi, &u.rdi, &u.r8,  &u.r9,  &u.r10, &u.r11,
                                   &u.r12, &u.r13, &u.r14, &u.r15};
  for (int i = 0; i < 16; ++i) *slots[i] = regs.get64(gpr(i));
  u.rip = regs.get64(RegisterId::rip);
  u.eflags = regs.get64(RegisterId::rflags);
  if (::ptrace(PTRACE_SETREGS, pid_, nullptr, &u) != 0) {
    throw TraceError(errno_text("PTRACE_SETREGS"));
  }
  bool vectors_changed = false;
  for (int i = 0; i < kVectorCount; ++i) {
    if (regs.get(vector_register(i)) != last_read_.get(vector_register(i))) vectors_changed = true;
  }
  if (vectors_changed) store_vectors(regs);
  last_read_ = regs;
}

void Tracee::store_vectors(const RegisterFile& regs) {
  if (xstate_valid_) {
    std::uint64_t bv = 0;
    std::memcpy(&bv, xstate_.data() + kXstateBvOffset, sizeof bv);
    const std::size_t avx = avx_state_offset();
    const bool upper = avx != 0 && avx + 256 <= xstate_.size();
    for (int i = 0; i < kVectorCount; ++i) {
      const RegisterValue v = regs.get(vector_register(i));
      std::memcpy(xstate_.data() + kXmmOffset + 16 * i, v.data(), 16);
      // Upper halves in their init state were read as zero, so writing the
      // snapshot back is exact even when the component was not present.
      if (upper) std::memcpy(xstate_.data() + avx + 16 * i, v.data() + 2, 16);
    }
    bv |= 2;
    if (upper) bv |= 4;
    std::memcpy(xstate_.data() + kXstateBvOffset, &bv, sizeof bv);
    iovec iov{xstate_.data(), xstate_.size()};
    if (::ptrace(PTRACE_SETREGSET, pid_, reinterpret_cast<void*>(NT_X86_XSTATE), &iov) != 0) {
      throw TraceError(errno_text("PTRACE_SETREGSET"));
    }
    return;
  }
  user_fpregs_struct fp{};
  if (::ptrace(PTRACE_GETFPREGS, pid_, nullptr, &fp) != 0) {
    throw TraceError(errno_text("PTRACE_GETFPREGS"));
  }
  for (int i = 0; i < kVectorCount; ++i) {
    const RegisterValue v = regs.get(vector_register(i));
    std::memcpy(&fp.xmm_space[4 * i], v.data(), 16);
  }
  if (::ptrace(PTRACE_SETFPREGS, pid_, nullptr, &fp) != 0) {
    throw TraceError(errno_text("PTRACE_SETFPREGS"));
  }
}

StepResult Tracee::single_step() {
  if (state_ != TraceeState::Stopped) throw TraceError("single_step: tracee is not stopped");
  for (;;) {
    if (::ptrace(PTRACE_SINGLESTEP, pid_, nullptr, nullptr) != 0) {
      throw TraceError(errno_text("PTRACE_SINGLESTEP"));
    }
    const int status = wait_status();
    if (record_termination(status)) return {StepResult::Kind::Exited, 0, final_};
    if (status >> 16) continue;
    const int sig = WSTOPSIG(status);
    if (sig == SIGTRAP) {
      siginfo_t info{};
      if (::ptrace(PTRACE_GETSIGINFO, pid_, nullptr, &info) == 0 && info.si_code != TRAP_TRACE &&
          info.si_code != TRAP_BRKPT) {
        queued_signals_.push_back(sig);
        return {StepResult::Kind::StoppedBySignal, sig, {}};
      }
      return {StepResult::Kind::Advanced, 0, {}};
    }
    if (sig == SIGSTOP && stop_outstanding_) {
      // Our own late SIGSTOP; the instruction has not run yet.
      stop_outstanding_ = false;
      continue;
    }
    queued_signals_.push_back(sig);
    return {StepResult::Kind::StoppedBySignal, sig, {}};
  }
}

void Tracee::release() {
  int deliver = 0;
  if (!queued_signals_.empty()) {
    deliver = queued_signals_.front();
    queued_signals_.pop_front();
  }
  for (int sig : queued_signals_) ::kill(pid_, sig);
  queued_signals_.clear();
  if (::ptrace(PTRACE_CONT, pid_, nullptr, reinterpret_cast<void*>(static_cast<long>(deliver))) !=
      0) {
    throw TraceError(errno_text("PTRACE_CONT"));
  }
  state_ = TraceeState::Running;
}

FinalStatus Tracee::resume_and_await() {
  if (state_ != TraceeState::Stopped) throw TraceError("resume_and_await: tracee is not stopped");
  release();
  return wait_loop();
}

FinalStatus Tracee::await_exit() {
  if (terminated()) return final_;
  if (state_ != TraceeState::Running) throw TraceError("await_exit: tracee is not running");
  return wait_loop();
}

FinalStatus Tracee::wait_loop() {
  for (;;) {
    const int status = wait_status();
    if (record_termination(status)) return final_;
    int deliver = 0;
    if (!(status >> 16)) {
      deliver = WSTOPSIG(status);
      if (deliver == SIGSTOP && stop_outstanding_) {
        stop_outstanding_ = false;
        deliver = 0;
      }
    }
    if (::ptrace(PTRACE_CONT, pid_, nullptr, reinterpret_cast<void*>(static_cast<long>(deliver))) !=
            0 &&
        errno != ESRCH) {
      throw TraceError(errno_text("PTRACE_CONT"));
    }
  }
}

std::vector<MappedRegion> Tracee::read_memory_map() const {
  std::ifstream in("/proc/" + std::to_string(pid_) + "/maps");
  if (!in) throw TraceError("cannot open memory map of pid " + std::to_string(pid_));
  return parse_memory_map(in);
}

std::size_t Tracee::read_memory(std::uint64_t address, std::span<std::uint8_t> out) const {
  std::size_t done = 0;
  // Read page by page so a short tail (end of a mapping) still yields the
  // readable prefix.
  while (done < out.size()) {
    const std::uint64_t addr = address + done;
    const std::size_t page_left = 4096 - (addr & 4095);
    const std::size_t want = std::min(out.size() - done, page_left);
    iovec local{out.data() + done, want};
    iovec remote{reinterpret_cast<void*>(addr), want};
    const ssize_t n = ::process_vm_readv(pid_, &local, 1, &remote, 1, 0);
    if (n <= 0) break;
    done += static_cast<std::size_t>(n);
    if (static_cast<std::size_t>(n) < want) break;
  }
  return done;
}

}  // namespace seufi
