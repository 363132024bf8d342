#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seufi/config.hpp"
#include "seufi/injector.hpp"
#include "seufi/tracer.hpp"

namespace seufi {

/// Errors that end a campaign: no baseline, spawn failure, broken comparator.
class CampaignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scratch directory for capture files, removed on destruction.
class RunWorkspace {
 public:
  /// A fresh directory under the system temporary directory.
  static RunWorkspace create();

  RunWorkspace(RunWorkspace&& other) noexcept;
  RunWorkspace& operator=(RunWorkspace&&) = delete;
  RunWorkspace(const RunWorkspace&) = delete;
  ~RunWorkspace();

  const std::filesystem::path& dir() const { return dir_; }
  /// <dir>/rep-<r>/run-<index>.stdout and .stderr
  std::filesystem::path run_stdout(int repetition, std::uint64_t index) const;
  std::filesystem::path run_stderr(int repetition, std::uint64_t index) const;
  std::filesystem::path original_stdout(int repetition) const;
  std::filesystem::path original_stderr(int repetition) const;

 private:
  explicit RunWorkspace(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::filesystem::path rep_dir(int repetition) const;
  std::filesystem::path dir_;
};

struct OriginalProfile {
  double duration_seconds = 0.0;
  int exit_code = 0;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
  /// Executable mappings of the target binary itself.
  std::vector<MappedRegion> main_exec_regions;
};

struct RawRunRecord {
  std::uint64_t run_index = 0;
  int repetition = 0;
  FinalStatus final_status;
  std::optional<InjectionPlan> plan;
  std::string skip_reason;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
  double target_time_seconds = 0.0;
  double wall_seconds = 0.0;

  bool skipped() const { return !plan.has_value(); }
};

/// max(1, ceil(timeout_factor * duration)).
int alarm_seconds_for(double timeout_factor, double original_duration_seconds);

/// The fault-free baseline. Throws CampaignError when the workload cannot
/// be started or does not exit with status 0.
OriginalProfile profile_original(const CampaignConfig& config, const RunWorkspace& workspace,
                                 int repetition);

enum class InjectionMode { Enabled, Disabled };

/// Spawn, sleep until the drawn time, stop, inject, resume and wait.
/// With InjectionMode::Disabled the child is spawned and awaited only.
RawRunRecord execute_test_run(const CampaignConfig& config, const OriginalProfile& profile,
                              std::uint64_t run_index, int repetition, ChoicePolicy& policy,
                              const RunWorkspace& workspace,
                              InjectionMode mode = InjectionMode::Enabled);

}  // namespace seufi
