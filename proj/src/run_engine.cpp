#include "seufi/run_engine.hpp"

#include <stdlib.h>

#include <cmath>
#include <thread>

namespace seufi {

namespace fs = std::filesystem;

RunWorkspace RunWorkspace::create() {
  std::string tmpl = (fs::temp_directory_path() / "seufi-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) {
    throw CampaignError("cannot create a temporary directory under " +
                        fs::temp_directory_path().string());
  }
  return RunWorkspace(fs::path(tmpl));
}

RunWorkspace::RunWorkspace(RunWorkspace&& other) noexcept : dir_(std::move(other.dir_)) {
  other.dir_.clear();
}

RunWorkspace::~RunWorkspace() {
  if (dir_.empty()) return;
  std::error_code ec;
  fs::remove_all(dir_, ec);
}

fs::path RunWorkspace::rep_dir(int repetition) const {
  fs::path d = dir_ / ("rep-" + std::to_string(repetition));
  std::error_code ec;
  fs::create_directories(d, ec);
  return d;
}

fs::path RunWorkspace::run_stdout(int repetition, std::uint64_t index) const {
  return rep_dir(repetition) / ("run-" + std::to_string(index) + ".stdout");
}
fs::path RunWorkspace::run_stderr(int repetition, std::uint64_t index) const {
  return rep_dir(repetition) / ("run-" + std::to_string(index) + ".stderr");
}
fs::path RunWorkspace::original_stdout(int repetition) const {
  return rep_dir(repetition) / "original.stdout";
}
fs::path RunWorkspace::original_stderr(int repetition) const {
  return rep_dir(repetition) / "original.stderr";
}

int alarm_seconds_for(double timeout_factor, double original_duration_seconds) {
  const double s = std::ceil(timeout_factor * original_duration_seconds);
  if (!(s >= 1.0)) return 1;
  if (s > 1e9) return 1000000000;
  return static_cast<int>(s);
}

OriginalProfile profile_original(const CampaignConfig& config, const RunWorkspace& workspace,
                                 int repetition) {
  SpawnOptions opts;
  opts.binary = config.binary_path;
  opts.args = config.binary_args;
  opts.stdout_path = workspace.original_stdout(repetition);
  opts.stderr_path = workspace.original_stderr(repetition);
  Tracee tracee = [&] {
    try {
      return Tracee::spawn(opts);
    } catch (const SpawnError& e) {
      throw CampaignError(std::string("cannot start the original run: ") + e.what());
    }
  }();
  const std::vector<MappedRegion> regions =
      executable_regions_of(tracee.initial_map(), config.binary_path);
  const FinalStatus status = tracee.await_exit();
  if (!status.exited || status.exit_code != 0) {
    throw CampaignError("the original run ended with " + status.describe() +
                        "; a fault-free baseline must exit with status 0");
  }
  OriginalProfile p;
  p.duration_seconds = tracee.elapsed_seconds();
  p.exit_code = status.exit_code;
  p.stdout_path = opts.stdout_path;
  p.stderr_path = opts.stderr_path;
  p.main_exec_regions = regions;
  return p;
}

RawRunRecord execute_test_run(const CampaignConfig& config, const OriginalProfile& profile,
                              std::uint64_t run_index, int repetition, ChoicePolicy& policy,
                              const RunWorkspace& workspace, InjectionMode mode) {
  RawRunRecord rec;
  rec.run_index = run_index;
  rec.repetition = repetition;
  rec.stdout_path = workspace.run_stdout(repetition, run_index);
  rec.stderr_path = workspace.run_stderr(repetition, run_index);

  SpawnOptions opts;
  opts.binary = config.binary_path;
  opts.args = config.binary_args;
  opts.alarm_seconds = alarm_seconds_for(config.timeout_factor, profile.duration_seconds);
  opts.stdout_path = rec.stdout_path;
  opts.stderr_path = rec.stderr_path;

  if (mode == InjectionMode::Enabled) {
    rec.target_time_seconds = policy.draw_time(profile.duration_seconds);
  }

  Tracee tracee = [&] {
    try {
      return Tracee::spawn(opts);
    } catch (const SpawnError& e) {
      throw CampaignError(std::string("cannot start test run: ") + e.what());
    }
  }();

  auto finish = [&] {
    rec.final_status = tracee.final_status();
    rec.wall_seconds = tracee.elapsed_seconds();
    return rec;
  };

  if (mode == InjectionMode::Disabled) {
    tracee.await_exit();
    rec.skip_reason = "injection disabled";
    return finish();
  }

  // Absolute deadline from the child's start, so scheduling delays before
  // the sleep do not shift the injection point.
  const auto deadline =
      tracee.started_at() + std::chrono::duration_cast<Tracee::Clock::duration>(
                                std::chrono::duration<double>(rec.target_time_seconds));
  const char* race = "tracee terminated before the injection point";
  if (!tracee.run_until(deadline)) {
    rec.skip_reason = race;
    return finish();
  }
  try {
    tracee.stop();
  } catch (const StopRace&) {
    rec.skip_reason = race;
    return finish();
  }

  InjectionSettings settings;
  settings.mask = config.injection_mask;
  settings.exclude_library_code = config.exclude_library_code;
  settings.max_retry_steps = config.max_retry_steps;
  settings.main_regions = profile.main_exec_regions;

  try {
    InjectionResult result = inject(tracee, settings, policy, run_index, rec.target_time_seconds);
    if (auto* skip = std::get_if<Skip>(&result)) {
      rec.skip_reason = skip->reason;
      tracee.kill_and_reap();
      return finish();
    }
    rec.plan = std::get<InjectionPlan>(std::move(result));
    tracee.resume_and_await();
  } catch (const TraceError& e) {
    rec.plan.reset();
    rec.skip_reason = std::string("tracing failed: ") + e.what();
    tracee.kill_and_reap();
  }
  return finish();
}

}  // namespace seufi
