#include "seufi/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <variant>

#include "seufi/classifier.hpp"
#include "seufi/rng.hpp"

namespace seufi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string access_tag(const RegisterAccess& a) {
  std::string rw;
  if (a.is_read) rw += 'r';
  if (a.is_written) rw += 'w';
  return a.name() + ":" + rw + ":" + (a.is_explicit ? "e" : "i");
}

std::string hex_address(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

// Dispatcher state and result channel for one repetition. Workers claim run
// indices under the lock; finished rows go back through `queue`.
struct Dispatch {
  std::mutex m;
  std::condition_variable cv;
  std::uint64_t next_index = 0;
  std::size_t in_flight = 0;
  std::size_t counted = 0;
  std::size_t attempts = 0;
  std::size_t target = 0;
  std::size_t cap = 0;
  std::size_t workers_done = 0;
  bool stop = false;
  std::deque<std::variant<RunRow, std::exception_ptr>> queue;

  bool can_dispatch() const {
    return !stop && counted + in_flight < target && attempts < cap;
  }
};

void worker(Dispatch& d, const CampaignConfig& config, const OriginalProfile& profile,
            int repetition, const PolicyFactory& factory, const RunWorkspace& workspace) {
  for (;;) {
    std::uint64_t index = 0;
    {
      std::unique_lock lk(d.m);
      d.cv.wait(lk, [&] { return d.can_dispatch() || d.stop || d.in_flight == 0; });
      if (!d.can_dispatch()) break;
      index = d.next_index++;
      ++d.in_flight;
      ++d.attempts;
    }
    std::variant<RunRow, std::exception_ptr> msg;
    bool counted = false;
    try {
      auto policy = factory(repetition, index);
      RunRow row;
      row.record = execute_test_run(config, profile, index, repetition, *policy, workspace);
      row.outcome = classify(row.record, profile, config);
      counted = row.outcome.kind != OutcomeKind::Skipped;
      msg = std::move(row);
    } catch (...) {
      msg = std::current_exception();
    }
    std::lock_guard lk(d.m);
    --d.in_flight;
    if (counted) ++d.counted;
    if (std::holds_alternative<std::exception_ptr>(msg)) d.stop = true;
    d.queue.push_back(std::move(msg));
    d.cv.notify_all();
  }
  std::lock_guard lk(d.m);
  ++d.workers_done;
  d.cv.notify_all();
}

RepetitionResult run_repetition(const CampaignConfig& config, int repetition,
                                const PolicyFactory& factory, const RunWorkspace& workspace,
                                Logger& log, Clock::time_point t0) {
  RepetitionResult rep;
  rep.repetition = repetition;
  rep.original = profile_original(config, workspace, repetition);
  if (rep.original.duration_seconds < 0.05) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "original run took %.3f s; injection timing is unreliable below 50 ms",
                  rep.original.duration_seconds);
    log.warn(buf);
  }
  if (config.exclude_library_code && rep.original.main_exec_regions.empty()) {
    throw CampaignError("no executable mapping of " + config.binary_path.string() +
                        " found; cannot restrict injections to it");
  }

  Dispatch d;
  d.target = static_cast<std::size_t>(config.test_runs);
  d.cap = 10 * d.target;
  const int jobs = config.jobs;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(jobs));
  for (int j = 0; j < jobs; ++j) {
    threads.emplace_back(worker, std::ref(d), std::cref(config), std::cref(rep.original),
                         repetition, std::cref(factory), std::cref(workspace));
  }

  std::exception_ptr error;
  std::vector<RunRow> rows;
  for (;;) {
    std::unique_lock lk(d.m);
    d.cv.wait(lk, [&] { return !d.queue.empty() || d.workers_done == threads.size(); });
    if (d.queue.empty()) break;
    auto msg = std::move(d.queue.front());
    d.queue.pop_front();
    lk.unlock();
    if (auto* e = std::get_if<std::exception_ptr>(&msg)) {
      if (!error) error = *e;
      continue;
    }
    RunRow& row = std::get<RunRow>(msg);
    log.emit(make_log_entry(row, seconds_since(t0)));
    std::error_code ec;
    std::filesystem::remove(row.record.stdout_path, ec);
    std::filesystem::remove(row.record.stderr_path, ec);
    rows.push_back(std::move(row));
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);

  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    return a.record.run_index < b.record.run_index;
  });
  std::size_t counted = 0;
  for (auto& row : rows) {
    const bool skipped = row.outcome.kind == OutcomeKind::Skipped;
    if (!skipped && counted == d.target) continue;
    if (!skipped) ++counted;
    rep.runs.push_back(std::move(row));
  }
  if (counted < d.target) {
    throw CampaignError(
        "only " + std::to_string(counted) + " of " + std::to_string(d.target) +
        " runs received an injection after " + std::to_string(d.attempts) +
        " attempts; the workload is too short-lived for time-based injection "
        "(make it run longer, at least tens of milliseconds)");
  }
  std::vector<RunOutcome> outcomes;
  outcomes.reserve(rep.runs.size());
  for (const auto& r : rep.runs) outcomes.push_back(r.outcome);
  rep.stats = aggregate(outcomes);
  return rep;
}

}  // namespace

PolicyFactory seeded_policies(std::uint64_t seed) {
  return [seed](int repetition, std::uint64_t run_index) -> std::unique_ptr<ChoicePolicy> {
    return std::make_unique<RandomChoice>(derive_run_seed(seed, repetition, run_index));
  };
}

RunLogEntry make_log_entry(const RunRow& row, double finished_since_start_s) {
  const RawRunRecord& r = row.record;
  RunLogEntry e;
  e.run_index = r.run_index;
  e.repetition = r.repetition;
  e.finished_s = finished_since_start_s;
  e.started_s = std::max(0.0, finished_since_start_s - r.wall_seconds);
  e.target_time_s = r.target_time_seconds;
  if (r.plan) {
    const InjectionPlan& p = *r.plan;
    e.injected = true;
    e.register_name = p.register_name();
    e.bit = p.bit_index;
    e.phase = std::string(phase_name(p.phase));
    e.ip_hex = hex_address(p.instruction_address);
    e.retries = p.retries_used;
    e.value_before = p.value_before_hex;
    e.value_after = p.value_after_hex;
    e.instruction_bytes = p.instruction_bytes_hex;
    for (const auto& a : p.accesses) e.accesses.push_back(access_tag(a));
  }
  e.final_status = r.final_status.describe();
  e.outcome = row.outcome.label();
  e.rule = row.outcome.rule;
  e.skip_reason = r.skip_reason;
  e.wall_s = r.wall_seconds;
  return e;
}

CampaignResult run_campaign(const CampaignConfig& config, const CampaignHooks& hooks) {
  validate(config);
  const auto t0 = Clock::now();
  Logger fallback(std::cerr, config.verbosity);
  Logger& log = hooks.logger ? *hooks.logger : fallback;
  const PolicyFactory factory =
      hooks.policy_factory ? hooks.policy_factory : seeded_policies(config.seed);

  const unsigned hw = std::thread::hardware_concurrency();
  if (hw != 0 && static_cast<unsigned>(config.jobs) > hw) {
    log.warn("-j " + std::to_string(config.jobs) + " exceeds the " + std::to_string(hw) +
             " available hardware threads; runs will be slower than the original and more "
             "of them may hit the timeout");
  }

  RunWorkspace workspace = RunWorkspace::create();
  CampaignResult result;
  for (int r = 0; r < config.repetitions; ++r) {
    result.repetitions.push_back(run_repetition(config, r, factory, workspace, log, t0));
  }
  std::vector<CampaignStats> stats;
  for (const auto& rep : result.repetitions) stats.push_back(rep.stats);
  result.summary = summarize_repetitions(stats);
  result.wall_seconds = seconds_since(t0);
  return result;
}

}  // namespace seufi
