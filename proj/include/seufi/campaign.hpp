#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "seufi/config.hpp"
#include "seufi/injector.hpp"
#include "seufi/log.hpp"
#include "seufi/outcome.hpp"
#include "seufi/run_engine.hpp"
#include "seufi/stats.hpp"

namespace seufi {

struct RunRow {
  RawRunRecord record;
  RunOutcome outcome;
};

struct RepetitionResult {
  int repetition = 0;
  OriginalProfile original;
  CampaignStats stats;
  /// Every attempt that entered the statistics or was skipped, by run index.
  std::vector<RunRow> runs;
};

struct CampaignResult {
  std::vector<RepetitionResult> repetitions;
  RepetitionSummary summary;
  double wall_seconds = 0.0;
};

/// Builds the choice source for one run. Must be a pure function of its
/// arguments for results to be independent of scheduling.
using PolicyFactory =
    std::function<std::unique_ptr<ChoicePolicy>(int repetition, std::uint64_t run_index)>;

/// RandomChoice seeded with derive_run_seed(seed, repetition, run_index).
PolicyFactory seeded_policies(std::uint64_t seed);

struct CampaignHooks {
  PolicyFactory policy_factory;  // empty: seeded_policies(config.seed)
  Logger* logger = nullptr;      // empty: stderr at config.verbosity
};

/// Profile, dispatch, classify and aggregate every repetition. Throws
/// CampaignError (or ComparatorError) on campaign-fatal conditions.
CampaignResult run_campaign(const CampaignConfig& config, const CampaignHooks& hooks = {});

RunLogEntry make_log_entry(const RunRow& row, double finished_since_start_s);

}  // namespace seufi
