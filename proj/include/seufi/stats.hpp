#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>

#include "seufi/outcome.hpp"

namespace seufi {

struct CampaignStats {
  std::array<std::size_t, 5> counts{};      // indexed by outcome_slot
  std::array<double, 5> percentages{};
  std::size_t skipped_count = 0;
  std::size_t total_counted = 0;
  std::map<int, std::size_t> exception_signals;

  std::size_t count(OutcomeKind k) const { return counts.at(outcome_slot(k)); }
  double percentage(OutcomeKind k) const { return percentages.at(outcome_slot(k)); }
};

/// Throws std::invalid_argument when no outcome besides Skipped is present.
CampaignStats aggregate(std::span<const RunOutcome> outcomes);

struct RepetitionSummary {
  std::array<double, 5> mean{};
  /// Sample standard deviation (n - 1); absent for a single repetition.
  std::optional<std::array<double, 5>> stddev;
  int repetitions = 0;
};

/// Throws std::invalid_argument for an empty list or unequal run counts.
RepetitionSummary summarize_repetitions(std::span<const CampaignStats> stats);

}  // namespace seufi
