#pragma once

#include <stdexcept>
#include <string>

#include "seufi/config.hpp"
#include "seufi/outcome.hpp"
#include "seufi/run_engine.hpp"

namespace seufi {

enum class Comparison { Match, Mismatch };

/// The user comparator could not run or exited with status >= 2.
class ComparatorError : public CampaignError {
 public:
  using CampaignError::CampaignError;
};

/// Built-in: stdout, stderr and exit code must all be identical. User
/// command: placeholders are replaced by capture paths and the command runs
/// under bash; exit 0 is a match, 1 a mismatch.
Comparison compare_outputs(const RawRunRecord& record, const OriginalProfile& profile,
                           const CampaignConfig& config);

/// Priority: Skipped, Detected, InfiniteExecution (alarm), Exception,
/// Corrupted, Masked.
RunOutcome classify(const RawRunRecord& record, const OriginalProfile& profile,
                    const CampaignConfig& config);

/// Substitute {ORIG_OUT} {TEST_OUT} {ORIG_ERR} {TEST_ERR}.
std::string render_diff_command(const std::string& templ, const RawRunRecord& record,
                                 const OriginalProfile& profile);

}  // namespace seufi
