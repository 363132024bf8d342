#pragma once

#include <array>
#include <string>
#include <string_view>

namespace seufi {

enum class OutcomeKind { Masked, Corrupted, Exception, InfiniteExecution, Detected, Skipped };

/// The five outcomes that enter statistics, in report order.
inline constexpr std::array<OutcomeKind, 5> kCountedOutcomes = {
    OutcomeKind::Masked, OutcomeKind::Corrupted, OutcomeKind::Exception,
    OutcomeKind::InfiniteExecution, OutcomeKind::Detected};

constexpr std::size_t outcome_slot(OutcomeKind k) { return static_cast<std::size_t>(k); }

/// "masked", "corrupted", "exception", "infinite", "detected", "skipped".
std::string_view outcome_name(OutcomeKind k);

struct RunOutcome {
  OutcomeKind kind = OutcomeKind::Masked;
  int signal = 0;     // Exception only
  std::string rule;   // which classification rule fired, for the log

  /// outcome_name, with the signal for exceptions: "exception(SIGSEGV)".
  std::string label() const;

  friend bool operator==(const RunOutcome& a, const RunOutcome& b) {
    return a.kind == b.kind && a.signal == b.signal;
  }
};

}  // namespace seufi
