#include "seufi/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "seufi/tracer.hpp"

namespace seufi {

std::string_view outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Masked: return "masked";
    case OutcomeKind::Corrupted: return "corrupted";
    case OutcomeKind::Exception: return "exception";
    case OutcomeKind::InfiniteExecution: return "infinite";
    case OutcomeKind::Detected: return "detected";
    case OutcomeKind::Skipped: return "skipped";
  }
  return "unknown";
}

std::string RunOutcome::label() const {
  std::string s(outcome_name(kind));
  if (kind == OutcomeKind::Exception) s += "(" + signal_name(signal) + ")";
  return s;
}

CampaignStats aggregate(std::span<const RunOutcome> outcomes) {
  CampaignStats s;
  for (const auto& o : outcomes) {
    if (o.kind == OutcomeKind::Skipped) {
      ++s.skipped_count;
      continue;
    }
    ++s.counts[outcome_slot(o.kind)];
    ++s.total_counted;
    if (o.kind == OutcomeKind::Exception) ++s.exception_signals[o.signal];
  }
  if (s.total_counted == 0) throw std::invalid_argument("aggregate: no counted runs");
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    s.percentages[i] = 100.0 * static_cast<double>(s.counts[i]) /
                       static_cast<double>(s.total_counted);
  }
  return s;
}

RepetitionSummary summarize_repetitions(std::span<const CampaignStats> stats) {
  if (stats.empty()) throw std::invalid_argument("summarize_repetitions: no repetitions");
  for (const auto& s : stats) {
    if (s.total_counted != stats.front().total_counted) {
      throw std::invalid_argument("summarize_repetitions: repetitions differ in run count");
    }
  }
  RepetitionSummary r;
  r.repetitions = static_cast<int>(stats.size());
  const double n = static_cast<double>(stats.size());
  for (std::size_t k = 0; k < 5; ++k) {
    double sum = 0.0;
    for (const auto& s : stats) sum += s.percentages[k];
    r.mean[k] = sum / n;
  }
  if (stats.size() >= 2) {
    std::array<double, 5> sd{};
    for (std::size_t k = 0; k < 5; ++k) {
      double ss = 0.0;
      for (const auto& s : stats) ss += (s.percentages[k] - r.mean[k]) * (s.percentages[k] - r.mean[k]);
      sd[k] = std::sqrt(ss / (n - 1.0));
    }
    r.stddev = sd;
  }
  return r;
}

}  // namespace seufi
