#pragma once

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace seufi {

enum class Verbosity { Default, Verbose, Debug };

/// Everything needed to reconstruct one run attempt after the fact.
struct RunLogEntry {
  std::uint64_t run_index = 0;
  int repetition = 0;
  double started_s = 0.0;   // since campaign start
  double finished_s = 0.0;  // since campaign start

  bool injected = false;
  double target_time_s = 0.0;
  std::string register_name;
  int bit = 0;
  std::string phase;
  std::string ip_hex;
  int retries = 0;
  std::string value_before;
  std::string value_after;
  std::string instruction_bytes;
  std::vector<std::string> accesses;  // "rax:rw:e"

  std::string final_status;
  std::string outcome;
  std::string rule;
  std::string skip_reason;
  double wall_s = 0.0;

  bool anomalous() const { return outcome == "skipped" || !skip_reason.empty(); }

  std::string to_json_line() const;
  /// Throws std::invalid_argument on malformed input.
  static RunLogEntry from_json_line(std::string_view line);

  friend bool operator==(const RunLogEntry&, const RunLogEntry&) = default;
};

/// Serialized diagnostic sink. Every call writes whole lines under a lock,
/// so concurrent workers never interleave partial lines.
class Logger {
 public:
  Logger(std::ostream& sink, Verbosity verbosity) : sink_(sink), verbosity_(verbosity) {}

  Verbosity verbosity() const { return verbosity_; }

  /// Default: anomalies only. Verbose: one line per run. Debug: one JSON
  /// document per run.
  void emit(const RunLogEntry& entry);
  void warn(std::string_view message);
  void info(std::string_view message);

 private:
  void write_line(const std::string& line);

  std::ostream& sink_;
  Verbosity verbosity_;
  std::mutex mutex_;
};

}  // namespace seufi
