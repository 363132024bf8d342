#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seufi/log.hpp"
#include "seufi/mask.hpp"

namespace seufi {

struct CampaignConfig {
  std::filesystem::path binary_path;
  std::vector<std::string> binary_args;
  int test_runs = 100;
  int jobs = 1;
  InjectionMask injection_mask = InjectionMask::parse("rwe");
  std::optional<std::string> diff_command;
  std::uint64_t seed = 0;
  double timeout_factor = 3.0;
  std::optional<int> detected_exit_code;
  std::optional<std::string> detected_stderr_pattern;
  bool exclude_library_code = false;
  int max_retry_steps = 1000;
  std::optional<std::filesystem::path> report_path;
  int repetitions = 1;
  Verbosity verbosity = Verbosity::Default;

  friend bool operator==(const CampaignConfig&, const CampaignConfig&) = default;
};

/// Unknown flag, missing flag value, or a value that is not a number.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed command line describing an impossible campaign.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse the arguments that follow the program name. The target binary
/// follows `--`, or is the first argument that is not a flag; everything
/// after it belongs to the target. The result is validated.
CampaignConfig parse_cli(std::span<const std::string> args);

/// Canonical flag rendering; parse_cli(render_cli(c)) == c.
std::vector<std::string> render_cli(const CampaignConfig& config);

/// Throws ValidationError describing the first violated constraint.
void validate(const CampaignConfig& config);

/// Thrown for -h / -help; carries nothing.
class HelpRequested : public std::exception {};

std::string usage_text();

}  // namespace seufi
