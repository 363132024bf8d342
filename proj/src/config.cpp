#include "seufi/config.hpp"

#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <regex>

namespace seufi {

namespace {

template <typename T>
T parse_integer(const std::string& flag, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw UsageError("flag " + flag + " expects an integer, got \"" + text + "\"");
  }
  return value;
}

double parse_real(const std::string& flag, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw UsageError("flag " + flag + " expects a number, got \"" + text + "\"");
  }
  return v;
}

std::string render_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string usage_text() {
  return R"(usage: seufi [flags] [--] BINARY [ARGS...]

  -j N                       concurrent test runs (default 1)
  -test-runs N               injected runs counted per repetition (default 100)
  -inject-to MASK            injection targets over r,w,e,i,c,o (default rwe)
  -diff-cmd CMD              comparator run in bash; {ORIG_OUT} {TEST_OUT}
                             {ORIG_ERR} {TEST_ERR} expand to capture files;
                             exit 0 = match, 1 = mismatch
  -seed N                    campaign seed (default 0)
  -timeout-factor F          alarm after F x original duration (default 3.0)
  -detected-exit-code N      exit code meaning "fault detected"
  -detected-stderr-regex RE  stderr pattern meaning "fault detected"
  -no-lib-injections         inject only while executing the target binary
  -max-retry-steps N         single-step budget when searching a target (default 1000)
  -report PATH               write a JSON report and runs.csv beside it
  -repetitions N             repeat the whole campaign N times (default 1)
  -v, -vv                    per-run lines / per-run JSON on stderr

  seufi toy-enumerate FILE [BUDGET]   exhaustive outcome table of a toy program
)";
}

CampaignConfig parse_cli(std::span<const std::string> args) {
  CampaignConfig c;
  bool have_binary = false;
  std::size_t i = 0;
  auto value = [&](const std::string& flag) -> const std::string& {
    if (i + 1 >= args.size()) throw UsageError("flag " + flag + " requires a value");
    return args[++i];
  };
  for (; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--") {
      ++i;
      break;
    }
    if (a.empty() || a[0] != '-') break;
    if (a == "-j") {
      c.jobs = parse_integer<int>(a, value(a));
    } else if (a == "-test-runs") {
      c.test_runs = parse_integer<int>(a, value(a));
    } else if (a == "-inject-to") {
      const std::string& m = value(a);
      try {
        c.injection_mask = InjectionMask::parse(m);
      } catch (const MaskError& e) {
        throw ValidationError(e.what());
      }
    } else if (a == "-diff-cmd") {
      c.diff_command = value(a);
    } else if (a == "-seed") {
      c.seed = parse_integer<std::uint64_t>(a, value(a));
    } else if (a == "-timeout-factor") {
      c.timeout_factor = parse_real(a, value(a));
    } else if (a == "-detected-exit-code") {
      c.detected_exit_code = parse_integer<int>(a, value(a));
    } else if (a == "-detected-stderr-regex") {
      c.detected_stderr_pattern = value(a);
    } else if (a == "-no-lib-injections") {
      c.exclude_library_code = true;
    } else if (a == "-max-retry-steps") {
      c.max_retry_steps = parse_integer<int>(a, value(a));
    } else if (a == "-report") {
      c.report_path = std::filesystem::path(value(a));
    } else if (a == "-repetitions") {
      c.repetitions = parse_integer<int>(a, value(a));
    } else if (a == "-v") {
      c.verbosity = Verbosity::Verbose;
    } else if (a == "-vv") {
      c.verbosity = Verbosity::Debug;
    } else if (a == "-h" || a == "-help" || a == "--help") {
      throw HelpRequested();
    } else {
      throw UsageError("unknown flag " + a);
    }
  }
  if (i < args.size()) {
    c.binary_path = args[i++];
    have_binary = true;
    c.binary_args.assign(args.begin() + static_cast<std::ptrdiff_t>(i), args.end());
  }
  if (!have_binary) throw UsageError("no target binary given");
  validate(c);
  return c;
}

void validate(const CampaignConfig& c) {
  if (c.test_runs < 1) throw ValidationError("-test-runs must be at least 1");
  if (c.jobs < 1) throw ValidationError("-j must be at least 1");
  if (!(c.timeout_factor > 1.0)) throw ValidationError("-timeout-factor must exceed 1.0");
  if (c.repetitions < 1) throw ValidationError("-repetitions must be at least 1");
  if (c.max_retry_steps < 1) throw ValidationError("-max-retry-steps must be at least 1");
  if (c.detected_exit_code && (*c.detected_exit_code < 0 || *c.detected_exit_code > 255)) {
    throw ValidationError("-detected-exit-code must be within 0..255");
  }
  if (c.detected_stderr_pattern) {
    try {
      std::regex re(*c.detected_stderr_pattern);
    } catch (const std::regex_error& e) {
      throw ValidationError("-detected-stderr-regex: " + std::string(e.what()));
    }
  }
  if (c.diff_command && c.diff_command->empty()) {
    throw ValidationError("-diff-cmd must not be empty");
  }
  std::error_code ec;
  if (c.binary_path.empty() || !std::filesystem::is_regular_file(c.binary_path, ec)) {
    throw ValidationError("target binary " + c.binary_path.string() + " does not exist");
  }
  if (::access(c.binary_path.c_str(), X_OK) != 0) {
    throw ValidationError("target binary " + c.binary_path.string() + " is not executable");
  }
}

std::vector<std::string> render_cli(const CampaignConfig& c) {
  std::vector<std::string> out = {
      "-j", std::to_string(c.jobs),
      "-test-runs", std::to_string(c.test_runs),
      "-inject-to", c.injection_mask.str(),
      "-seed", std::to_string(c.seed),
      "-timeout-factor", render_real(c.timeout_factor),
      "-max-retry-steps", std::to_string(c.max_retry_steps),
      "-repetitions", std::to_string(c.repetitions),
  };
  if (c.diff_command) out.insert(out.end(), {"-diff-cmd", *c.diff_command});
  if (c.detected_exit_code) {
    out.insert(out.end(), {"-detected-exit-code", std::to_string(*c.detected_exit_code)});
  }
  if (c.detected_stderr_pattern) {
    out.insert(out.end(), {"-detected-stderr-regex", *c.detected_stderr_pattern});
  }
  if (c.exclude_library_code) out.push_back("-no-lib-injections");
  if (c.report_path) out.insert(out.end(), {"-report", c.report_path->string()});
  if (c.verbosity == Verbosity::Verbose) out.push_back("-v");
  if (c.verbosity == Verbosity::Debug) out.push_back("-vv");
  out.push_back("--");
  out.push_back(c.binary_path.string());
  out.insert(out.end(), c.binary_args.begin(), c.binary_args.end());
  return out;
}

}  // namespace seufi
