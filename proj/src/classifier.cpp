#include "seufi/classifier.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>

extern char** environ;

namespace seufi {

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CampaignError("cannot read capture file " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// Exit status of `bash -c command`; the comparator's stderr is saved so a
// failure can be reported with it.
int run_shell(const std::string& command, const std::filesystem::path& stderr_path) {
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 2, stderr_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  std::string sh = "/bin/bash";
  std::string dash_c = "-c";
  std::string cmd = command;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, "/bin/bash", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw ComparatorError("cannot launch comparator shell: " + std::string(std::strerror(rc)));
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw ComparatorError("waitpid on comparator failed");
  }
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return WEXITSTATUS(status);
}

}  // namespace

std::string render_diff_command(const std::string& templ, const RawRunRecord& record,
                                const OriginalProfile& profile) {
  std::string s = templ;
  replace_all(s, "{ORIG_OUT}", profile.stdout_path.string());
  replace_all(s, "{TEST_OUT}", record.stdout_path.string());
  replace_all(s, "{ORIG_ERR}", profile.stderr_path.string());
  replace_all(s, "{TEST_ERR}", record.stderr_path.string());
  return s;
}

Comparison compare_outputs(const RawRunRecord& record, const OriginalProfile& profile,
                           const CampaignConfig& config) {
  if (!config.diff_command) {
    const bool same_code =
        record.final_status.exited && record.final_status.exit_code == profile.exit_code;
    const bool same = same_code && slurp(record.stdout_path) == slurp(profile.stdout_path) &&
                      slurp(record.stderr_path) == slurp(profile.stderr_path);
    return same ? Comparison::Match : Comparison::Mismatch;
  }
  const std::string cmd = render_diff_command(*config.diff_command, record, profile);
  std::filesystem::path err = record.stderr_path;
  err += ".cmp";
  const int code = run_shell(cmd, err);
  if (code == 0) return Comparison::Match;
  if (code == 1) return Comparison::Mismatch;
  std::string msg = "comparator exited with status " + std::to_string(code) + ": " + cmd;
  std::error_code ec;
  if (std::filesystem::exists(err, ec)) {
    const std::string text = slurp(err);
    if (!text.empty()) msg += "\n" + text;
  }
  throw ComparatorError(msg);
}

RunOutcome classify(const RawRunRecord& record, const OriginalProfile& profile,
                    const CampaignConfig& config) {
  if (record.skipped()) {
    return {OutcomeKind::Skipped, 0, "skipped: " + record.skip_reason};
  }
  const FinalStatus& st = record.final_status;
  if (config.detected_exit_code && st.exited && st.exit_code == *config.detected_exit_code) {
    return {OutcomeKind::Detected, 0,
            "detected: exit code " + std::to_string(*config.detected_exit_code)};
  }
  if (config.detected_stderr_pattern) {
    const std::regex re(*config.detected_stderr_pattern);
    if (std::regex_search(slurp(record.stderr_path), re)) {
      return {OutcomeKind::Detected, 0,
              "detected: stderr matches /" + *config.detected_stderr_pattern + "/"};
    }
  }
  if (!st.exited && st.signal == SIGALRM) {
    return {OutcomeKind::InfiniteExecution, 0, "alarm fired"};
  }
  if (!st.exited) {
    return {OutcomeKind::Exception, st.signal, "terminated by " + signal_name(st.signal)};
  }
  if (compare_outputs(record, profile, config) == Comparison::Mismatch) {
    return {OutcomeKind::Corrupted, 0, "comparator: mismatch"};
  }
  if (st.exit_code != profile.exit_code) {
    return {OutcomeKind::Corrupted, 0, "comparator: match, exit code differs"};
  }
  return {OutcomeKind::Masked, 0, "comparator: match"};
}

}  // namespace seufi
