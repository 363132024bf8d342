#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>

#include "support/helpers.hpp"

namespace seufi {
namespace {

using testing::fixture;

struct Result {
  int status;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(SEUFI_CLI) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int st = ::pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

TEST(Cli, Help) {
  const auto r = run("-h");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.output.find("-inject-to"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("-bogus").status, 2);
  EXPECT_EQ(run("").status, 2);
  const auto r = run("-inject-to xq -- " + fixture("checksum").string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("'x'"), std::string::npos) << r.output;
}

TEST(Cli, CampaignWithReport) {
  testing::TempDir d;
  const auto r = run("-test-runs 3 -seed 5 -report " + (d / "rep.json").string() + " -- " +
                     fixture("checksum").string());
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("corrupted"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(d / "rep.json"));
  EXPECT_TRUE(std::filesystem::exists(d / "runs.csv"));
}

TEST(Cli, FatalErrorsExitOne) {
  EXPECT_EQ(run("-test-runs 2 -diff-cmd 'exit 9' " + fixture("checksum").string()).status, 1);
  EXPECT_EQ(run("/bin/false").status, 1);
}

TEST(Cli, ToyEnumerate) {
  const auto r = run("toy-enumerate " + testing::toy_program("straight.toy").string() + " 30");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.output.find("trace length 3"), std::string::npos) << r.output;
}

}  // namespace
}  // namespace seufi
