#include <gtest/gtest.h>

#include <random>

#include "seufi/config.hpp"
#include "support/helpers.hpp"

namespace seufi {
namespace {

using testing::fixture;

std::vector<std::string> argv(std::initializer_list<std::string> a) { return a; }

TEST(Cli, SingleDashInvocation) {
  const auto bin = fixture("print_hello").string();
  const auto c = parse_cli(argv({"-j", "4", "-test-runs", "1000", "-inject-to", "rwe", "--", bin}));
  EXPECT_EQ(c.jobs, 4);
  EXPECT_EQ(c.test_runs, 1000);
  EXPECT_EQ(c.injection_mask.str(), "rwe");
  EXPECT_EQ(c.binary_path, bin);
}

TEST(Cli, Defaults) {
  const auto bin = fixture("print_hello").string();
  const auto c = parse_cli(argv({"--", bin}));
  EXPECT_EQ(c.jobs, 1);
  EXPECT_EQ(c.test_runs, 100);
  EXPECT_EQ(c.injection_mask.str(), "rwe");
  EXPECT_EQ(c.seed, 0u);
  EXPECT_DOUBLE_EQ(c.timeout_factor, 3.0);
  EXPECT_EQ(c.repetitions, 1);
  EXPECT_FALSE(c.diff_command);
  EXPECT_FALSE(c.exclude_library_code);
}

TEST(Cli, BadMaskNamesCharacter) {
  const auto bin = fixture("print_hello").string();
  try {
    parse_cli(argv({"-inject-to", "xq", "--", bin}));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos) << e.what();
  }
}

TEST(Cli, TargetArgumentsArePassedThrough) {
  const auto bin = fixture("print_hello").string();
  const auto c = parse_cli(argv({"-seed", "7", bin, "-j", "x"}));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.binary_args, (std::vector<std::string>{"-j", "x"}));
}

TEST(Cli, Errors) {
  const auto bin = fixture("print_hello").string();
  EXPECT_THROW(parse_cli(argv({})), UsageError);
  EXPECT_THROW(parse_cli(argv({"-bogus", bin})), UsageError);
  EXPECT_THROW(parse_cli(argv({"-j"})), UsageError);
  EXPECT_THROW(parse_cli(argv({"-j", "two", bin})), UsageError);
  EXPECT_THROW(parse_cli(argv({"-j", "0", bin})), ValidationError);
  EXPECT_THROW(parse_cli(argv({"-test-runs", "0", bin})), ValidationError);
  EXPECT_THROW(parse_cli(argv({"-timeout-factor", "1.0", bin})), ValidationError);
  EXPECT_THROW(parse_cli(argv({"-detected-exit-code", "256", bin})), ValidationError);
  EXPECT_THROW(parse_cli(argv({"-detected-stderr-regex", "(", bin})), ValidationError);
  EXPECT_THROW(parse_cli(argv({"/nonexistent/binary"})), ValidationError);
  EXPECT_THROW(parse_cli(argv({"-h"})), HelpRequested);
}

// parse(render(c)) == c over randomly generated valid configurations.
TEST(CliProperty, RenderRoundTrips) {
  std::mt19937_64 gen(99);
  const char* masks[] = {"we", "rwe", "rwei", "rweic", "rweico", "ri", "wio"};
  for (int i = 0; i < 500; ++i) {
    CampaignConfig c;
    c.binary_path = fixture(gen() % 2 ? "print_hello" : "spin");
    for (std::uint64_t k = gen() % 4; k > 0; --k) c.binary_args.push_back("a b" + std::to_string(gen() % 100));
    c.test_runs = 1 + static_cast<int>(gen() % 5000);
    c.jobs = 1 + static_cast<int>(gen() % 16);
    c.injection_mask = InjectionMask::parse(masks[gen() % 7]);
    if (gen() % 2) c.diff_command = "diff {ORIG_OUT} {TEST_OUT} >/dev/null";
    c.seed = gen();
    c.timeout_factor = 1.0 + std::uniform_real_distribution<double>(1e-6, 20.0)(gen);
    if (gen() % 2) c.detected_exit_code = static_cast<int>(gen() % 256);
    if (gen() % 2) c.detected_stderr_pattern = "DETECT(ED)?";
    c.exclude_library_code = gen() % 2;
    c.max_retry_steps = 1 + static_cast<int>(gen() % 5000);
    if (gen() % 2) c.report_path = "/tmp/r" + std::to_string(gen() % 10) + ".json";
    c.repetitions = 1 + static_cast<int>(gen() % 10);
    c.verbosity = static_cast<Verbosity>(gen() % 3);
    const auto rendered = render_cli(c);
    ASSERT_EQ(parse_cli(rendered), c) << "iteration " << i;
  }
}

}  // namespace
}  // namespace seufi
