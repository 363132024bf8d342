#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "seufi/campaign.hpp"
#include "seufi/classifier.hpp"
#include "seufi/config.hpp"
#include "seufi/report.hpp"
#include "seufi/toy.hpp"

namespace {

int toy_enumerate(std::span<const std::string> args) {
  if (args.empty() || args.size() > 2) {
    std::cerr << "usage: seufi toy-enumerate FILE [BUDGET]\n";
    return 2;
  }
  std::ifstream in(args[0]);
  if (!in) {
    std::cerr << "seufi: cannot read " << args[0] << "\n";
    return 1;
  }
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t budget = 3000;
  if (args.size() == 2) budget = std::stoul(args[1]);
  const auto prog = seufi::toy::parse(text);
  const auto res = seufi::toy::enumerate_outcomes(prog, budget);
  std::printf("trace length %zu, %zu flips\n", res.steps, res.outcomes.size());
  for (auto k : seufi::kCountedOutcomes) {
    std::printf("  %-10s %8zu  %9.5f%%\n", std::string(seufi::outcome_name(k)).c_str(),
                res.stats.count(k), res.stats.percentage(k));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (!args.empty() && args[0] == "toy-enumerate") {
      return toy_enumerate(std::span(args).subspan(1));
    }
    const seufi::CampaignConfig config = seufi::parse_cli(args);
    const seufi::CampaignResult result = seufi::run_campaign(config);
    std::cout << seufi::render_summary(result);
    if (config.report_path) seufi::write_report(result, config, *config.report_path);
    return 0;
  } catch (const seufi::HelpRequested&) {
    std::cout << seufi::usage_text();
    return 0;
  } catch (const seufi::UsageError& e) {
    std::cerr << "seufi: " << e.what() << "\n\n" << seufi::usage_text();
    return 2;
  } catch (const seufi::ValidationError& e) {
    std::cerr << "seufi: " << e.what() << "\n";
    return 2;
  } catch (const seufi::ComparatorError& e) {
    std::cerr << "seufi: comparator failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "seufi: " << e.what() << "\n";
    return 1;
  }
}
