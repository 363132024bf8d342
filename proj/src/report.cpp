#include "seufi/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "seufi/tracer.hpp"

namespace seufi {

using nlohmann::json;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json per_outcome(const std::array<double, 5>& v) {
  json j = json::object();
  for (OutcomeKind k : kCountedOutcomes) j[std::string(outcome_name(k))] = v[outcome_slot(k)];
  return j;
}

}  // namespace

std::string runs_csv(const CampaignResult& result) {
  std::ostringstream out;
  out << "run_index,repetition,time_s,register,bit,phase,ip_hex,outcome,wall_s\n";
  for (const auto& rep : result.repetitions) {
    for (const auto& row : rep.runs) {
      const RawRunRecord& r = row.record;
      out << r.run_index << ',' << r.repetition << ',' << fmt("%.9f", r.target_time_seconds)
          << ',';
      if (r.plan) {
        char ip[24];
        std::snprintf(ip, sizeof ip, "0x%llx",
                      static_cast<unsigned long long>(r.plan->instruction_address));
        out << r.plan->register_name() << ',' << r.plan->bit_index << ','
            << phase_name(r.plan->phase) << ',' << ip;
      } else {
        out << ",,,";
      }
      out << ',' << csv_field(row.outcome.label()) << ',' << fmt("%.6f", r.wall_seconds)
          << '\n';
    }
  }
  return out.str();
}

std::string report_json(const CampaignResult& result, const CampaignConfig& config) {
  json doc;
  doc["config_echo"] = render_cli(config);
  if (!result.repetitions.empty()) {
    const OriginalProfile& o = result.repetitions.front().original;
    json regions = json::array();
    for (const auto& m : o.main_exec_regions) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "0x%llx-0x%llx", static_cast<unsigned long long>(m.start),
                    static_cast<unsigned long long>(m.end));
      regions.push_back(buf);
    }
    doc["original"] = {{"duration_s", o.duration_seconds},
                       {"exit_code", o.exit_code},
                       {"main_exec_regions", regions}};
  }
  json reps = json::array();
  for (const auto& rep : result.repetitions) {
    json counts = json::object();
    for (OutcomeKind k : kCountedOutcomes) {
      counts[std::string(outcome_name(k))] = rep.stats.count(k);
    }
    json sigs = json::object();
    for (const auto& [sig, n] : rep.stats.exception_signals) sigs[signal_name(sig)] = n;
    reps.push_back({{"repetition", rep.repetition},
                    {"original_duration_s", rep.original.duration_seconds},
                    {"counts", counts},
                    {"percentages", per_outcome(rep.stats.percentages)},
                    {"skipped", rep.stats.skipped_count},
                    {"exception_signals", sigs}});
  }
  doc["repetitions"] = reps;
  doc["summary"] = {{"repetitions", result.summary.repetitions},
                    {"mean", per_outcome(result.summary.mean)},
                    {"stddev", result.summary.stddev ? per_outcome(*result.summary.stddev)
                                                     : json(nullptr)}};
  doc["wall_s"] = result.wall_seconds;
  return doc.dump(2) + "\n";
}

void write_report(const CampaignResult& result, const CampaignConfig& config,
                  const std::filesystem::path& path) {
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + p.string());
  };
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write(path, report_json(result, config));
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  write(dir / "runs.csv", runs_csv(result));
}

std::string render_summary(const CampaignResult& result) {
  std::ostringstream out;
  for (const auto& rep : result.repetitions) {
    const CampaignStats& s = rep.stats;
    out << "repetition " << rep.repetition << ": original " << fmt("%.3f", rep.original.duration_seconds)
        << " s, " << s.total_counted << " runs, " << s.skipped_count << " skipped\n";
    for (OutcomeKind k : kCountedOutcomes) {
      char line[96];
      std::snprintf(line, sizeof line, "  %-10s %8zu  %7.2f%%\n",
                    std::string(outcome_name(k)).c_str(), s.count(k), s.percentage(k));
      out << line;
    }
    for (const auto& [sig, n] : s.exception_signals) {
      out << "    " << signal_name(sig) << ": " << n << '\n';
    }
  }
  if (result.summary.repetitions > 1) {
    out << "mean over " << result.summary.repetitions << " repetitions:\n";
    for (OutcomeKind k : kCountedOutcomes) {
      char line[96];
      std::snprintf(line, sizeof line, "  %-10s %7.2f%%  sd %6.2f\n",
                    std::string(outcome_name(k)).c_str(), result.summary.mean[outcome_slot(k)],
                    (*result.summary.stddev)[outcome_slot(k)]);
      out << line;
    }
  }
  out << "wall time " << fmt("%.2f", result.wall_seconds) << " s\n";
  return out.str();
}

}  // namespace seufi
