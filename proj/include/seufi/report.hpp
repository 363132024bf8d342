#pragma once

#include <filesystem>
#include <string>

#include "seufi/campaign.hpp"
#include "seufi/config.hpp"

namespace seufi {

/// Per-run table, header
/// run_index,repetition,time_s,register,bit,phase,ip_hex,outcome,wall_s.
/// Skipped attempts are included with empty injection columns.
std::string runs_csv(const CampaignResult& result);

/// The JSON report document as text.
std::string report_json(const CampaignResult& result, const CampaignConfig& config);

/// Writes the JSON document to `path` and runs.csv next to it.
void write_report(const CampaignResult& result, const CampaignConfig& config,
                  const std::filesystem::path& path);

/// Human-readable summary for standard output.
std::string render_summary(const CampaignResult& result);

}  // namespace seufi
