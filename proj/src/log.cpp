#include "seufi/log.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace seufi {

using nlohmann::json;

std::string RunLogEntry::to_json_line() const {
  json j = {
      {"run_index", run_index},
      {"repetition", repetition},
      {"started_s", started_s},
      {"finished_s", finished_s},
      {"injected", injected},
      {"final_status", final_status},
      {"outcome", outcome},
      {"rule", rule},
      {"wall_s", wall_s},
  };
  if (injected) {
    j["target_time_s"] = target_time_s;
    j["register"] = register_name;
    j["bit"] = bit;
    j["phase"] = phase;
    j["ip"] = ip_hex;
    j["retries"] = retries;
    j["value_before"] = value_before;
    j["value_after"] = value_after;
    j["instruction_bytes"] = instruction_bytes;
    j["accesses"] = accesses;
  }
  if (!skip_reason.empty()) j["skip_reason"] = skip_reason;
  return j.dump();
}

RunLogEntry RunLogEntry::from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    RunLogEntry e;
    e.run_index = j.at("run_index").get<std::uint64_t>();
    e.repetition = j.at("repetition").get<int>();
    e.started_s = j.at("started_s").get<double>();
    e.finished_s = j.at("finished_s").get<double>();
    e.injected = j.at("injected").get<bool>();
    e.final_status = j.at("final_status").get<std::string>();
    e.outcome = j.at("outcome").get<std::string>();
    e.rule = j.at("rule").get<std::string>();
    e.wall_s = j.at("wall_s").get<double>();
    if (e.injected) {
      e.target_time_s = j.at("target_time_s").get<double>();
      e.register_name = j.at("register").get<std::string>();
      e.bit = j.at("bit").get<int>();
      e.phase = j.at("phase").get<std::string>();
      e.ip_hex = j.at("ip").get<std::string>();
      e.retries = j.at("retries").get<int>();
      e.value_before = j.at("value_before").get<std::string>();
      e.value_after = j.at("value_after").get<std::string>();
      e.instruction_bytes = j.at("instruction_bytes").get<std::string>();
      e.accesses = j.at("accesses").get<std::vector<std::string>>();
    }
    if (j.contains("skip_reason")) e.skip_reason = j.at("skip_reason").get<std::string>();
    return e;
  } catch (const json::exception& ex) {
    throw std::invalid_argument(std::string("malformed run log entry: ") + ex.what());
  }
}

void Logger::write_line(const std::string& line) {
  std::lock_guard lock(mutex_);
  sink_ << line << '\n';
  sink_.flush();
}

void Logger::emit(const RunLogEntry& e) {
  switch (verbosity_) {
    case Verbosity::Default:
      if (e.anomalous()) {
        write_line("warning: run " + std::to_string(e.run_index) + " (repetition " +
                   std::to_string(e.repetition) + ") skipped: " + e.skip_reason);
      }
      return;
    case Verbosity::Verbose: {
      char buf[512];
      if (e.injected) {
        std::snprintf(buf, sizeof buf, "run %llu: t=%.6fs %s bit %d (%s) at %s -> %s [%s]",
                      static_cast<unsigned long long>(e.run_index), e.target_time_s,
                      e.register_name.c_str(), e.bit, e.phase.c_str(), e.ip_hex.c_str(),
                      e.outcome.c_str(), e.final_status.c_str());
      } else {
        std::snprintf(buf, sizeof buf, "run %llu: skipped: %s",
                      static_cast<unsigned long long>(e.run_index), e.skip_reason.c_str());
      }
      write_line(buf);
      return;
    }
    case Verbosity::Debug:
      write_line(e.to_json_line());
      return;
  }
}

void Logger::warn(std::string_view message) { write_line("warning: " + std::string(message)); }

void Logger::info(std::string_view message) {
  if (verbosity_ != Verbosity::Default) write_line(std::string(message));
}

}  // namespace seufi
