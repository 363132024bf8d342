#include "seufi/pool.hpp"

namespace seufi {

std::string_view phase_name(Phase p) {
  return p == Phase::PreExecution ? "pre" : "post";
}

std::vector<PoolEntry> build_pool(const DecodedInstruction& instr, const InjectionMask& mask,
                                  const std::function<bool()>& coin) {
  std::vector<PoolEntry> pool;
  for (const auto& a : instr.accesses) {
    if (a.is_instruction_pointer()) continue;
    if (a.is_explicit ? !mask.explicit_operands() : !mask.implicit_operands()) continue;
    const bool by_read = a.is_read && mask.read();
    const bool by_write = a.is_written && mask.written();
    if (!by_read && !by_write) continue;
    Phase phase = by_read ? Phase::PreExecution : Phase::PostExecution;
    if (by_read && by_write) phase = coin() ? Phase::PreExecution : Phase::PostExecution;
    pool.push_back({a, phase});
  }
  if (mask.all_ip() || (mask.control_flow_ip() && instr.is_control_flow)) {
    RegisterAccess ip;
    ip.reg = RegisterId::rip;
    ip.width_bits = 64;
    ip.is_written = true;
    ip.is_explicit = false;
    pool.push_back({ip, Phase::PostExecution});
  }
  return pool;
}

}  // namespace seufi
