#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "seufi/mask.hpp"
#include "seufi/x86_decoder.hpp"

namespace seufi {

/// When the flip lands relative to the instruction at the stop address:
/// before it executes (corrupting an input) or after one single-step
/// (corrupting the value it produced).
enum class Phase { PreExecution, PostExecution };

std::string_view phase_name(Phase p);

struct PoolEntry {
  RegisterAccess access;
  Phase phase = Phase::PreExecution;
  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

/// Eligible injection targets of one instruction under a mask. `coin`
/// settles the phase of accesses that are selected both as read and as
/// written (true -> PreExecution).
std::vector<PoolEntry> build_pool(const DecodedInstruction& instr, const InjectionMask& mask,
                                  const std::function<bool()>& coin);

}  // namespace seufi
