#include "seufi/injector.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace seufi {

std::uint64_t flip_bit(std::uint64_t value, int width_bits, int bit_index) {
  if (width_bits < 1 || width_bits > 64 || bit_index < 0 || bit_index >= width_bits) {
    throw std::out_of_range("flip_bit: bit " + std::to_string(bit_index) + " outside width " +
                            std::to_string(width_bits));
  }
  return value ^ (std::uint64_t{1} << bit_index);
}

double draw_injection_time(RunRng& rng, double original_duration_seconds) {
  if (!(original_duration_seconds > 0.0)) {
    throw std::invalid_argument("draw_injection_time: duration must be positive");
  }
  const double t = rng.uniform01() * original_duration_seconds;
  // uniform01 < 1, but the product can round up to the bound.
  return t < original_duration_seconds ? t : std::nextafter(original_duration_seconds, 0.0);
}

DecodedInstruction decode_at(Tracee& tracee, std::uint64_t address) {
  std::array<std::uint8_t, kMaxInstructionLength> buf{};
  const std::size_t n = tracee.read_memory(address, buf);
  if (n == 0) throw DecodeError("instruction bytes unreadable");
  return decode_instruction(std::span<const std::uint8_t>(buf.data(), n), address);
}

namespace {

bool in_regions(const std::vector<MappedRegion>& regions, std::uint64_t addr) {
  for (const auto& r : regions) {
    if (r.contains(addr)) return true;
  }
  return false;
}

std::string step_failure(const StepResult& r) {
  if (r.kind == StepResult::Kind::Exited) {
    return "tracee terminated while stepping (" + r.status.describe() + ")";
  }
  return "signal " + signal_name(r.signal) + " while stepping";
}

}  // namespace

InjectionResult inject(Tracee& tracee, const InjectionSettings& settings, ChoicePolicy& policy,
                       std::uint64_t run_index, double target_time_seconds) {
  int steps = 0;
  std::optional<Skip> failure;
  auto step = [&]() -> bool {
    if (steps >= settings.max_retry_steps) {
      failure = Skip{"retry step budget of " + std::to_string(settings.max_retry_steps) +
                     " exhausted"};
      return false;
    }
    const StepResult r = tracee.single_step();
    ++steps;
    if (r.kind != StepResult::Kind::Advanced) {
      failure = Skip{step_failure(r)};
      return false;
    }
    return true;
  };

  RegisterFile regs = tracee.read_registers();
  auto reach_main = [&]() -> bool {
    if (!settings.exclude_library_code) return true;
    while (!in_regions(settings.main_regions, regs.ip())) {
      if (!step()) return false;
      regs = tracee.read_registers();
    }
    return true;
  };

  if (!reach_main()) return *failure;

  DecodedInstruction decoded;
  std::vector<PoolEntry> pool;
  std::array<std::uint8_t, kMaxInstructionLength> bytes{};
  std::size_t nbytes = 0;
  for (;;) {
    nbytes = tracee.read_memory(regs.ip(), bytes);
    try {
      if (nbytes == 0) throw DecodeError("instruction bytes unreadable");
      decoded = decode_instruction(std::span<const std::uint8_t>(bytes.data(), nbytes), regs.ip());
    } catch (const DecodeError& e) {
      return Skip{std::string("undecodable instruction: ") + e.what()};
    }
    pool = policy.restrict_pool(build_pool(decoded, settings.mask, [&] { return policy.coin(); }));
    if (!pool.empty()) break;
    if (!step()) return *failure;
    regs = tracee.read_registers();
    if (!reach_main()) return *failure;
  }

  const PoolEntry entry = pool.at(policy.choose_entry(pool));
  const int bit = policy.choose_bit(entry.access);
  if (bit < 0 || bit >= entry.access.width_bits) {
    throw std::out_of_range("choice policy returned bit outside the access width");
  }

  InjectionPlan plan;
  plan.run_index = run_index;
  plan.target_time_seconds = target_time_seconds;
  plan.target = entry.access;
  plan.bit_index = bit;
  plan.phase = entry.phase;
  plan.instruction_address = decoded.address;
  plan.retries_used = steps;
  plan.instruction_bytes_hex = hex_bytes(
      std::span<const std::uint8_t>(bytes.data(), static_cast<std::size_t>(decoded.length_bytes)));
  plan.accesses = decoded.accesses;
  plan.pool_size = pool.size();

  if (entry.phase == Phase::PostExecution) {
    const StepResult r = tracee.single_step();
    if (r.kind != StepResult::Kind::Advanced) return Skip{step_failure(r)};
    regs = tracee.read_registers();
  }
  const auto& a = entry.access;
  plan.value_before_hex = regs.view_hex(a.reg, a.width_bits, a.bit_offset);
  regs.flip_view_bit(a.reg, a.width_bits, a.bit_offset, bit);
  plan.value_after_hex = regs.view_hex(a.reg, a.width_bits, a.bit_offset);
  tracee.write_registers(regs);
  return plan;
}

}  // namespace seufi
