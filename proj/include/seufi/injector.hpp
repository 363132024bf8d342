#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seufi/mask.hpp"
#include "seufi/pool.hpp"
#include "seufi/rng.hpp"
#include "seufi/tracer.hpp"

namespace seufi {

/// Flip bit `bit_index` of the low `width_bits` of `value`. Throws
/// std::out_of_range when the bit is outside the width.
std::uint64_t flip_bit(std::uint64_t value, int width_bits, int bit_index);

/// Uniform in [0, original_duration_seconds).
double draw_injection_time(RunRng& rng, double original_duration_seconds);

/// Source of every random decision of one run. The campaign uses
/// RandomChoice; tests substitute deterministic policies to force a target.
class ChoicePolicy {
 public:
  virtual ~ChoicePolicy() = default;
  virtual double draw_time(double original_duration_seconds) = 0;
  /// Phase coin for accesses selected both as read and as written.
  virtual bool coin() = 0;
  /// Index into a non-empty pool.
  virtual std::size_t choose_entry(std::span<const PoolEntry> pool) = 0;
  /// Bit index in [0, access.width_bits).
  virtual int choose_bit(const RegisterAccess& access) = 0;
  /// Hook to narrow a pool before the choice; an empty result makes the
  /// injector step to the next instruction as for an empty pool.
  virtual std::vector<PoolEntry> restrict_pool(std::vector<PoolEntry> pool) { return pool; }
};

class RandomChoice : public ChoicePolicy {
 public:
  explicit RandomChoice(std::uint64_t seed) : rng_(seed) {}
  double draw_time(double d) override { return draw_injection_time(rng_, d); }
  bool coin() override { return rng_.coin(); }
  std::size_t choose_entry(std::span<const PoolEntry> pool) override {
    return static_cast<std::size_t>(rng_.below(pool.size()));
  }
  int choose_bit(const RegisterAccess& a) override {
    return static_cast<int>(rng_.below(static_cast<std::uint64_t>(a.width_bits)));
  }

 private:
  RunRng rng_;
};

struct InjectionPlan {
  std::uint64_t run_index = 0;
  double target_time_seconds = 0.0;
  RegisterAccess target;
  int bit_index = 0;
  Phase phase = Phase::PreExecution;
  std::uint64_t instruction_address = 0;
  int retries_used = 0;

  /// Diagnostics: the chosen view before and after the flip, the decoded
  /// instruction bytes and its access list.
  std::string value_before_hex;
  std::string value_after_hex;
  std::string instruction_bytes_hex;
  std::vector<RegisterAccess> accesses;
  std::size_t pool_size = 0;

  std::string register_name() const { return target.name(); }
};

struct Skip {
  std::string reason;
};

using InjectionResult = std::variant<InjectionPlan, Skip>;

struct InjectionSettings {
  InjectionMask mask = InjectionMask::parse("rwe");
  bool exclude_library_code = false;
  int max_retry_steps = 1000;
  /// Executable regions of the target binary; required when
  /// exclude_library_code is set.
  std::vector<MappedRegion> main_regions;
};

/// Read and decode the instruction at `address` of a stopped tracee.
DecodedInstruction decode_at(Tracee& tracee, std::uint64_t address);

/// Choose and apply one bit-flip to a stopped tracee. On success the
/// tracee is still stopped, with the fault in place.
InjectionResult inject(Tracee& tracee, const InjectionSettings& settings, ChoicePolicy& policy,
                       std::uint64_t run_index, double target_time_seconds);

}  // namespace seufi
