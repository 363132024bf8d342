#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seufi/registers.hpp"

namespace seufi {

/// One register touched by an instruction. Explicit accesses are operands
/// named in the encoding, including base and index registers of memory
/// operands; implicit ones are side effects (flags, stack pointer, fixed
/// registers of string and multiply instructions, the instruction pointer
/// of control transfers).
struct RegisterAccess {
  RegisterId reg = RegisterId::rax;
  int width_bits = 64;
  int bit_offset = 0;
  bool is_read = false;
  bool is_written = false;
  bool is_explicit = true;

  bool is_instruction_pointer() const { return reg == RegisterId::rip; }
  bool is_flags() const { return reg == RegisterId::rflags; }
  std::string name() const { return view_name(reg, width_bits, bit_offset); }

  friend bool operator==(const RegisterAccess&, const RegisterAccess&) = default;
};

struct DecodedInstruction {
  std::uint64_t address = 0;
  int length_bytes = 0;
  bool is_control_flow = false;
  std::vector<RegisterAccess> accesses;

  friend bool operator==(const DecodedInstruction&, const DecodedInstruction&) = default;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxInstructionLength = 15;

/// Decode one x86-64 long-mode instruction from the front of `bytes`.
///
/// Accesses are merged per (register view, explicitness): `xor eax, eax`
/// yields a single eax{read, written, explicit}. Segment, x87, MMX, opmask
/// and control/debug registers are not reported; neither are vector
/// registers the tracing interface cannot reach (xmm16-31, zmm).
///
/// Throws DecodeError for invalid, truncated or unsupported encodings.
DecodedInstruction decode_instruction(std::span<const std::uint8_t> bytes,
                                      std::uint64_t address);

/// Space-separated hex dump, e.g. "48 01 d8".
std::string hex_bytes(std::span<const std::uint8_t> bytes);

}  // namespace seufi
