#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace seufi {

// Container registers the injector can reach through the tracing interface.
// Sub-registers (eax, al, ah, xmm3 as the low half of ymm3) are expressed as
// a (container, width, offset) view, never as separate ids.
enum class RegisterId : std::uint8_t {
  rax, rcx, rdx, rbx, rsp, rbp, rsi, rdi,
  r8, r9, r10, r11, r12, r13, r14, r15,
  rip,
  rflags,
  vec0, vec1, vec2, vec3, vec4, vec5, vec6, vec7,
  vec8, vec9, vec10, vec11, vec12, vec13, vec14, vec15,
};

inline constexpr int kGprCount = 16;
inline constexpr int kVectorCount = 16;
inline constexpr int kRegisterIdCount = kGprCount + 2 + kVectorCount;

// Architectural width of EFLAGS; the upper half of RFLAGS is reserved.
inline constexpr int kFlagsWidthBits = 32;

constexpr RegisterId gpr(int number) { return static_cast<RegisterId>(number); }
constexpr RegisterId vector_register(int number) {
  return static_cast<RegisterId>(static_cast<int>(RegisterId::vec0) + number);
}
constexpr bool is_gpr(RegisterId id) { return static_cast<int>(id) < kGprCount; }
constexpr bool is_vector(RegisterId id) { return id >= RegisterId::vec0; }
constexpr int register_number(RegisterId id) {
  return is_vector(id) ? static_cast<int>(id) - static_cast<int>(RegisterId::vec0)
                       : static_cast<int>(id);
}

/// Width of the storage behind a container register.
int container_width_bits(RegisterId id);

/// Canonical name of a view onto a container, e.g. (rax, 32, 0) -> "eax",
/// (rax, 8, 8) -> "ah", (vec3, 128, 0) -> "xmm3".
std::string view_name(RegisterId id, int width_bits, int bit_offset);

/// Inverse of view_name. Returns the container, width and offset of a
/// register name, or nullopt for names outside the injectable set.
struct RegisterView {
  RegisterId id;
  int width_bits;
  int bit_offset;
  friend bool operator==(const RegisterView&, const RegisterView&) = default;
};
std::optional<RegisterView> parse_view_name(std::string_view name);

/// Up to 256 bits, little-endian 64-bit limbs.
using RegisterValue = std::array<std::uint64_t, 4>;

/// Snapshot of a tracee's register state. Pure value type; the tracer
/// converts to and from the kernel's layouts.
class RegisterFile {
 public:
  RegisterValue get(RegisterId id) const;
  void set(RegisterId id, const RegisterValue& value);

  std::uint64_t get64(RegisterId id) const { return get(id)[0]; }
  void set64(RegisterId id, std::uint64_t value);

  std::uint64_t ip() const { return gprs_[16]; }

  /// Flip one bit of a view. The bit index is relative to the view; other
  /// bits of the container are preserved.
  void flip_view_bit(RegisterId id, int width_bits, int bit_offset, int bit_index);

  /// Hex rendering of a view's current value, most significant digit first.
  std::string view_hex(RegisterId id, int width_bits, int bit_offset) const;

  bool has_upper_vectors() const { return upper_vectors_; }
  void set_has_upper_vectors(bool v) { upper_vectors_ = v; }

  friend bool operator==(const RegisterFile&, const RegisterFile&) = default;

 private:
  // rax..r15, rip, rflags in RegisterId order.
  std::array<std::uint64_t, 18> gprs_{};
  std::array<RegisterValue, kVectorCount> vectors_{};
  bool upper_vectors_ = false;
};

}  // namespace seufi
