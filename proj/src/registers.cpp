#include "seufi/registers.hpp"

#include <cassert>
#include <cstdio>
#include <stdexcept>

namespace seufi {

namespace {

constexpr std::array<std::string_view, 16> kNames64 = {
    "rax", "rcx", "rdx", "rbx", "rsp", "rbp", "rsi", "rdi",
    "r8",  "r9",  "r10", "r11", "r12", "r13", "r14", "r15"};
constexpr std::array<std::string_view, 16> kNames32 = {
    "eax", "ecx", "edx", "ebx", "esp", "ebp", "esi", "edi",
    "r8d", "r9d", "r10d", "r11d", "r12d", "r13d", "r14d", "r15d"};
constexpr std::array<std::string_view, 16> kNames16 = {
    "ax", "cx", "dx", "bx", "sp", "bp", "si", "di",
    "r8w", "r9w", "r10w", "r11w", "r12w", "r13w", "r14w", "r15w"};
constexpr std::array<std::string_view, 16> kNames8 = {
    "al", "cl", "dl", "bl", "spl", "bpl", "sil", "dil",
    "r8b", "r9b", "r10b", "r11b", "r12b", "r13b", "r14b", "r15b"};
constexpr std::array<std::string_view, 4> kNamesHigh8 = {"ah", "ch", "dh", "bh"};

int gpr_index(RegisterId id) {
  if (is_gpr(id)) return static_cast<int>(id);
  if (id == RegisterId::rip) return 16;
  if (id == RegisterId::rflags) return 17;
  return -1;
}

}  // namespace

int container_width_bits(RegisterId id) {
  if (is_vector(id)) return 256;
  return 64;
}

std::string view_name(RegisterId id, int width_bits, int bit_offset) {
  if (id == RegisterId::rip) return "rip";
  if (id == RegisterId::rflags) return "rflags";
  const int n = register_number(id);
  if (is_vector(id)) {
    if (width_bits == 128) return "xmm" + std::to_string(n);
    if (width_bits == 256) return "ymm" + std::to_string(n);
    return "vec" + std::to_string(n) + "/" + std::to_string(width_bits);
  }
  switch (width_bits) {
    case 64: return std::string(kNames64[n]);
    case 32: return std::string(kNames32[n]);
    case 16: return std::string(kNames16[n]);
    case 8:
      if (bit_offset == 8 && n < 4) return std::string(kNamesHigh8[n]);
      return std::string(kNames8[n]);
    default: break;
  }
  return std::string(kNames64[n]) + "/" + std::to_string(width_bits);
}

std::optional<RegisterView> parse_view_name(std::string_view name) {
  if (name == "rip") return RegisterView{RegisterId::rip, 64, 0};
  if (name == "rflags") return RegisterView{RegisterId::rflags, kFlagsWidthBits, 0};
  for (int i = 0; i < 16; ++i) {
    if (name == kNames64[i]) return RegisterView{gpr(i), 64, 0};
    if (name == kNames32[i]) return RegisterView{gpr(i), 32, 0};
    if (name == kNames16[i]) return RegisterView{gpr(i), 16, 0};
    if (name == kNames8[i]) return RegisterView{gpr(i), 8, 0};
  }
  for (int i = 0; i < 4; ++i) {
    if (name == kNamesHigh8[i]) return RegisterView{gpr(i), 8, 8};
  }
  auto vec = [&](std::string_view prefix, int width) -> std::optional<RegisterView> {
    if (!name.starts_with(prefix)) return std::nullopt;
    auto digits = name.substr(prefix.size());
    if (digits.empty() || digits.size() > 2) return std::nullopt;
    int n = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      n = n * 10 + (c - '0');
    }
    if (n >= kVectorCount) return std::nullopt;
    return RegisterView{vector_register(n), width, 0};
  };
  if (auto v = vec("xmm", 128)) return v;
  if (auto v = vec("ymm", 256)) return v;
  return std::nullopt;
}

RegisterValue RegisterFile::get(RegisterId id) const {
  if (is_vector(id)) return vectors_[register_number(id)];
  return RegisterValue{gprs_[gpr_index(id)], 0, 0, 0};
}

void RegisterFile::set(RegisterId id, const RegisterValue& value) {
  if (is_vector(id)) {
    vectors_[register_number(id)] = value;
    return;
  }
  gprs_[gpr_index(id)] = value[0];
}

void RegisterFile::set64(RegisterId id, std::uint64_t value) {
  if (is_vector(id)) {
    vectors_[register_number(id)][0] = value;
    return;
  }
  gprs_[gpr_index(id)] = value;
}

void RegisterFile::flip_view_bit(RegisterId id, int width_bits, int bit_offset, int bit_index) {
  if (bit_index < 0 || bit_index >= width_bits ||
      bit_offset + width_bits > container_width_bits(id)) {
    throw std::out_of_range("bit outside register view " + view_name(id, width_bits, bit_offset));
  }
  const int bit = bit_offset + bit_index;
  RegisterValue v = get(id);
  v[bit / 64] ^= std::uint64_t{1} << (bit % 64);
  set(id, v);
}

std::string RegisterFile::view_hex(RegisterId id, int width_bits, int bit_offset) const {
  const RegisterValue v = get(id);
  std::string out = "0x";
  const int digits = (width_bits + 3) / 4;
  bool leading = true;
  for (int d = digits - 1; d >= 0; --d) {
    const int bit = bit_offset + d * 4;
    unsigned nibble = static_cast<unsigned>((v[bit / 64] >> (bit % 64)) & 0xF);
    if (d * 4 + 4 > width_bits) nibble &= (1u << (width_bits - d * 4)) - 1;
    if (leading && nibble == 0 && d != 0) continue;
    leading = false;
    out.push_back("0123456789abcdef"[nibble]);
  }
  return out;
}

}  // namespace seufi
