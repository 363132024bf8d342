#include "seufi/x86_decoder.hpp"

#include <cstdio>

namespace seufi {

namespace {

enum : unsigned { kR = 1, kW = 2, kRW = 3 };

enum class Prefix { kNone, k66, kF3, kF2 };

// Shapes shared by VEX and EVEX vector instructions.
enum class VecForm {
  kNds,       // dst(reg) W, src1(vvvv) R, src2(rm) R
  kNdsRmw,    // dst(reg) RW, src1(vvvv) R, src2(rm) R   (FMA, permt2)
  kUnary,     // dst(reg) W, src(rm) R
  kStore,     // dst(rm) W, src(reg) R
  kShiftImm,  // dst(vvvv) W, src(rm) R
  kToMask,    // opmask(reg) W, src1(vvvv) R, src2(rm) R
};

class Decoder {
 public:
  Decoder(std::span<const std::uint8_t> bytes, std::uint64_t address) : bytes_(bytes) {
    out_.address = address;
  }

  DecodedInstruction run() {
    prefixes();
    const std::uint8_t op = next();
    if (op == 0xC4 || op == 0xC5) {
      vex(op);
    } else if (op == 0x62) {
      evex();
    } else if (op == 0x0F) {
      two_byte(next());
    } else {
      one_byte(op);
    }
    out_.length_bytes = static_cast<int>(pos_);
    return std::move(out_);
  }

 private:
  std::uint8_t next() {
    if (pos_ >= static_cast<std::size_t>(kMaxInstructionLength)) {
      throw DecodeError("instruction exceeds 15 bytes");
    }
    if (pos_ >= bytes_.size()) throw DecodeError("truncated instruction");
    return bytes_[pos_++];
  }
  std::uint8_t peek() const {
    if (pos_ >= bytes_.size()) throw DecodeError("truncated instruction");
    return bytes_[pos_];
  }
  void skip(int n) {
    while (n-- > 0) next();
  }

  [[noreturn]] void invalid(const char* what) const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s at offset %zu", what, pos_);
    throw DecodeError(buf);
  }

  // ---- prefixes -----------------------------------------------------------

  void prefixes() {
    for (;;) {
      const std::uint8_t b = peek();
      switch (b) {
        case 0x66: opsize_ = true; break;
        case 0x67: addrsize_ = true; break;
        case 0xF2: last_rep_ = Prefix::kF2; break;
        case 0xF3: last_rep_ = Prefix::kF3; break;
        case 0xF0: break;
        case 0x26: case 0x2E: case 0x36: case 0x3E: case 0x64: case 0x65: break;
        default:
          if ((b & 0xF0) == 0x40) {
            next();
            set_rex(b);
            // A REX prefix only counts when it immediately precedes the opcode.
            const std::uint8_t after = peek();
            if (is_legacy_prefix(after) || (after & 0xF0) == 0x40) clear_rex();
            continue;
          }
          return;
      }
      next();
    }
  }

  static bool is_legacy_prefix(std::uint8_t b) {
    switch (b) {
      case 0x66: case 0x67: case 0xF2: case 0xF3: case 0xF0:
      case 0x26: case 0x2E: case 0x36: case 0x3E: case 0x64: case 0x65:
        return true;
      default:
        return false;
    }
  }

  void set_rex(std::uint8_t b) {
    has_rex_ = true;
    rex_w_ = (b >> 3) & 1;
    rex_r_ = (b >> 2) & 1;
    rex_x_ = (b >> 1) & 1;
    rex_b_ = b & 1;
  }
  void clear_rex() {
    has_rex_ = false;
    rex_w_ = rex_r_ = rex_x_ = rex_b_ = 0;
  }

  Prefix mandatory() const {
    if (vex_) return vex_pp_;
    if (last_rep_ != Prefix::kNone) return last_rep_;
    return opsize_ ? Prefix::k66 : Prefix::kNone;
  }

  // ---- operand sizes ------------------------------------------------------

  int osz() const { return rex_w_ ? 64 : (opsize_ ? 16 : 32); }
  int osz_d64() const { return opsize_ ? 16 : 64; }
  int asz() const { return addrsize_ ? 32 : 64; }
  int imm_z() const { return osz() == 16 ? 2 : 4; }
  int gpr_w() const { return rex_w_ ? 64 : 32; }

  // ---- ModRM / SIB --------------------------------------------------------

  void modrm() {
    const std::uint8_t m = next();
    mod_ = m >> 6;
    reg_ = (m >> 3) & 7;
    rm_ = m & 7;
    has_modrm_ = true;
    if (mod_ == 3) return;

    int disp = 0;
    if (rm_ == 4) {
      const std::uint8_t sib = next();
      const int base = (sib & 7) | (rex_b_ << 3);
      const int index = ((sib >> 3) & 7) | (rex_x_ << 3);
      if (vsib_) {
        vec_op(index | (evex_ ? evex_v2_ << 4 : 0), vex_width(), kR, true);
      } else if (index != 4) {
        gpr_op(index, asz(), kR, true);
      }
      if ((sib & 7) == 5 && mod_ == 0) {
        disp = 4;
      } else {
        gpr_op(base, asz(), kR, true);
      }
    } else if (rm_ == 5 && mod_ == 0) {
      add({RegisterId::rip, 64, 0, true, false, true});
      disp = 4;
    } else {
      gpr_op(rm_ | (rex_b_ << 3), asz(), kR, true);
    }
    if (mod_ == 1) disp = 1;
    if (mod_ == 2) disp = 4;
    skip(disp);
  }

  bool reg_form() const { return mod_ == 3; }
  void require_mem() const {
    if (reg_form()) invalid("register operand where memory is required");
  }

  int reg_num() const { return reg_ | (rex_r_ << 3); }
  int rm_num() const { return rm_ | (rex_b_ << 3); }
  int vreg_num() const { return reg_ | (rex_r_ << 3) | (evex_r2_ << 4); }
  int vrm_num() const { return rm_ | (rex_b_ << 3) | (evex_ ? rex_x_ << 4 : 0); }

  // ---- access recording ---------------------------------------------------

  void add(const RegisterAccess& a) {
    for (auto& e : out_.accesses) {
      if (e.reg == a.reg && e.width_bits == a.width_bits && e.bit_offset == a.bit_offset &&
          e.is_explicit == a.is_explicit) {
        e.is_read = e.is_read || a.is_read;
        e.is_written = e.is_written || a.is_written;
        return;
      }
    }
    out_.accesses.push_back(a);
  }

  void gpr_op(int num, int width, unsigned acc, bool expl) {
    int offset = 0;
    if (width == 8 && !has_rex_ && num >= 4 && num < 8) {
      num -= 4;
      offset = 8;
    }
    add({gpr(num), width, offset, (acc & kR) != 0, (acc & kW) != 0, expl});
  }

  void vec_op(int num, int width, unsigned acc, bool expl = true) {
    if (num >= kVectorCount || width > 256) return;
    add({vector_register(num), width, 0, (acc & kR) != 0, (acc & kW) != 0, expl});
  }

  void implicit(RegisterId id, int width, unsigned acc, int offset = 0) {
    add({id, width, offset, (acc & kR) != 0, (acc & kW) != 0, false});
  }
  void implicit_gpr(int num, int width, unsigned acc) { gpr_op(num, width, acc, false); }
  void flags(unsigned acc) { implicit(RegisterId::rflags, kFlagsWidthBits, acc); }
  void stack() { implicit(RegisterId::rsp, 64, kRW); }

  void E(int width, unsigned acc) {
    if (reg_form()) gpr_op(rm_num(), width, acc, true);
  }
  void G(int width, unsigned acc) { gpr_op(reg_num(), width, acc, true); }
  void V(int width, unsigned acc) { vec_op(vreg_num(), width, acc); }
  void W(int width, unsigned acc) {
    if (reg_form()) vec_op(vrm_num(), width, acc);
  }
  void H(int width, unsigned acc) { vec_op(vvvv_, width, acc); }
  void H_gpr(int width, unsigned acc) { gpr_op(vvvv_ & 15, width, acc, true); }

  void imm(int n) { skip(n); }

  void branch(int rel_bytes) {
    skip(rel_bytes);
    transfer();
  }
  void transfer() {
    out_.is_control_flow = true;
    implicit(RegisterId::rip, 64, kW);
  }

  // ---- one-byte opcode map ------------------------------------------------

  void alu_flags(int kind) {
    // adc and sbb consume the carry flag.
    flags((kind == 2 || kind == 3) ? kRW : kW);
  }

  void one_byte(std::uint8_t op) {
    if (op < 0x40 && (op & 7) < 6) {
      const int kind = op >> 3;  // add or adc sbb and sub xor cmp
      const unsigned dst = kind == 7 ? kR : kRW;
      switch (op & 7) {
        case 0: modrm(); E(8, dst); G(8, kR); break;
        case 1: modrm(); E(osz(), dst); G(osz(), kR); break;
        case 2: modrm(); G(8, dst); E(8, kR); break;
        case 3: modrm(); G(osz(), dst); E(osz(), kR); break;
        case 4: gpr_op(0, 8, dst, true); imm(1); break;
        case 5: gpr_op(0, osz(), dst, true); imm(imm_z()); break;
      }
      alu_flags(kind);
      return;
    }
    if (op >= 0x50 && op <= 0x57) {
      gpr_op((op & 7) | (rex_b_ << 3), osz_d64(), kR, true);
      stack();
      return;
    }
    if (op >= 0x58 && op <= 0x5F) {
      gpr_op((op & 7) | (rex_b_ << 3), osz_d64(), kW, true);
      stack();
      return;
    }
    if (op >= 0x70 && op <= 0x7F) {
      flags(kR);
      branch(1);
      return;
    }
    if (op >= 0x91 && op <= 0x97) {
      gpr_op(0, osz(), kRW, true);
      gpr_op((op & 7) | (rex_b_ << 3), osz(), kRW, true);
      return;
    }
    if (op >= 0xB0 && op <= 0xB7) {
      gpr_op((op & 7) | (rex_b_ << 3), 8, kW, true);
      imm(1);
      return;
    }
    if (op >= 0xB8 && op <= 0xBF) {
      gpr_op((op & 7) | (rex_b_ << 3), osz(), kW, true);
      imm(rex_w_ ? 8 : imm_z());
      return;
    }
    if (op >= 0xD8 && op <= 0xDF) {
      x87(op);
      return;
    }

    switch (op) {
      case 0x63:
        modrm(); G(osz(), kW); E(32, kR);
        return;
      case 0x68:
        imm(imm_z()); stack();
        return;
      case 0x6A:
        imm(1); stack();
        return;
      case 0x69: case 0x6B:
        modrm(); G(osz(), kW); E(osz(), kR);
        imm(op == 0x69 ? imm_z() : 1);
        flags(kW);
        return;
      case 0x6C: case 0x6D:  // ins
        string_op(7, -1, op == 0x6C ? 8 : osz(), false);
        gpr_op(2, 16, kR, true);
        return;
      case 0x6E: case 0x6F:  // outs
        string_op(-1, 6, op == 0x6E ? 8 : osz(), false);
        gpr_op(2, 16, kR, true);
        return;
      case 0x80: case 0x81: case 0x83: {
        modrm();
        const int kind = reg_;
        const int w = op == 0x80 ? 8 : osz();
        E(w, kind == 7 ? kR : kRW);
        imm(op == 0x81 ? imm_z() : 1);
        alu_flags(kind);
        return;
      }
      case 0x84: case 0x85:
        modrm(); E(op == 0x84 ? 8 : osz(), kR); G(op == 0x84 ? 8 : osz(), kR); flags(kW);
        return;
      case 0x86: case 0x87:
        modrm(); E(op == 0x86 ? 8 : osz(), kRW); G(op == 0x86 ? 8 : osz(), kRW);
        return;
      case 0x88: modrm(); E(8, kW); G(8, kR); return;
      case 0x89: modrm(); E(osz(), kW); G(osz(), kR); return;
      case 0x8A: modrm(); G(8, kW); E(8, kR); return;
      case 0x8B: modrm(); G(osz(), kW); E(osz(), kR); return;
      case 0x8C: modrm(); E(reg_form() ? osz() : 16, kW); return;
      case 0x8D: modrm(); require_mem(); G(osz(), kW); return;
      case 0x8E: modrm(); E(16, kR); return;
      case 0x8F:
        modrm();
        if (reg_ != 0) invalid("invalid 8f extension");
        E(osz_d64(), kW);
        stack();
        return;
      case 0x90:
        if (rex_b_) {
          gpr_op(0, osz(), kRW, true);
          gpr_op(8, osz(), kRW, true);
        }
        return;
      case 0x98:
        implicit_gpr(0, osz() / 2, kR);
        implicit_gpr(0, osz(), kW);
        return;
      case 0x99:
        implicit_gpr(0, osz(), kR);
        implicit_gpr(2, osz(), kW);
        return;
      case 0x9B: return;
      case 0x9C: flags(kR); stack(); return;
      case 0x9D: flags(kW); stack(); return;
      case 0x9E: implicit(RegisterId::rax, 8, kR, 8); flags(kW); return;
      case 0x9F: flags(kR); implicit(RegisterId::rax, 8, kW, 8); return;
      case 0xA0: gpr_op(0, 8, kW, true); imm(asz() / 8); return;
      case 0xA1: gpr_op(0, osz(), kW, true); imm(asz() / 8); return;
      case 0xA2: gpr_op(0, 8, kR, true); imm(asz() / 8); return;
      case 0xA3: gpr_op(0, osz(), kR, true); imm(asz() / 8); return;
      case 0xA4: case 0xA5:  // movs
        string_op(7, 6, 0, false);
        return;
      case 0xA6: case 0xA7:  // cmps
        string_op(7, 6, 0, true);
        return;
      case 0xA8: gpr_op(0, 8, kR, true); imm(1); flags(kW); return;
      case 0xA9: gpr_op(0, osz(), kR, true); imm(imm_z()); flags(kW); return;
      case 0xAA: case 0xAB:  // stos
        string_op(7, -1, 0, false);
        gpr_op(0, op == 0xAA ? 8 : osz(), kR, true);
        return;
      case 0xAC: case 0xAD:  // lods
        string_op(-1, 6, 0, false);
        gpr_op(0, op == 0xAC ? 8 : osz(), kW, true);
        return;
      case 0xAE: case 0xAF:  // scas
        string_op(7, -1, 0, true);
        gpr_op(0, op == 0xAE ? 8 : osz(), kR, true);
        return;
      case 0xC0: case 0xC1: case 0xD0: case 0xD1: case 0xD2: case 0xD3: {
        modrm();
        const int w = (op & 1) ? osz() : 8;
        E(w, kRW);
        if (op == 0xC0 || op == 0xC1) imm(1);
        if (op == 0xD2 || op == 0xD3) gpr_op(1, 8, kR, true);
        flags((reg_ == 2 || reg_ == 3) ? kRW : kW);
        return;
      }
      case 0xC2: imm(2); stack(); transfer(); return;
      case 0xC3: stack(); transfer(); return;
      case 0xC6:
        modrm();
        if (reg_ == 0) {
          E(8, kW);
          imm(1);
        } else if (reg_ == 7 && mod_ == 3 && rm_ == 0) {  // xabort
          imm(1);
          implicit_gpr(0, 32, kW);
        } else {
          invalid("invalid c6 extension");
        }
        return;
      case 0xC7:
        modrm();
        if (reg_ == 0) {
          E(osz(), kW);
          imm(imm_z());
        } else if (reg_ == 7 && mod_ == 3 && rm_ == 0) {  // xbegin
          implicit_gpr(0, 32, kW);
          branch(imm_z());
        } else {
          invalid("invalid c7 extension");
        }
        return;
      case 0xC8:
        imm(3);
        stack();
        implicit(RegisterId::rbp, 64, kRW);
        return;
      case 0xC9:
        implicit(RegisterId::rbp, 64, kRW);
        stack();
        return;
      case 0xCA: imm(2); stack(); transfer(); return;
      case 0xCB: stack(); transfer(); return;
      case 0xCC: return;
      case 0xCD: imm(1); return;
      case 0xCF: stack(); flags(kW); transfer(); return;
      case 0xD7:
        implicit_gpr(0, 8, kRW);
        gpr_op(3, asz(), kR, true);
        return;
      case 0xE0: case 0xE1: case 0xE2:
        implicit_gpr(1, asz(), kRW);
        if (op != 0xE2) flags(kR);
        branch(1);
        return;
      case 0xE3:
        implicit_gpr(1, asz(), kR);
        branch(1);
        return;
      case 0xE4: gpr_op(0, 8, kW, true); imm(1); return;
      case 0xE5: gpr_op(0, opsize_ ? 16 : 32, kW, true); imm(1); return;
      case 0xE6: gpr_op(0, 8, kR, true); imm(1); return;
      case 0xE7: gpr_op(0, opsize_ ? 16 : 32, kR, true); imm(1); return;
      case 0xE8:
        stack();
        implicit(RegisterId::rip, 64, kR);
        branch(4);
        return;
      case 0xE9: branch(4); return;
      case 0xEB: branch(1); return;
      case 0xEC: gpr_op(0, 8, kW, true); gpr_op(2, 16, kR, true); return;
      case 0xED: gpr_op(0, opsize_ ? 16 : 32, kW, true); gpr_op(2, 16, kR, true); return;
      case 0xEE: gpr_op(2, 16, kR, true); gpr_op(0, 8, kR, true); return;
      case 0xEF: gpr_op(2, 16, kR, true); gpr_op(0, opsize_ ? 16 : 32, kR, true); return;
      case 0xF1: case 0xF4: return;
      case 0xF5: flags(kRW); return;
      case 0xF6: case 0xF7:
        group3(op);
        return;
      case 0xF8: case 0xF9: case 0xFA: case 0xFB: case 0xFC: case 0xFD:
        flags(kW);
        return;
      case 0xFE:
        modrm();
        if (reg_ > 1) invalid("invalid fe extension");
        E(8, kRW);
        flags(kW);
        return;
      case 0xFF:
        group5();
        return;
      default:
        invalid("invalid one-byte opcode");
    }
  }

  // String instructions: `dst`/`src` are rdi/rsi numbers or -1. Explicit
  // accesses follow the printed operands ([rdi], [rsi]); the pointer
  // updates, rcx under rep, and the direction flag are implicit.
  void string_op(int dst, int src, int /*unused*/, bool compares) {
    if (dst >= 0) {
      gpr_op(dst, asz(), kR, true);
      implicit_gpr(dst, asz(), kRW);
    }
    if (src >= 0) {
      gpr_op(src, asz(), kR, true);
      implicit_gpr(src, asz(), kRW);
    }
    flags(compares ? kRW : kR);
    if (last_rep_ != Prefix::kNone) implicit_gpr(1, asz(), kRW);
  }

  void group3(std::uint8_t op) {
    modrm();
    const int w = op == 0xF6 ? 8 : osz();
    switch (reg_) {
      case 0: case 1:
        E(w, kR);
        imm(op == 0xF6 ? 1 : imm_z());
        flags(kW);
        return;
      case 2:
        E(w, kRW);
        return;
      case 3:
        E(w, kRW);
        flags(kW);
        return;
      case 4: case 5:  // mul, imul
        E(w, kR);
        if (w == 8) {
          implicit_gpr(0, 8, kR);
          implicit_gpr(0, 16, kW);
        } else {
          implicit_gpr(0, w, kRW);
          implicit_gpr(2, w, kW);
        }
        flags(kW);
        return;
      case 6: case 7:  // div, idiv
        E(w, kR);
        if (w == 8) {
          implicit_gpr(0, 16, kRW);
        } else {
          implicit_gpr(0, w, kRW);
          implicit_gpr(2, w, kRW);
        }
        flags(kW);
        return;
    }
  }

  void group5() {
    modrm();
    switch (reg_) {
      case 0: case 1:
        E(osz(), kRW);
        flags(kW);
        return;
      case 2:
        E(osz_d64(), kR);
        stack();
        implicit(RegisterId::rip, 64, kR);
        transfer();
        return;
      case 3:
        require_mem();
        stack();
        transfer();
        return;
      case 4:
        E(osz_d64(), kR);
        transfer();
        return;
      case 5:
        require_mem();
        transfer();
        return;
      case 6:
        E(osz_d64(), kR);
        stack();
        return;
      default:
        invalid("invalid ff extension");
    }
  }

  void x87(std::uint8_t op) {
    modrm();
    // fnstsw ax
    if (op == 0xDF && mod_ == 3 && reg_ == 4 && rm_ == 0) gpr_op(0, 16, kW, true);
    // fcomi/fucomi family set rflags.
    if ((op == 0xDB || op == 0xDF) && mod_ == 3 && (reg_ == 5 || reg_ == 6)) flags(kW);
    // fcmov reads flags.
    if ((op == 0xDA || op == 0xDB) && mod_ == 3 && reg_ < 4) flags(kR);
  }

  // ---- two-byte opcode map (0f xx) ----------------------------------------

  void two_byte(std::uint8_t op) {
    const Prefix p = mandatory();
    const bool xmm = p == Prefix::k66;

    if (op >= 0x40 && op <= 0x4F) {  // cmovcc
      modrm(); G(osz(), kW); E(osz(), kR); flags(kR);
      return;
    }
    if (op >= 0x80 && op <= 0x8F) {
      flags(kR);
      branch(4);
      return;
    }
    if (op >= 0x90 && op <= 0x9F) {  // setcc
      modrm(); E(8, kW); flags(kR);
      return;
    }
    if (op >= 0xC8 && op <= 0xCF) {  // bswap
      gpr_op((op & 7) | (rex_b_ << 3), osz(), kRW, true);
      return;
    }
    if (op >= 0x19 && op <= 0x1F) {  // hint nops, endbr64
      modrm();
      return;
    }
    if ((op >= 0x60 && op <= 0x6D) || op == 0x74 || op == 0x75 || op == 0x76 ||
        (op >= 0xD1 && op <= 0xFE && op != 0xD6 && op != 0xD7 && op != 0xE6 &&
         op != 0xE7 && op != 0xF0 && op != 0xF7)) {
      if ((op == 0x6C || op == 0x6D) && !xmm) invalid("punpck*qdq requires 66");
      modrm();
      if (xmm) {
        V(128, kRW);
        W(128, kR);
      }
      return;
    }

    switch (op) {
      case 0x00:
        modrm();
        E(16, reg_ < 2 ? kW : kR);
        return;
      case 0x01:
        group7();
        return;
      case 0x05:  // syscall
        implicit_gpr(0, 64, kRW);
        implicit_gpr(1, 64, kW);
        implicit_gpr(11, 64, kW);
        return;
      case 0x06: case 0x07: case 0x08: case 0x09: case 0x0B:
        return;
      case 0x0D: case 0x18:
        modrm();
        return;
      case 0x10:
        modrm();
        if ((p == Prefix::kF3 || p == Prefix::kF2) && reg_form()) {
          V(128, kRW);
        } else {
          V(128, kW);
        }
        W(128, kR);
        return;
      case 0x11:
        modrm();
        W(128, (p == Prefix::kF3 || p == Prefix::kF2) ? kRW : kW);
        V(128, kR);
        return;
      case 0x12: case 0x16:
        modrm();
        V(128, (p == Prefix::kF2 || p == Prefix::kF3) ? kW : kRW);
        W(128, kR);
        return;
      case 0x13: case 0x17: case 0x2B:
        modrm(); require_mem(); V(128, kR);
        return;
      case 0x14: case 0x15:
        modrm(); V(128, kRW); W(128, kR);
        return;
      case 0x20: case 0x21:
        modrm(); gpr_op(rm_num(), 64, kW, true);
        return;
      case 0x22: case 0x23:
        modrm(); gpr_op(rm_num(), 64, kR, true);
        return;
      case 0x28:
        modrm(); V(128, kW); W(128, kR);
        return;
      case 0x29:
        modrm(); W(128, kW); V(128, kR);
        return;
      case 0x2A:
        modrm();
        if (p == Prefix::kF3 || p == Prefix::kF2) {
          V(128, kRW);
          E(gpr_w(), kR);
        } else {
          V(128, kRW);  // cvtpi2ps: source is an mmx register
        }
        return;
      case 0x2C: case 0x2D:
        modrm();
        if (p == Prefix::kF3 || p == Prefix::kF2) {
          G(gpr_w(), kW);
        }
        W(128, kR);
        return;
      case 0x2E: case 0x2F:
        modrm(); V(128, kR); W(128, kR); flags(kW);
        return;
      case 0x30:
        implicit_gpr(1, 32, kR); implicit_gpr(0, 32, kR); implicit_gpr(2, 32, kR);
        return;
      case 0x31:
        implicit_gpr(0, 32, kW); implicit_gpr(2, 32, kW);
        return;
      case 0x32: case 0x33:
        implicit_gpr(1, 32, kR); implicit_gpr(0, 32, kW); implicit_gpr(2, 32, kW);
        return;
      case 0x34: case 0x35:
        return;
      case 0x38:
        map_0f38(next());
        return;
      case 0x3A:
        map_0f3a(next());
        return;
      case 0x50:
        modrm(); G(32, kW); W(128, kR);
        return;
      case 0x51: case 0x52: case 0x53: case 0x5A:
        modrm();
        V(128, (p == Prefix::kF3 || p == Prefix::kF2) ? kRW : kW);
        W(128, kR);
        return;
      case 0x54: case 0x55: case 0x56: case 0x57: case 0x58: case 0x59:
      case 0x5C: case 0x5D: case 0x5E: case 0x5F: case 0x7C: case 0x7D: case 0xD0:
        modrm(); V(128, kRW); W(128, kR);
        return;
      case 0x5B: case 0xE6:
        modrm(); V(128, kW); W(128, kR);
        return;
      case 0x6E:
        modrm();
        if (xmm) V(128, kW);
        E(gpr_w(), kR);
        return;
      case 0x6F:
        modrm();
        if (xmm || p == Prefix::kF3) {
          V(128, kW);
          W(128, kR);
        }
        return;
      case 0x70:
        modrm();
        if (p != Prefix::kNone) {
          V(128, kW);
          W(128, kR);
        }
        imm(1);
        return;
      case 0x71: case 0x72: case 0x73:
        modrm();
        if (!reg_form()) invalid("shift-immediate group requires a register");
        if (xmm) W(128, kRW);
        imm(1);
        return;
      case 0x77:
        return;
      case 0x7E:
        modrm();
        if (p == Prefix::kF3) {
          V(128, kW);
          W(128, kR);
        } else {
          E(gpr_w(), kW);
          if (xmm) V(128, kR);
        }
        return;
      case 0x7F:
        modrm();
        if (xmm || p == Prefix::kF3) {
          W(128, kW);
          V(128, kR);
        }
        return;
      case 0xA0: case 0xA1: case 0xA8: case 0xA9:
        stack();
        return;
      case 0xA2:
        implicit_gpr(0, 32, kRW); implicit_gpr(1, 32, kRW);
        implicit_gpr(3, 32, kW); implicit_gpr(2, 32, kW);
        return;
      case 0xA3: case 0xAB: case 0xB3: case 0xBB:
        modrm();
        E(osz(), op == 0xA3 ? kR : kRW);
        G(osz(), kR);
        flags(kW);
        return;
      case 0xA4: case 0xAC:
        modrm(); E(osz(), kRW); G(osz(), kR); imm(1); flags(kW);
        return;
      case 0xA5: case 0xAD:
        modrm(); E(osz(), kRW); G(osz(), kR); gpr_op(1, 8, kR, true); flags(kW);
        return;
      case 0xAE:
        group15(p);
        return;
      case 0xAF:
        modrm(); G(osz(), kRW); E(osz(), kR); flags(kW);
        return;
      case 0xB0: case 0xB1: {
        modrm();
        const int w = op == 0xB0 ? 8 : osz();
        E(w, kRW);
        G(w, kR);
        implicit_gpr(0, w, kRW);
        flags(kW);
        return;
      }
      case 0xB2: case 0xB4: case 0xB5:
        modrm(); require_mem(); G(osz(), kW);
        return;
      case 0xB6: case 0xBE:
        modrm(); G(osz(), kW); E(8, kR);
        return;
      case 0xB7: case 0xBF:
        modrm(); G(osz(), kW); E(16, kR);
        return;
      case 0xB8:
        if (p != Prefix::kF3) invalid("jmpe is not supported");
        modrm(); G(osz(), kW); E(osz(), kR); flags(kW);
        return;
      case 0xB9: case 0xFF:
        modrm();
        return;
      case 0xBA:
        modrm();
        if (reg_ < 4) invalid("invalid 0f ba extension");
        E(osz(), reg_ == 4 ? kR : kRW);
        imm(1);
        flags(kW);
        return;
      case 0xBC: case 0xBD:
        modrm(); G(osz(), kW); E(osz(), kR); flags(kW);
        return;
      case 0xC0: case 0xC1: {
        modrm();
        const int w = op == 0xC0 ? 8 : osz();
        E(w, kRW);
        G(w, kRW);
        flags(kW);
        return;
      }
      case 0xC2: case 0xC6:
        modrm(); V(128, kRW); W(128, kR); imm(1);
        return;
      case 0xC3:
        modrm(); require_mem(); G(osz(), kR);
        return;
      case 0xC4:
        modrm();
        if (xmm) V(128, kRW);
        E(32, kR);
        imm(1);
        return;
      case 0xC5:
        modrm(); G(32, kW);
        if (xmm) W(128, kR);
        imm(1);
        return;
      case 0xC7:
        group9(p);
        return;
      case 0xD6:
        modrm();
        if (xmm) {
          W(128, kW);
          V(128, kR);
        } else if (p == Prefix::kF3) {
          V(128, kW);
        } else if (p == Prefix::kF2) {
          W(128, kR);
        }
        return;
      case 0xD7:
        modrm(); G(32, kW);
        if (xmm) W(128, kR);
        return;
      case 0xE7:
        modrm(); require_mem();
        if (xmm) V(128, kR);
        return;
      case 0xF0:
        modrm(); require_mem(); V(128, kW);
        return;
      case 0xF7:
        modrm();
        if (xmm) {
          V(128, kR);
          W(128, kR);
        }
        implicit_gpr(7, asz(), kR);
        return;
      default:
        invalid("unsupported two-byte opcode");
    }
  }

  void group7() {
    modrm();
    if (!reg_form()) {
      // sgdt/sidt/lgdt/lidt/smsw/lmsw/invlpg: memory-only forms.
      if (reg_ == 4 || reg_ == 6) E(16, reg_ == 4 ? kW : kR);
      return;
    }
    const int code = (reg_ << 3) | rm_;
    switch (code) {
      case 0x10:  // xgetbv
        implicit_gpr(1, 32, kR); implicit_gpr(0, 32, kW); implicit_gpr(2, 32, kW);
        return;
      case 0x11:  // xsetbv
        implicit_gpr(1, 32, kR); implicit_gpr(0, 32, kR); implicit_gpr(2, 32, kR);
        return;
      case 0x15: case 0x16:  // xend, xtest
        flags(kW);
        return;
      case 0x39:  // rdtscp
        implicit_gpr(0, 32, kW); implicit_gpr(2, 32, kW); implicit_gpr(1, 32, kW);
        return;
      default:
        if (reg_ == 4) {
          E(osz(), kW);  // smsw r
        } else if (reg_ == 6) {
          E(16, kR);  // lmsw r
        }
        return;
    }
  }

  void group9(Prefix p) {
    modrm();
    if (!reg_form()) {
      if (reg_ == 1) {  // cmpxchg8b / cmpxchg16b
        const int w = rex_w_ ? 64 : 32;
        implicit_gpr(0, w, kRW);
        implicit_gpr(2, w, kRW);
        implicit_gpr(3, w, kR);
        implicit_gpr(1, w, kR);
        flags(kW);
      }
      return;
    }
    if (reg_ == 6) {  // rdrand
      E(osz(), kW);
      flags(kW);
    } else if (reg_ == 7) {
      if (p == Prefix::kF3) {
        E(64, kW);  // rdpid
      } else {
        E(osz(), kW);  // rdseed
        flags(kW);
      }
    } else {
      invalid("invalid 0f c7 register form");
    }
  }

  void group15(Prefix p) {
    modrm();
    if (!reg_form()) return;  // fxsave, ldmxcsr, xsave, clflush, ...
    if (p == Prefix::kF3 && reg_ < 4) {
      E(gpr_w(), reg_ < 2 ? kW : kR);  // rd/wr fs/gs base
    }
  }

  // ---- three-byte maps, legacy encoding -----------------------------------

  void map_0f38(std::uint8_t op) {
    const Prefix p = mandatory();
    const bool xmm = p == Prefix::k66;
    if (op == 0xF0 || op == 0xF1) {
      modrm();
      if (p == Prefix::kF2) {  // crc32
        G(gpr_w(), kRW);
        E(op == 0xF0 ? 8 : osz(), kR);
      } else {  // movbe
        require_mem();
        G(osz(), op == 0xF0 ? kW : kR);
      }
      return;
    }
    if (op == 0xF6 && (p == Prefix::k66 || p == Prefix::kF3)) {  // adcx, adox
      modrm(); G(gpr_w(), kRW); E(gpr_w(), kR); flags(kRW);
      return;
    }
    if (op <= 0x0B || (op >= 0x1C && op <= 0x1E)) {
      modrm();
      if (xmm) {
        V(128, op >= 0x1C ? kW : kRW);
        W(128, kR);
      }
      return;
    }
    if (op >= 0xC8 && op <= 0xCD) {  // sha
      modrm(); V(128, kRW); W(128, kR);
      if (op == 0xCB) vec_op(0, 128, kR, false);
      return;
    }
    if (!xmm) invalid("unsupported 0f 38 opcode");
    modrm();
    switch (op) {
      case 0x10: case 0x14: case 0x15:
        V(128, kRW); W(128, kR); vec_op(0, 128, kR, false);
        return;
      case 0x17:
        V(128, kR); W(128, kR); flags(kW);
        return;
      case 0x20: case 0x21: case 0x22: case 0x23: case 0x24: case 0x25:
      case 0x30: case 0x31: case 0x32: case 0x33: case 0x34: case 0x35:
      case 0x41: case 0xDB:
        V(128, kW); W(128, kR);
        return;
      case 0x2A:
        require_mem(); V(128, kW);
        return;
      case 0x28: case 0x29: case 0x2B: case 0x37: case 0x38: case 0x39: case 0x3A:
      case 0x3B: case 0x3C: case 0x3D: case 0x3E: case 0x3F: case 0x40:
      case 0xCF: case 0xDC: case 0xDD: case 0xDE: case 0xDF:
        V(128, kRW); W(128, kR);
        return;
      case 0x80: case 0x81: case 0x82:
        require_mem(); G(64, kR);
        return;
      default:
        invalid("unsupported 0f 38 opcode");
    }
  }

  void map_0f3a(std::uint8_t op) {
    const Prefix p = mandatory();
    const bool xmm = p == Prefix::k66;
    modrm();
    if (op == 0x0F) {  // palignr
      if (xmm) {
        V(128, kRW);
        W(128, kR);
      }
      imm(1);
      return;
    }
    if (op == 0xCC) {  // sha1rnds4
      V(128, kRW); W(128, kR); imm(1);
      return;
    }
    if (!xmm) invalid("unsupported 0f 3a opcode");
    switch (op) {
      case 0x08: case 0x09:
        V(128, kW); W(128, kR);
        break;
      case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x0E: case 0x21:
      case 0x40: case 0x41: case 0x42: case 0x44: case 0xCE: case 0xCF:
        V(128, kRW); W(128, kR);
        break;
      case 0x14: case 0x15: case 0x17:
        E(32, kW); V(128, kR);
        break;
      case 0x16:
        E(gpr_w(), kW); V(128, kR);
        break;
      case 0x20:
        V(128, kRW); E(32, kR);
        break;
      case 0x22:
        V(128, kRW); E(gpr_w(), kR);
        break;
      case 0x60: case 0x61: case 0x62: case 0x63:
        pcmpstr(op, 128);
        break;
      case 0xDF:
        V(128, kW); W(128, kR);
        break;
      default:
        invalid("unsupported 0f 3a opcode");
    }
    imm(1);
  }

  void pcmpstr(std::uint8_t op, int width) {
    V(width, kR);
    W(width, kR);
    if (op == 0x60 || op == 0x61) {
      implicit_gpr(0, 32, kR);
      implicit_gpr(2, 32, kR);
    }
    if (op == 0x60 || op == 0x62) {
      vec_op(0, 128, kW, false);
    } else {
      implicit_gpr(1, 32, kW);
    }
    flags(kW);
  }

  // ---- VEX / EVEX ---------------------------------------------------------

  int vex_width() const {
    if (evex_ && evex_ll_ == 2) return 512;
    return vex_l_ ? 256 : 128;
  }

  void vex(std::uint8_t first) {
    if (opsize_ || last_rep_ != Prefix::kNone || has_rex_) invalid("prefix before vex");
    vex_ = true;
    int map = 1;
    if (first == 0xC5) {
      const std::uint8_t b1 = next();
      rex_r_ = ((b1 >> 7) & 1) ^ 1;
      vvvv_ = (~b1 >> 3) & 15;
      vex_l_ = (b1 >> 2) & 1;
      vex_pp_ = static_cast<Prefix>(b1 & 3);
    } else {
      const std::uint8_t b1 = next();
      const std::uint8_t b2 = next();
      rex_r_ = ((b1 >> 7) & 1) ^ 1;
      rex_x_ = ((b1 >> 6) & 1) ^ 1;
      rex_b_ = ((b1 >> 5) & 1) ^ 1;
      map = b1 & 31;
      rex_w_ = (b2 >> 7) & 1;
      vvvv_ = (~b2 >> 3) & 15;
      vex_l_ = (b2 >> 2) & 1;
      vex_pp_ = static_cast<Prefix>(b2 & 3);
    }
    has_rex_ = true;
    vector_instruction(map, next());
  }

  void evex() {
    if (opsize_ || last_rep_ != Prefix::kNone || has_rex_) invalid("prefix before evex");
    vex_ = evex_ = true;
    const std::uint8_t p0 = next();
    const std::uint8_t p1 = next();
    const std::uint8_t p2 = next();
    if ((p1 & 0x04) == 0) invalid("malformed evex prefix");
    rex_r_ = ((p0 >> 7) & 1) ^ 1;
    rex_x_ = ((p0 >> 6) & 1) ^ 1;
    rex_b_ = ((p0 >> 5) & 1) ^ 1;
    evex_r2_ = ((p0 >> 4) & 1) ^ 1;
    const int map = p0 & 7;
    rex_w_ = (p1 >> 7) & 1;
    evex_v2_ = ((p2 >> 3) & 1) ^ 1;
    vvvv_ = ((~p1 >> 3) & 15) | (evex_v2_ << 4);
    vex_pp_ = static_cast<Prefix>(p1 & 3);
    evex_ll_ = (p2 >> 5) & 3;
    vex_l_ = evex_ll_ == 1;
    evex_b_ = (p2 >> 4) & 1;
    has_rex_ = true;
    if (map < 1 || map > 3) invalid("unsupported evex map");
    vector_instruction(map, next());
  }

  void apply(VecForm form) {
    int w = vex_width();
    // Embedded rounding on a register form reuses L'L; treat as full width.
    if (evex_ && evex_b_ && reg_form()) w = 512;
    const int wv = reg_w_ ? reg_w_ : w;
    const int wm = rm_w_ ? rm_w_ : w;
    switch (form) {
      case VecForm::kNds: V(wv, kW); H(w, kR); W(wm, kR); break;
      case VecForm::kNdsRmw: V(wv, kRW); H(w, kR); W(wm, kR); break;
      case VecForm::kUnary: V(wv, kW); W(wm, kR); break;
      case VecForm::kStore: W(wm, kW); V(wv, kR); break;
      case VecForm::kShiftImm: H(w, kW); W(wm, kR); break;
      case VecForm::kToMask: H(w, kR); W(wm, kR); break;
    }
  }

  // Widening and narrowing forms where one operand is half the vector length.
  int half_width() const { return vex_width() > 128 ? vex_width() / 2 : 128; }

  void vector_instruction(int map, std::uint8_t op) {
    if (map == 1) {
      vec_map1(op);
    } else if (map == 2) {
      vec_map2(op);
    } else if (map == 3) {
      vec_map3(op);
    } else {
      invalid("unsupported vex map");
    }
  }

  bool scalar() const { return vex_pp_ == Prefix::kF3 || vex_pp_ == Prefix::kF2; }

  void vec_map1(std::uint8_t op) {
    const Prefix p = vex_pp_;
    // Opmask instructions (VEX only).
    if (!evex_ && ((op >= 0x41 && op <= 0x4B) || (op >= 0x90 && op <= 0x93) || op == 0x98 ||
                   op == 0x99)) {
      modrm();
      if (op == 0x92 && reg_form()) E(p == Prefix::kF2 ? gpr_w() : 32, kR);
      if (op == 0x93 && reg_form()) G(p == Prefix::kF2 ? gpr_w() : 32, kW);
      if (op == 0x98 || op == 0x99) flags(kW);
      return;
    }
    if (op == 0x77) {
      if (evex_) invalid("evex vzero");
      return;  // vzeroupper / vzeroall
    }
    modrm();
    switch (op) {
      case 0x10:
        apply(scalar() && reg_form() ? VecForm::kNds : VecForm::kUnary);
        return;
      case 0x11:
        if (scalar() && reg_form()) {
          W(128, kW); H(128, kR); V(128, kR);
        } else {
          apply(VecForm::kStore);
        }
        return;
      case 0x12: case 0x16:
        apply(scalar() ? VecForm::kUnary : VecForm::kNds);
        return;
      case 0x13: case 0x17: case 0x29: case 0x2B: case 0x7F: case 0xD6: case 0xE7:
        apply(VecForm::kStore);
        return;
      case 0x14: case 0x15: case 0x54: case 0x55: case 0x56: case 0x57: case 0x58:
      case 0x59: case 0x5C: case 0x5D: case 0x5E: case 0x5F: case 0x7C: case 0x7D:
      case 0xD0:
        apply(VecForm::kNds);
        return;
      case 0x28: case 0x5B: case 0x6F: case 0xE6: case 0xF0:
        if (op == 0xE6) (p == Prefix::kF3 ? rm_w_ : reg_w_) = half_width();
        apply(VecForm::kUnary);
        return;
      case 0x2A:
        V(128, kW); H(128, kR); E(gpr_w(), kR);
        return;
      case 0x2C: case 0x2D:
        G(gpr_w(), kW); W(128, kR);
        return;
      case 0x2E: case 0x2F:
        V(128, kR); W(128, kR); flags(kW);
        return;
      case 0x50:
        G(32, kW); W(vex_width(), kR);
        return;
      case 0x51: case 0x52: case 0x53: case 0x5A:
        if (op == 0x5A && p == Prefix::kNone) rm_w_ = half_width();
        if (op == 0x5A && p == Prefix::k66) reg_w_ = half_width();
        apply(scalar() ? VecForm::kNds : VecForm::kUnary);
        return;
      case 0x6E:
        V(128, kW); E(gpr_w(), kR);
        return;
      case 0x70:
        apply(VecForm::kUnary); imm(1);
        return;
      case 0x71: case 0x72: case 0x73:
        apply(VecForm::kShiftImm); imm(1);
        return;
      case 0x64: case 0x65: case 0x66: case 0x74: case 0x75: case 0x76:
        apply(evex_ ? VecForm::kToMask : VecForm::kNds);
        return;
      case 0x7E:
        if (p == Prefix::kF3) {
          apply(VecForm::kUnary);
        } else {
          E(gpr_w(), kW); V(128, kR);
        }
        return;
      case 0xAE:
        return;  // vldmxcsr / vstmxcsr
      case 0xC2:
        apply(evex_ ? VecForm::kToMask : VecForm::kNds); imm(1);
        return;
      case 0xC4:
        V(128, kW); H(128, kR); E(32, kR); imm(1);
        return;
      case 0xC5:
        G(32, kW); W(128, kR); imm(1);
        return;
      case 0xC6:
        apply(VecForm::kNds); imm(1);
        return;
      case 0xD7:
        G(32, kW); W(vex_width(), kR);
        return;
      case 0xF7:
        V(128, kR); W(128, kR); implicit_gpr(7, asz(), kR);
        return;
      default:
        if ((op >= 0x60 && op <= 0x6D) || (op >= 0xD1 && op <= 0xFE)) {
          apply(VecForm::kNds);
          return;
        }
        invalid("unsupported vex 0f opcode");
    }
  }

  void vec_map2(std::uint8_t op) {
    const Prefix p = vex_pp_;
    if (op >= 0xF2 && op <= 0xF7) {
      bmi(op);
      return;
    }
    vsib_ = (op >= 0x90 && op <= 0x93) || (evex_ && ((op >= 0xA0 && op <= 0xA3) ||
                                                     op == 0xC6 || op == 0xC7));
    modrm();
    if (vsib_) {
      if (op >= 0xA0 || !evex_) {
        // Scatters store, gathers load; VEX gathers carry a vector mask in vvvv.
        if (op < 0xA0) V(vex_width(), kRW);
        if (op >= 0xA0 && op <= 0xA3) V(vex_width(), kR);
        if (!evex_) H(vex_width(), kRW);
      } else {
        V(vex_width(), kRW);
      }
      return;
    }
    if (evex_ && p == Prefix::kF3) {
      // vpmov{wb,db,qb,...} narrowing stores and mask<->vector moves.
      if ((op >= 0x10 && op <= 0x15) || (op >= 0x20 && op <= 0x25) ||
          (op >= 0x30 && op <= 0x35)) {
        rm_w_ = half_width();
        apply(VecForm::kStore);
        return;
      }
      if (op == 0x28 || op == 0x38) {
        V(vex_width(), kW);
        return;
      }
      if (op == 0x26 || op == 0x27 || op == 0x29 || op == 0x39) {
        if (op == 0x26 || op == 0x27) apply(VecForm::kToMask);
        else W(vex_width(), kR);
        return;
      }
    }
    switch (op) {
      case 0x00: case 0x01: case 0x02: case 0x03: case 0x04: case 0x05: case 0x06:
      case 0x07: case 0x08: case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
      case 0x16: case 0x28: case 0x2B: case 0x2C: case 0x2D: case 0x36: case 0x38:
      case 0x39: case 0x3A: case 0x3B: case 0x3C: case 0x3D: case 0x3E: case 0x3F:
      case 0x40: case 0x45: case 0x46: case 0x47: case 0x64: case 0x65: case 0x66:
      case 0x8C: case 0xDC: case 0xDD: case 0xDE: case 0xDF: case 0x8D: case 0x14:
      case 0x15:
        apply(VecForm::kNds);
        return;
      case 0x0E: case 0x0F: case 0x17:
        if (evex_) invalid("unsupported evex 0f38 opcode");
        V(vex_width(), kR); W(vex_width(), kR); flags(kW);
        return;
      case 0x10: case 0x11: case 0x12: case 0x13: case 0x18: case 0x19: case 0x1A:
      case 0x1B: case 0x1C: case 0x1D: case 0x1E: case 0x1F: case 0x20: case 0x21:
      case 0x22: case 0x23: case 0x24: case 0x25: case 0x2A: case 0x30: case 0x31:
      case 0x32: case 0x33: case 0x34: case 0x35: case 0x41: case 0x42: case 0x4C:
      case 0x4E: case 0x58: case 0x59: case 0x5A: case 0x5B: case 0x62: case 0x63:
      case 0x78: case 0x79: case 0x88: case 0x89: case 0x8A: case 0x8B: case 0xC4:
      case 0xDB:
        if (op == 0x18 || op == 0x19 || op == 0x58 || op == 0x59 || op == 0x78 ||
            op == 0x79) {
          rm_w_ = 128;
        } else if (op == 0x13 || (op >= 0x20 && op <= 0x25) || (op >= 0x30 && op <= 0x35)) {
          rm_w_ = half_width();
        }
        if (evex_ && (op == 0x8A || op == 0x8B || op == 0x63)) {
          apply(VecForm::kStore);  // compress
        } else {
          apply(VecForm::kUnary);
        }
        return;
      case 0x7A: case 0x7B: case 0x7C:
        if (!evex_) invalid("unsupported vex 0f38 opcode");
        V(vex_width(), kW); E(op == 0x7C && rex_w_ ? 64 : 32, kR);
        return;
      case 0x26: case 0x27: case 0x29: case 0x37:
        apply(evex_ ? VecForm::kToMask : VecForm::kNds);
        return;
      case 0x2E: case 0x2F: case 0x8E:
        if (!reg_form()) {
          // Masked stores: memory destination, vvvv mask, reg source.
          H(vex_width(), kR); V(vex_width(), kR);
          return;
        }
        invalid("masked store requires memory");
      case 0x43: case 0x4D: case 0x4F: case 0x44: case 0x4B:
        apply(VecForm::kNds);
        return;
      case 0x50: case 0x51: case 0x52: case 0x53: case 0x75: case 0x76: case 0x77:
      case 0x7D: case 0x7E: case 0x7F: case 0xB4: case 0xB5:
        apply(VecForm::kNdsRmw);
        return;
      default:
        if ((op >= 0x96 && op <= 0x9F) || (op >= 0xA6 && op <= 0xAF) ||
            (op >= 0xB6 && op <= 0xBF)) {
          apply(VecForm::kNdsRmw);  // fused multiply-add
          return;
        }
        if (op >= 0xC8 && op <= 0xCF && evex_) {
          apply(VecForm::kUnary);
          return;
        }
        invalid("unsupported vector 0f38 opcode");
    }
  }

  void bmi(std::uint8_t op) {
    if (evex_) invalid("unsupported evex 0f38 gpr opcode");
    modrm();
    const int w = gpr_w();
    const Prefix p = vex_pp_;
    switch (op) {
      case 0xF2:  // andn
        G(w, kW); H_gpr(w, kR); E(w, kR); flags(kW);
        return;
      case 0xF3:  // blsr / blsmsk / blsi
        if (reg_ < 1 || reg_ > 3) invalid("invalid bmi group");
        H_gpr(w, kW); E(w, kR); flags(kW);
        return;
      case 0xF5:
        if (p == Prefix::kNone) {  // bzhi
          G(w, kW); E(w, kR); H_gpr(w, kR); flags(kW);
        } else if (p == Prefix::kF3 || p == Prefix::kF2) {  // pext / pdep
          G(w, kW); H_gpr(w, kR); E(w, kR);
        } else {
          invalid("invalid 0f38 f5 prefix");
        }
        return;
      case 0xF6:
        if (p != Prefix::kF2) invalid("invalid 0f38 f6 prefix");
        G(w, kW); H_gpr(w, kW); E(w, kR); implicit_gpr(2, w, kR);  // mulx
        return;
      case 0xF7:
        G(w, kW); E(w, kR); H_gpr(w, kR);  // bextr / shlx / sarx / shrx
        if (p == Prefix::kNone) flags(kW);
        return;
      default:
        invalid("unsupported bmi opcode");
    }
  }

  void vec_map3(std::uint8_t op) {
    if (!evex_ && op >= 0x30 && op <= 0x33) {  // kshift
      modrm(); imm(1);
      return;
    }
    if (op == 0xF0) {  // rorx
      if (evex_) invalid("unsupported evex rorx");
      modrm(); G(gpr_w(), kW); E(gpr_w(), kR); imm(1);
      return;
    }
    modrm();
    switch (op) {
      case 0x00: case 0x01: case 0x04: case 0x05: case 0x08: case 0x09: case 0xDF:
      case 0x56: case 0x26:
        apply(VecForm::kUnary);
        break;
      case 0x02: case 0x06: case 0x0A: case 0x0C: case 0x0D: case 0x0E:
      case 0x0F: case 0x18: case 0x1A: case 0x21: case 0x23: case 0x38: case 0x3A: case 0x40: case 0x41:
      case 0x42: case 0x43: case 0x44: case 0x46: case 0x50: case 0x51: case 0x55: case 0x57:
      case 0xCE: case 0xCF:
        if ((op == 0x18 || op == 0x38) && !evex_) rm_w_ = 128;
        apply(VecForm::kNds);
        break;
      case 0x25: case 0x54:
        apply(VecForm::kNdsRmw);
        break;
      case 0x19: case 0x1B: case 0x1D: case 0x39: case 0x3B:
        if (op == 0x1D) rm_w_ = half_width();
        if (op == 0x19 || op == 0x39) rm_w_ = 128;
        if (op == 0x1B || op == 0x3B) rm_w_ = 256;
        apply(VecForm::kStore);
        break;
      case 0x14: case 0x15: case 0x17:
        E(32, kW); V(128, kR);
        break;
      case 0x16:
        E(gpr_w(), kW); V(128, kR);
        break;
      case 0x20:
        V(128, kW); H(128, kR); E(32, kR);
        break;
      case 0x22:
        V(128, kW); H(128, kR); E(gpr_w(), kR);
        break;
      case 0x1E: case 0x1F: case 0x3E: case 0x3F: case 0x66: case 0x67:
        if (!evex_) invalid("unsupported vex 0f3a opcode");
        apply(VecForm::kToMask);
        break;
      case 0x4A: case 0x4B: case 0x4C: {
        if (evex_) invalid("unsupported evex 0f3a opcode");
        apply(VecForm::kNds);
        // The fourth operand register is encoded in imm8[7:4].
        const std::uint8_t is4 = next();
        vec_op(is4 >> 4, vex_width(), kR);
        return;
      }
      case 0x60: case 0x61: case 0x62: case 0x63:
        if (evex_) invalid("unsupported evex 0f3a opcode");
        pcmpstr(op, 128);
        break;
      default:
        invalid("unsupported vector 0f3a opcode");
    }
    imm(1);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  DecodedInstruction out_;

  bool opsize_ = false;
  bool addrsize_ = false;
  Prefix last_rep_ = Prefix::kNone;
  bool has_rex_ = false;
  int rex_w_ = 0, rex_r_ = 0, rex_x_ = 0, rex_b_ = 0;

  bool vex_ = false;
  bool evex_ = false;
  Prefix vex_pp_ = Prefix::kNone;
  int vvvv_ = 0;
  int vex_l_ = 0;
  int evex_ll_ = 0;
  int evex_r2_ = 0;
  int evex_v2_ = 0;
  int evex_b_ = 0;
  bool vsib_ = false;
  int reg_w_ = 0;
  int rm_w_ = 0;

  bool has_modrm_ = false;
  int mod_ = 0, reg_ = 0, rm_ = 0;
};

}  // namespace

DecodedInstruction decode_instruction(std::span<const std::uint8_t> bytes,
                                      std::uint64_t address) {
  return Decoder(bytes, address).run();
}

std::string hex_bytes(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 3);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    char buf[4];
    std::snprintf(buf, sizeof buf, i == 0 ? "%02x" : " %02x", bytes[i]);
    out += buf;
  }
  return out;
}

}  // namespace seufi
