#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seufi {

class MaskError : public std::invalid_argument {
 public:
  MaskError(const std::string& what, char offending)
      : std::invalid_argument(what), offending_(offending) {}
  /// The character that made the mask invalid, or '\0' for a missing class.
  char offending() const { return offending_; }

 private:
  char offending_;
};

/// Which register accesses are eligible fault targets.
///   r  registers the instruction reads
///   w  registers the instruction writes
///   e  explicit operands
///   i  implicit operands (flags, stack pointer, fixed registers)
///   c  the instruction pointer, on control-flow instructions
///   o  the instruction pointer, on every instruction
class InjectionMask {
 public:
  /// Throws MaskError on characters outside "rweico" or when the mask lacks
  /// a direction (r/w) or an operand class (e/i).
  static InjectionMask parse(std::string_view text);

  bool read() const { return read_; }
  bool written() const { return written_; }
  bool explicit_operands() const { return explicit_; }
  bool implicit_operands() const { return implicit_; }
  bool control_flow_ip() const { return control_flow_ip_; }
  bool all_ip() const { return all_ip_; }

  /// Letters in canonical order, e.g. "rweico".
  std::string str() const;

  /// Flag-set inclusion.
  bool is_subset_of(const InjectionMask& other) const;

  friend bool operator==(const InjectionMask&, const InjectionMask&) = default;

 private:
  bool read_ = false;
  bool written_ = false;
  bool explicit_ = false;
  bool implicit_ = false;
  bool control_flow_ip_ = false;
  bool all_ip_ = false;
};

}  // namespace seufi
