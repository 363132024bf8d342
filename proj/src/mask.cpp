#include "seufi/mask.hpp"

namespace seufi {

InjectionMask InjectionMask::parse(std::string_view text) {
  InjectionMask m;
  for (char ch : text) {
    switch (ch) {
      case 'r': m.read_ = true; break;
      case 'w': m.written_ = true; break;
      case 'e': m.explicit_ = true; break;
      case 'i': m.implicit_ = true; break;
      case 'c': m.control_flow_ip_ = true; break;
      case 'o': m.all_ip_ = true; break;
      default:
        throw MaskError(std::string("invalid injection mask character '") + ch +
                            "' (allowed: r w e i c o)",
                        ch);
    }
  }
  if (!m.read_ && !m.written_) {
    throw MaskError("injection mask \"" + std::string(text) + "\" needs 'r' or 'w'", '\0');
  }
  if (!m.explicit_ && !m.implicit_) {
    throw MaskError("injection mask \"" + std::string(text) + "\" needs 'e' or 'i'", '\0');
  }
  return m;
}

std::string InjectionMask::str() const {
  std::string s;
  if (read_) s += 'r';
  if (written_) s += 'w';
  if (explicit_) s += 'e';
  if (implicit_) s += 'i';
  if (control_flow_ip_) s += 'c';
  if (all_ip_) s += 'o';
  return s;
}

bool InjectionMask::is_subset_of(const InjectionMask& o) const {
  auto le = [](bool a, bool b) { return !a || b; };
  return le(read_, o.read_) && le(written_, o.written_) && le(explicit_, o.explicit_) &&
         le(implicit_, o.implicit_) && le(control_flow_ip_, o.control_flow_ip_) &&
         le(all_ip_, o.all_ip_);
}

}  // namespace seufi
