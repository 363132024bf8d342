#pragma once

#include <stdlib.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "seufi/injector.hpp"

namespace seufi::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SEUFI_FIXTURE_DIR) / name;
}

inline std::filesystem::path toy_program(const std::string& name) {
  return std::filesystem::path(SEUFI_TOY_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Deterministic choices: a fixed fraction of the original duration, a named
// register (other pool entries are dropped, so the injector steps until the
// register shows up), a fixed bit and a fixed phase coin.
class ForcedChoice : public ChoicePolicy {
 public:
  ForcedChoice(double time_fraction, std::string register_name, int bit, bool coin = true)
      : fraction_(time_fraction), name_(std::move(register_name)), bit_(bit), coin_(coin) {}

  double draw_time(double d) override { return fraction_ * d; }
  bool coin() override { return coin_; }
  std::size_t choose_entry(std::span<const PoolEntry>) override { return 0; }
  int choose_bit(const RegisterAccess&) override { return bit_; }
  std::vector<PoolEntry> restrict_pool(std::vector<PoolEntry> pool) override {
    std::vector<PoolEntry> out;
    for (auto& e : pool) {
      if (e.access.name() == name_) out.push_back(e);
    }
    return out;
  }

 private:
  double fraction_;
  std::string name_;
  int bit_;
  bool coin_;
};

// Scratch directory removed at scope exit.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "seufi-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace seufi::testing
