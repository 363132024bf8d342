#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seufi/outcome.hpp"
#include "seufi/rng.hpp"
#include "seufi/stats.hpp"

// A tiny register machine used as a ground-truth oracle: every single-bit
// flip of a program's dynamic trace can be enumerated.
namespace seufi::toy {

inline constexpr int kRegisters = 8;
inline constexpr int kRegisterBits = 16;
inline constexpr int kMemoryCells = 256;

enum class Op { LoadImm, Add, AddImm, Branch, Load, Store, Print, Exit, Detect };
enum class Cond { Eq, Ne, Lt };

struct Instruction {
  Op op = Op::Exit;
  int a = 0, b = 0, c = 0;  // register operands
  std::uint16_t imm = 0;
  Cond cond = Cond::Eq;
  std::size_t target = 0;
};

struct Program {
  std::vector<Instruction> code;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One instruction per line, '#' comments, "name:" labels.
///   li rd, imm        add rd, rs, rt     addi rd, rs, imm
///   beq|bne|blt rs, rt, label            (blt is unsigned)
///   ld rd, ra         st rv, ra          (address = register value)
///   print rs          exit imm           detect
Program parse(std::string_view text);

struct Flip {
  std::size_t step = 0;  // applied before the instruction at this dynamic step
  int reg = 0;
  int bit = 0;
};

enum class Termination { Exited, Detected, IllegalAccess, BudgetExceeded };

struct Execution {
  Termination how = Termination::Exited;
  int exit_code = 0;
  std::vector<std::uint16_t> prints;
  std::size_t steps = 0;
};

Execution execute(const Program& prog, std::size_t step_budget,
                  std::optional<Flip> flip = std::nullopt);

/// Compare a faulty execution against the fault-free one.
RunOutcome classify(const Execution& golden, const Execution& faulty);

struct ExhaustiveResult {
  std::size_t steps = 0;              // length of the fault-free trace
  std::vector<RunOutcome> outcomes;   // index (step * 8 + reg) * 16 + bit
  CampaignStats stats;

  const RunOutcome& at(std::size_t step, int reg, int bit) const;
};

/// Throws std::invalid_argument unless the program exits normally within
/// step_budget / 3 steps.
ExhaustiveResult enumerate_outcomes(const Program& prog, std::size_t step_budget);

/// n uniform draws over the same (step, register, bit) domain.
CampaignStats sample_outcomes(const Program& prog, RunRng& rng, std::size_t n,
                              std::size_t step_budget);

}  // namespace seufi::toy
