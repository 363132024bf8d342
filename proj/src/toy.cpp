#include "seufi/toy.hpp"

#include <csignal>
#include <map>
#include <sstream>

namespace seufi::toy {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(trim(part));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

struct Line {
  int number;
  std::string mnemonic;
  std::vector<std::string> operands;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

int reg(const Line& l, std::size_t i) {
  const std::string& s = l.operands.at(i);
  if (s.size() == 2 && s[0] == 'r' && s[1] >= '0' && s[1] < '0' + kRegisters) return s[1] - '0';
  fail(l.number, "expected a register r0..r7, got \"" + s + "\"");
}

std::uint16_t imm(const Line& l, std::size_t i) {
  const std::string& s = l.operands.at(i);
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used, 0);
    if (used != s.size() || v < -32768 || v > 65535) throw std::out_of_range(s);
    return static_cast<std::uint16_t>(v);
  } catch (const std::logic_error&) {
    fail(l.number, "bad immediate \"" + s + "\"");
  }
}

}  // namespace

Program parse(std::string_view text) {
  std::vector<Line> lines;
  std::map<std::string, std::size_t> labels;
  std::stringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string s = raw.substr(0, raw.find('#'));
    s = trim(s);
    while (true) {
      const auto colon = s.find(':');
      if (colon == std::string::npos) break;
      const std::string name = trim(s.substr(0, colon));
      if (name.empty() || name.find_first_of(" \t,") != std::string::npos) {
        fail(number, "bad label");
      }
      if (!labels.emplace(name, lines.size()).second) fail(number, "duplicate label " + name);
      s = trim(s.substr(colon + 1));
    }
    if (s.empty()) continue;
    const auto sp = s.find_first_of(" \t");
    Line l{number, s.substr(0, sp), {}};
    if (sp != std::string::npos) l.operands = split_operands(s.substr(sp + 1));
    lines.push_back(std::move(l));
  }

  Program p;
  for (const Line& l : lines) {
    auto arity = [&](std::size_t n) {
      if (l.operands.size() != n) {
        fail(l.number, l.mnemonic + " takes " + std::to_string(n) + " operands");
      }
    };
    Instruction ins;
    const std::string& m = l.mnemonic;
    if (m == "li") {
      arity(2);
      ins = {Op::LoadImm, reg(l, 0), 0, 0, imm(l, 1)};
    } else if (m == "add") {
      arity(3);
      ins = {Op::Add, reg(l, 0), reg(l, 1), reg(l, 2)};
    } else if (m == "addi") {
      arity(3);
      ins = {Op::AddImm, reg(l, 0), reg(l, 1), 0, imm(l, 2)};
    } else if (m == "beq" || m == "bne" || m == "blt") {
      arity(3);
      ins = {Op::Branch, reg(l, 0), reg(l, 1)};
      ins.cond = m == "beq" ? Cond::Eq : m == "bne" ? Cond::Ne : Cond::Lt;
      auto it = labels.find(l.operands[2]);
      if (it == labels.end()) fail(l.number, "unknown label " + l.operands[2]);
      ins.target = it->second;
    } else if (m == "ld") {
      arity(2);
      ins = {Op::Load, reg(l, 0), reg(l, 1)};
    } else if (m == "st") {
      arity(2);
      ins = {Op::Store, reg(l, 0), reg(l, 1)};
    } else if (m == "print") {
      arity(1);
      ins = {Op::Print, reg(l, 0)};
    } else if (m == "exit") {
      arity(1);
      ins = {Op::Exit, 0, 0, 0, imm(l, 0)};
    } else if (m == "detect") {
      arity(0);
      ins = {Op::Detect};
    } else {
      fail(l.number, "unknown instruction " + m);
    }
    p.code.push_back(ins);
  }
  return p;
}

Execution execute(const Program& prog, std::size_t step_budget, std::optional<Flip> flip) {
  std::array<std::uint16_t, kRegisters> r{};
  std::array<std::uint16_t, kMemoryCells> mem{};
  Execution ex;
  std::size_t pc = 0;
  for (;;) {
    if (ex.steps >= step_budget) {
      ex.how = Termination::BudgetExceeded;
      return ex;
    }
    if (flip && flip->step == ex.steps) {
      r[flip->reg] ^= static_cast<std::uint16_t>(1u << flip->bit);
    }
    if (pc >= prog.code.size()) {
      ex.how = Termination::IllegalAccess;
      return ex;
    }
    const Instruction& i = prog.code[pc];
    ++ex.steps;
    ++pc;
    switch (i.op) {
      case Op::LoadImm: r[i.a] = i.imm; break;
      case Op::Add: r[i.a] = static_cast<std::uint16_t>(r[i.b] + r[i.c]); break;
      case Op::AddImm: r[i.a] = static_cast<std::uint16_t>(r[i.b] + i.imm); break;
      case Op::Branch: {
        const bool taken = i.cond == Cond::Eq   ? r[i.a] == r[i.b]
                           : i.cond == Cond::Ne ? r[i.a] != r[i.b]
                                                : r[i.a] < r[i.b];
        if (taken) pc = i.target;
        break;
      }
      case Op::Load:
        if (r[i.b] >= kMemoryCells) {
          ex.how = Termination::IllegalAccess;
          return ex;
        }
        r[i.a] = mem[r[i.b]];
        break;
      case Op::Store:
        if (r[i.b] >= kMemoryCells) {
          ex.how = Termination::IllegalAccess;
          return ex;
        }
        mem[r[i.b]] = r[i.a];
        break;
      case Op::Print: ex.prints.push_back(r[i.a]); break;
      case Op::Exit:
        ex.how = Termination::Exited;
        ex.exit_code = i.imm;
        return ex;
      case Op::Detect:
        ex.how = Termination::Detected;
        return ex;
    }
  }
}

RunOutcome classify(const Execution& golden, const Execution& faulty) {
  switch (faulty.how) {
    case Termination::Detected: return {OutcomeKind::Detected, 0, "detect"};
    case Termination::IllegalAccess: return {OutcomeKind::Exception, SIGSEGV, "illegal access"};
    case Termination::BudgetExceeded: return {OutcomeKind::InfiniteExecution, 0, "budget"};
    case Termination::Exited: break;
  }
  if (faulty.prints != golden.prints || faulty.exit_code != golden.exit_code) {
    return {OutcomeKind::Corrupted, 0, "output differs"};
  }
  return {OutcomeKind::Masked, 0, "output equal"};
}

const RunOutcome& ExhaustiveResult::at(std::size_t step, int reg, int bit) const {
  return outcomes.at((step * kRegisters + static_cast<std::size_t>(reg)) * kRegisterBits +
                     static_cast<std::size_t>(bit));
}

namespace {

Execution golden_run(const Program& prog, std::size_t step_budget) {
  Execution g = execute(prog, step_budget / 3);
  if (g.how != Termination::Exited) {
    throw std::invalid_argument("the program does not exit normally within " +
                                std::to_string(step_budget / 3) + " steps");
  }
  return g;
}

}  // namespace

ExhaustiveResult enumerate_outcomes(const Program& prog, std::size_t step_budget) {
  const Execution golden = golden_run(prog, step_budget);
  ExhaustiveResult res;
  res.steps = golden.steps;
  res.outcomes.reserve(golden.steps * kRegisters * kRegisterBits);
  for (std::size_t s = 0; s < golden.steps; ++s) {
    for (int reg = 0; reg < kRegisters; ++reg) {
      for (int bit = 0; bit < kRegisterBits; ++bit) {
        res.outcomes.push_back(classify(golden, execute(prog, step_budget, Flip{s, reg, bit})));
      }
    }
  }
  res.stats = aggregate(res.outcomes);
  return res;
}

CampaignStats sample_outcomes(const Program& prog, RunRng& rng, std::size_t n,
                              std::size_t step_budget) {
  if (n == 0) throw std::invalid_argument("sample_outcomes needs n >= 1");
  const Execution golden = golden_run(prog, step_budget);
  std::vector<RunOutcome> outcomes;
  outcomes.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Flip f;
    f.step = static_cast<std::size_t>(rng.below(golden.steps));
    f.reg = static_cast<int>(rng.below(kRegisters));
    f.bit = static_cast<int>(rng.below(kRegisterBits));
    outcomes.push_back(classify(golden, execute(prog, step_budget, f)));
  }
  return aggregate(outcomes);
}

}  // namespace seufi::toy
