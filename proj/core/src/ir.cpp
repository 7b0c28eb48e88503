#include "vnlcm/ir.hpp"

#include <algorithm>
#include <limits>

namespace vnlcm {

std::vector<std::string> Block::successors() const {
  std::vector<std::string> out;
  if (!terminator) return out;
  for (const auto& l : terminator->labels) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

Block* Function::find_block(std::string_view label) {
  for (auto& b : blocks)
    if (b.label == label) return &b;
  return nullptr;
}

const Block* Function::find_block(std::string_view label) const {
  for (const auto& b : blocks)
    if (b.label == label) return &b;
  return nullptr;
}

bool Function::has_param(std::string_view n) const {
  return std::find(params.begin(), params.end(), n) != params.end();
}

Function* Module::find_function(std::string_view name) {
  for (auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const Function* Module::find_function(std::string_view name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

bool is_candidate(Opcode op) {
  switch (op) {
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div:
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
    case Opcode::Cmp:
      return true;
    default:
      return false;
  }
}

bool is_terminator(Opcode op) {
  return op == Opcode::Jmp || op == Opcode::Br || op == Opcode::Ret;
}

bool is_pure(Opcode op) { return is_candidate(op) || op == Opcode::Const || op == Opcode::Phi; }

bool is_commutative(Opcode op, CmpCode cc) {
  switch (op) {
    case Opcode::Add:
    case Opcode::Mul:
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
      return true;
    case Opcode::Cmp:
      return cc == CmpCode::Eq || cc == CmpCode::Ne;
    default:
      return false;
  }
}

std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::Div: return "div";
    case Opcode::And: return "and";
    case Opcode::Or: return "or";
    case Opcode::Xor: return "xor";
    case Opcode::Cmp: return "cmp";
    case Opcode::Const: return "const";
    case Opcode::Opaque: return "opaque";
    case Opcode::Phi: return "phi";
    case Opcode::Alloca: return "alloca";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Print: return "print";
    case Opcode::Jmp: return "jmp";
    case Opcode::Br: return "br";
    case Opcode::Ret: return "ret";
  }
  return "?";
}

std::string_view cmp_name(CmpCode cc) {
  switch (cc) {
    case CmpCode::Eq: return "eq";
    case CmpCode::Ne: return "ne";
    case CmpCode::Lt: return "lt";
    case CmpCode::Le: return "le";
    case CmpCode::Gt: return "gt";
    case CmpCode::Ge: return "ge";
  }
  return "?";
}

std::optional<Opcode> binop_from_name(std::string_view s) {
  static constexpr std::pair<std::string_view, Opcode> table[] = {
      {"add", Opcode::Add}, {"sub", Opcode::Sub}, {"mul", Opcode::Mul}, {"div", Opcode::Div},
      {"and", Opcode::And}, {"or", Opcode::Or},   {"xor", Opcode::Xor},
  };
  for (auto [name, op] : table)
    if (name == s) return op;
  return std::nullopt;
}

std::optional<CmpCode> cmp_from_name(std::string_view s) {
  static constexpr std::pair<std::string_view, CmpCode> table[] = {
      {"eq", CmpCode::Eq}, {"ne", CmpCode::Ne}, {"lt", CmpCode::Lt},
      {"le", CmpCode::Le}, {"gt", CmpCode::Gt}, {"ge", CmpCode::Ge},
  };
  for (auto [name, cc] : table)
    if (name == s) return cc;
  return std::nullopt;
}

std::optional<std::int64_t> evaluate(Opcode op, CmpCode cc, std::int64_t lhs, std::int64_t rhs) {
  // Unsigned arithmetic gives two's-complement wrapping without UB.
  const auto ul = static_cast<std::uint64_t>(lhs);
  const auto ur = static_cast<std::uint64_t>(rhs);
  switch (op) {
    case Opcode::Add: return static_cast<std::int64_t>(ul + ur);
    case Opcode::Sub: return static_cast<std::int64_t>(ul - ur);
    case Opcode::Mul: return static_cast<std::int64_t>(ul * ur);
    case Opcode::Div:
      if (rhs == 0) return std::nullopt;
      if (lhs == std::numeric_limits<std::int64_t>::min() && rhs == -1) return lhs;
      return lhs / rhs;
    case Opcode::And: return lhs & rhs;
    case Opcode::Or: return lhs | rhs;
    case Opcode::Xor: return lhs ^ rhs;
    case Opcode::Cmp:
      switch (cc) {
        case CmpCode::Eq: return lhs == rhs;
        case CmpCode::Ne: return lhs != rhs;
        case CmpCode::Lt: return lhs < rhs;
        case CmpCode::Le: return lhs <= rhs;
        case CmpCode::Gt: return lhs > rhs;
        case CmpCode::Ge: return lhs >= rhs;
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

void for_each_instruction(Function& f, const std::function<void(Block&, Instruction&)>& fn) {
  for (auto& b : f.blocks) {
    for (auto& i : b.phis) fn(b, i);
    for (auto& i : b.body) fn(b, i);
    if (b.terminator) fn(b, *b.terminator);
  }
}

void for_each_instruction(const Function& f,
                          const std::function<void(const Block&, const Instruction&)>& fn) {
  for (const auto& b : f.blocks) {
    for (const auto& i : b.phis) fn(b, i);
    for (const auto& i : b.body) fn(b, i);
    if (b.terminator) fn(b, *b.terminator);
  }
}

std::size_t replace_all_uses(Function& f, std::string_view name, const Operand& replacement) {
  std::size_t n = 0;
  for_each_instruction(f, [&](Block&, Instruction& inst) {
    for (auto& op : inst.operands) {
      if (op.refers_to(name)) {
        op = replacement;
        ++n;
      }
    }
  });
  return n;
}

std::size_t count_uses(const Function& f, std::string_view name) {
  std::size_t n = 0;
  for_each_instruction(f, [&](const Block&, const Instruction& inst) {
    for (const auto& op : inst.operands)
      if (op.refers_to(name)) ++n;
  });
  return n;
}

void retarget_phi_incoming(Block& b, std::string_view from, std::string_view to) {
  for (auto& phi : b.phis)
    for (auto& l : phi.labels)
      if (l == from) l = std::string(to);
}

void retarget_terminator(Block& b, std::string_view from, std::string_view to) {
  if (!b.terminator) return;
  for (auto& l : b.terminator->labels)
    if (l == from) l = std::string(to);
}

NameGen::NameGen(const Function& f) {
  for (const auto& p : f.params) values_.insert(p);
  for_each_instruction(f, [&](const Block& b, const Instruction& i) {
    labels_.insert(b.label);
    if (!i.result.empty()) values_.insert(i.result);
  });
  for (const auto& b : f.blocks) labels_.insert(b.label);
}

std::string NameGen::fresh(std::unordered_set<std::string>& taken, std::string_view stem) {
  for (std::size_t k = 0;; ++k) {
    std::string candidate = std::string(stem) + std::to_string(k);
    if (taken.insert(candidate).second) return candidate;
  }
}

std::string NameGen::value(std::string_view stem) { return fresh(values_, stem); }
std::string NameGen::label(std::string_view stem) { return fresh(labels_, stem); }

}  // namespace vnlcm
