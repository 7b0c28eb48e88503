#include "vnlcm/printer.hpp"

#include <sstream>

namespace vnlcm {

std::string print_operand(const Operand& op) {
  if (op.is_literal()) return std::to_string(op.literal);
  return "%" + op.name;
}

std::string print_instruction(const Instruction& inst) {
  std::ostringstream os;
  if (!inst.result.empty()) os << '%' << inst.result << " = ";
  switch (inst.op) {
    case Opcode::Cmp:
      os << "cmp " << cmp_name(inst.cc) << ' ' << print_operand(inst.operands[0]) << ", "
         << print_operand(inst.operands[1]);
      break;
    case Opcode::Phi:
      os << "phi [";
      for (std::size_t k = 0; k < inst.operands.size(); ++k) {
        if (k) os << ", ";
        os << inst.labels[k] << ": " << print_operand(inst.operands[k]);
      }
      os << ']';
      break;
    case Opcode::Jmp:
      os << "jmp " << inst.labels.at(0);
      break;
    case Opcode::Br:
      os << "br " << print_operand(inst.operands.at(0)) << ", " << inst.labels.at(0) << ", "
         << inst.labels.at(1);
      break;
    default:
      os << opcode_name(inst.op);
      for (std::size_t k = 0; k < inst.operands.size(); ++k)
        os << (k ? ", " : " ") << print_operand(inst.operands[k]);
      break;
  }
  return os.str();
}

std::string print_function(const Function& f) {
  std::ostringstream os;
  os << "func @" << f.name << '(';
  for (std::size_t k = 0; k < f.params.size(); ++k) os << (k ? ", %" : "%") << f.params[k];
  os << ") {\n";
  for (const auto& b : f.blocks) {
    os << b.label << ":\n";
    for (const auto& i : b.phis) os << "  " << print_instruction(i) << '\n';
    for (const auto& i : b.body) os << "  " << print_instruction(i) << '\n';
    if (b.terminator) os << "  " << print_instruction(*b.terminator) << '\n';
  }
  os << "}\n";
  return os.str();
}

std::string print_module(const Module& m) {
  std::string out;
  for (std::size_t k = 0; k < m.functions.size(); ++k) {
    if (k) out += '\n';
    out += print_function(m.functions[k]);
  }
  return out;
}

}  // namespace vnlcm
