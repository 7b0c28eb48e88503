#pragma once

#include <string>

#include "vnlcm/ir.hpp"

namespace vnlcm {

std::string print_operand(const Operand& op);
std::string print_instruction(const Instruction& inst);
std::string print_function(const Function& f);
/// Canonical text; `parse_module(print_module(m)) == m` for valid modules.
std::string print_module(const Module& m);

}  // namespace vnlcm
