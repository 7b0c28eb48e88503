#pragma once

#include <string>
#include <vector>

#include "vnlcm/ir.hpp"

namespace vnlcm {

/// Structural and SSA checks. An empty result means the function is well
/// formed: terminators present, labels resolved, operand shapes legal, each
/// SSA name defined once, phi incoming labels matching predecessors, and
/// every use dominated by its definition.
std::vector<std::string> validate(const Function& f);
std::vector<std::string> validate(const Module& m);

}  // namespace vnlcm
