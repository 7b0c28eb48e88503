#pragma once

#include <string>
#include <vector>

#include "vnlcm/ir.hpp"
#include "vnlcm/pre.hpp"

namespace vnlcm {

/// Graphviz digraph of f. When `sets` is given, each block label also lists
/// the members (as VNs) of the requested set families.
std::string to_dot(const Function& f, const PreArtifacts* sets = nullptr,
                   const std::vector<std::string>& families = {});

}  // namespace vnlcm
