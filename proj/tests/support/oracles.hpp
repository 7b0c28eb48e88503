#pragma once

// Slow, direct reference computations the optimizer is checked against.
// Nothing here goes through CfgInfo or the worklist solver; the graph is
// rebuilt from terminators and every fixpoint is reached by round-robin
// iteration.

#include <cstdint>
#include <string>
#include <vector>

#include "vnlcm/dataflow.hpp"
#include "vnlcm/interpreter.hpp"
#include "vnlcm/ir.hpp"
#include "vnlcm/pre.hpp"
#include "vnlcm/value_numbering.hpp"

namespace vnlcm::testing {

struct RawGraph {
  std::vector<std::vector<std::size_t>> succs;
  std::vector<std::vector<std::size_t>> preds;  // reachable predecessors only
  std::vector<bool> reachable;
};

RawGraph raw_graph(const Function& f);

/// dom[b][a] is true iff a dominates b. Rows of unreachable blocks are all
/// false. Computed as Dom(b) = {b} | AND_p Dom(p) from the full set.
std::vector<std::vector<bool>> brute_force_dominators(const Function& f);

/// Round-robin over reachable blocks in layout order until nothing changes.
/// Unreachable blocks keep `top`.
Solution chaotic_solve(const Function& f, const DataflowSpec& spec);

/// Re-applies the equations of `spec` once; true iff nothing would change.
bool is_fixpoint(const Function& f, const DataflowSpec& spec, const Solution& sol);

/// TRANSP/ANTLOC/XCOMP recomputed from the leader instructions.
LocalProperties reference_local_properties(const Function& f, const ValueTable& vt, const SlotMap& sm);

/// All 19 sets straight from the equations, each iterative problem solved
/// by round-robin from the universe. Unreachable blocks get empty sets.
LcmSets reference_lcm(const Function& f, const LocalProperties& lp, std::size_t width);

/// Index of the first family (in LcmSets::named order) whose vectors differ
/// at a reachable block, as "FAMILY@label"; empty when everything agrees.
std::string first_difference(const Function& f, const LcmSets& a, const LcmSets& b);

struct SoundnessReport {
  std::uint64_t checks = 0;
  std::vector<std::string> violations;
};

/// Executes f (which the table describes) and, after every candidate
/// instruction, compares its value with every other name of the same value
/// number whose definition dominates it, and with the constant of its number.
SoundnessReport check_vn_soundness(const Function& f, const ValueTable& vt, const ExecCase& c);

}  // namespace vnlcm::testing
