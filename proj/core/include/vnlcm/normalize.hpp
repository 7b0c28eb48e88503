#pragma once

// CFG-shaping passes composed around PRE: critical-edge splitting, loop
// rotation, stack-slot promotion and CFG cleanup. All passes rewrite the
// function in place and leave valid SSA behind.

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "vnlcm/ir.hpp"

namespace vnlcm {

/// Inserts a `jmp`-only block on every edge from a block with several
/// successors to a block with several predecessors. Returns the number of
/// edges split.
std::size_t split_critical_edges(Function& f);

/// True if some edge still runs from a multi-successor block to a
/// multi-predecessor block (among reachable blocks).
bool has_critical_edges(const Function& f);

struct RotateStats {
  std::size_t rotated = 0;
  std::vector<std::string> diagnostics;
};

/// Turns while-shaped loops (header exits the loop and holds only phis and
/// pure instructions) into guarded do-while loops: the header computation is
/// duplicated into a guard ahead of the loop, a fresh preheader sits between
/// guard and body, and the original header becomes the bottom test. Every
/// loop present on entry is considered once, innermost first. Do-while loops
/// are left alone.
RotateStats rotate_loops(Function& f);

struct Mem2RegStats {
  std::size_t promoted = 0;
  std::size_t phis_inserted = 0;
  std::size_t loads_removed = 0;
  std::size_t stores_removed = 0;
  std::vector<std::string> diagnostics;
};

/// Promotes every alloca used only as a whole-slot load/store address to SSA
/// values, inserting pruned phis at the iterated dominance frontier of its
/// stores. A load with no reaching store reads 0 and produces a diagnostic.
/// When `only` is given, allocas not named in it are left untouched.
Mem2RegStats mem2reg_promote(Function& f, const std::unordered_set<std::string>* only = nullptr);

struct SimplifyStats {
  std::size_t unreachable_removed = 0;
  std::size_t blocks_merged = 0;
  std::size_t jumps_folded = 0;
  std::size_t branches_folded = 0;
  std::size_t dead_removed = 0;
};

/// Iterates to a fixpoint: drop unreachable blocks, fold constant or
/// same-target branches, merge a block into its single predecessor, bypass
/// empty `jmp` blocks, and delete unused side-effect-free instructions.
SimplifyStats simplify_cfg(Function& f);

}  // namespace vnlcm
