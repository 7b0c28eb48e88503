#pragma once

// Structural analyses over one function: successor and predecessor maps,
// reverse post-order, dominator tree and dominance frontiers. Blocks are
// identified by their index in Function::blocks.

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vnlcm/ir.hpp"

namespace vnlcm {

inline constexpr std::size_t kNoBlock = std::numeric_limits<std::size_t>::max();

struct CfgInfo {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> index;

  // Distinct edges. Predecessor lists only contain reachable blocks.
  std::vector<std::vector<std::size_t>> succs;
  std::vector<std::vector<std::size_t>> preds;

  std::vector<std::size_t> rpo;
  std::vector<std::size_t> rpo_index;  // kNoBlock when unreachable
  std::vector<std::size_t> idom;       // entry maps to itself
  std::vector<std::vector<std::size_t>> dom_children;
  std::vector<std::vector<std::size_t>> df;  // ascending block index

  std::vector<std::string> diagnostics;

  std::size_t size() const { return labels.size(); }
  std::size_t block(std::string_view label) const;
  bool reachable(std::size_t b) const { return rpo_index[b] != kNoBlock; }
  bool dominates(std::size_t a, std::size_t b) const;
  bool strictly_dominates(std::size_t a, std::size_t b) const { return a != b && dominates(a, b); }
  /// Blocks with no successors (function exits), reachable only.
  std::vector<std::size_t> exits() const;

 private:
  friend CfgInfo analyze_cfg(const Function& f);
  std::vector<std::size_t> pre_;
  std::vector<std::size_t> post_;
};

/// RPO is a depth-first traversal from the entry that explores successors
/// from last to first, so that for a branch the first target's region is
/// listed first. Unreachable blocks are reported and left out of rpo.
CfgInfo analyze_cfg(const Function& f);

}  // namespace vnlcm
