#pragma once

#include <optional>
#include <vector>

#include "vnlcm/cfg.hpp"

namespace vnlcm {

struct Loop {
  std::size_t header = kNoBlock;
  std::vector<std::size_t> body;  // ascending block index, includes header
  std::vector<std::size_t> latches;
  std::optional<std::size_t> preheader;

  bool contains(std::size_t b) const;
};

struct LoopInfo {
  std::vector<Loop> loops;
  std::vector<unsigned> loop_depth;  // per block
  std::vector<std::string> diagnostics;

  bool in_loop(std::size_t b) const { return b < loop_depth.size() && loop_depth[b] > 0; }
  const Loop* loop_with_header(std::size_t h) const;
};

/// One loop per back-edge target (bodies of back edges into one header are
/// merged). Retreating edges whose target does not dominate the source are
/// irreducible; they produce a diagnostic and no loop.
LoopInfo find_natural_loops(const Function& f, const CfgInfo& cfg);

}  // namespace vnlcm
