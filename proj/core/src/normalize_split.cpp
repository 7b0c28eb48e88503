#include <algorithm>

#include "vnlcm/cfg.hpp"
#include "vnlcm/normalize.hpp"

namespace vnlcm {

namespace {

std::vector<std::pair<std::string, std::string>> critical_edges(const Function& f) {
  CfgInfo cfg = analyze_cfg(f);
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t a : cfg.rpo) {
    if (cfg.succs[a].size() < 2) continue;
    for (std::size_t b : cfg.succs[a])
      if (cfg.preds[b].size() >= 2) edges.emplace_back(cfg.labels[a], cfg.labels[b]);
  }
  return edges;
}

}  // namespace

bool has_critical_edges(const Function& f) { return !critical_edges(f).empty(); }

std::size_t split_critical_edges(Function& f) {
  auto edges = critical_edges(f);
  NameGen names(f);
  for (const auto& [from, to] : edges) {
    std::string label = names.label(from + ".to." + to + ".");
    Block split;
    split.label = label;
    split.terminator = Instruction{{}, Opcode::Jmp, CmpCode::Eq, {}, {to}};

    Block* src = f.find_block(from);
    retarget_terminator(*src, to, label);
    retarget_phi_incoming(*f.find_block(to), from, label);

    auto pos = std::find_if(f.blocks.begin(), f.blocks.end(), [&](const Block& b) { return b.label == from; });
    f.blocks.insert(pos + 1, std::move(split));
  }
  return edges.size();
}

}  // namespace vnlcm
