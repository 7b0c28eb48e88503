#include "vnlcm/loops.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace vnlcm {

bool Loop::contains(std::size_t b) const { return std::binary_search(body.begin(), body.end(), b); }

const Loop* LoopInfo::loop_with_header(std::size_t h) const {
  for (const auto& l : loops)
    if (l.header == h) return &l;
  return nullptr;
}

LoopInfo find_natural_loops(const Function& f, const CfgInfo& cfg) {
  LoopInfo li;
  li.loop_depth.assign(cfg.size(), 0);

  // header -> latches, ordered by header RPO position
  std::map<std::size_t, std::vector<std::size_t>> back_edges;
  for (std::size_t a : cfg.rpo) {
    for (std::size_t h : cfg.succs[a]) {
      if (cfg.rpo_index[h] > cfg.rpo_index[a]) continue;  // forward edge
      if (cfg.dominates(h, a)) {
        back_edges[cfg.rpo_index[h]].push_back(a);
      } else {
        li.diagnostics.push_back("irreducible edge " + cfg.labels[a] + " -> " + cfg.labels[h] +
                                 " in @" + f.name + "; loop omitted");
      }
    }
  }

  for (auto& [rank, latches] : back_edges) {
    Loop loop;
    loop.header = cfg.rpo[rank];
    loop.latches = latches;
    std::set<std::size_t> body{loop.header};
    std::vector<std::size_t> work;
    for (std::size_t l : latches)
      if (body.insert(l).second) work.push_back(l);
    while (!work.empty()) {
      std::size_t b = work.back();
      work.pop_back();
      for (std::size_t p : cfg.preds[b])
        if (body.insert(p).second) work.push_back(p);
    }
    loop.body.assign(body.begin(), body.end());

    std::vector<std::size_t> outside;
    for (std::size_t p : cfg.preds[loop.header])
      if (!body.count(p)) outside.push_back(p);
    if (outside.size() == 1 && cfg.succs[outside[0]].size() == 1) loop.preheader = outside[0];

    for (std::size_t b : loop.body) ++li.loop_depth[b];
    li.loops.push_back(std::move(loop));
  }
  return li;
}

}  // namespace vnlcm
