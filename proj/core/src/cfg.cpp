#include "vnlcm/cfg.hpp"

#include <algorithm>
#include <stdexcept>

namespace vnlcm {

std::size_t CfgInfo::block(std::string_view label) const {
  auto it = index.find(std::string(label));
  if (it == index.end()) throw std::out_of_range("unknown block label " + std::string(label));
  return it->second;
}

bool CfgInfo::dominates(std::size_t a, std::size_t b) const {
  if (!reachable(a) || !reachable(b)) return false;
  return pre_[a] <= pre_[b] && post_[b] <= post_[a];
}

std::vector<std::size_t> CfgInfo::exits() const {
  std::vector<std::size_t> out;
  for (std::size_t b : rpo)
    if (succs[b].empty()) out.push_back(b);
  return out;
}

namespace {

std::size_t intersect(const CfgInfo& c, std::size_t a, std::size_t b) {
  while (a != b) {
    while (c.rpo_index[a] > c.rpo_index[b]) a = c.idom[a];
    while (c.rpo_index[b] > c.rpo_index[a]) b = c.idom[b];
  }
  return a;
}

}  // namespace

CfgInfo analyze_cfg(const Function& f) {
  CfgInfo c;
  const std::size_t n = f.blocks.size();
  c.labels.reserve(n);
  for (std::size_t b = 0; b < n; ++b) {
    c.labels.push_back(f.blocks[b].label);
    c.index.emplace(f.blocks[b].label, b);
  }
  c.succs.assign(n, {});
  c.preds.assign(n, {});
  for (std::size_t b = 0; b < n; ++b)
    for (const auto& l : f.blocks[b].successors()) c.succs[b].push_back(c.block(l));

  // Iterative DFS for post-order; successors pushed so the first one is
  // explored last.
  c.rpo_index.assign(n, kNoBlock);
  std::vector<std::size_t> post;
  if (n > 0) {
    std::vector<char> seen(n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> stack;  // block, next succ (from the back)
    stack.emplace_back(0, 0);
    seen[0] = 1;
    while (!stack.empty()) {
      auto& [b, k] = stack.back();
      const auto& ss = c.succs[b];
      if (k < ss.size()) {
        std::size_t s = ss[ss.size() - 1 - k];
        ++k;
        if (!seen[s]) {
          seen[s] = 1;
          stack.emplace_back(s, 0);
        }
      } else {
        post.push_back(b);
        stack.pop_back();
      }
    }
  }
  c.rpo.assign(post.rbegin(), post.rend());
  for (std::size_t k = 0; k < c.rpo.size(); ++k) c.rpo_index[c.rpo[k]] = k;
  for (std::size_t b = 0; b < n; ++b) {
    if (!c.reachable(b)) {
      c.diagnostics.push_back("unreachable block " + c.labels[b] + " in @" + f.name);
      continue;
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (!c.reachable(b)) continue;
    for (std::size_t s : c.succs[b]) c.preds[s].push_back(b);
  }

  // Cooper, Harvey and Kennedy's iterative dominator algorithm.
  c.idom.assign(n, kNoBlock);
  if (!c.rpo.empty()) {
    c.idom[c.rpo[0]] = c.rpo[0];
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t k = 1; k < c.rpo.size(); ++k) {
        std::size_t b = c.rpo[k];
        std::size_t new_idom = kNoBlock;
        for (std::size_t p : c.preds[b]) {
          if (c.idom[p] == kNoBlock) continue;
          new_idom = new_idom == kNoBlock ? p : intersect(c, p, new_idom);
        }
        if (c.idom[b] != new_idom) {
          c.idom[b] = new_idom;
          changed = true;
        }
      }
    }
  }

  c.dom_children.assign(n, {});
  for (std::size_t b : c.rpo)
    if (c.idom[b] != b) c.dom_children[c.idom[b]].push_back(b);

  // Pre/post numbering of the dominator tree for O(1) dominance queries.
  c.pre_.assign(n, 0);
  c.post_.assign(n, 0);
  if (!c.rpo.empty()) {
    std::size_t clock = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{c.rpo[0], 0}};
    c.pre_[c.rpo[0]] = clock++;
    while (!stack.empty()) {
      auto& [b, k] = stack.back();
      if (k < c.dom_children[b].size()) {
        std::size_t ch = c.dom_children[b][k++];
        c.pre_[ch] = clock++;
        stack.emplace_back(ch, 0);
      } else {
        c.post_[b] = clock++;
        stack.pop_back();
      }
    }
  }

  c.df.assign(n, {});
  for (std::size_t b : c.rpo) {
    if (c.preds[b].size() < 2) continue;
    for (std::size_t p : c.preds[b]) {
      std::size_t runner = p;
      while (runner != c.idom[b]) {
        auto& d = c.df[runner];
        if (std::find(d.begin(), d.end(), b) == d.end()) d.push_back(b);
        if (runner == c.idom[runner]) break;
        runner = c.idom[runner];
      }
    }
  }
  for (auto& d : c.df) std::sort(d.begin(), d.end());
  return c;
}

}  // namespace vnlcm
