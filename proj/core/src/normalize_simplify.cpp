#include <algorithm>
#include <unordered_map>

#include "vnlcm/cfg.hpp"
#include "vnlcm/normalize.hpp"

namespace vnlcm {

namespace {

void drop_incoming(Block& b, const std::string& from) {
  for (auto& phi : b.phis) {
    for (std::size_t k = 0; k < phi.labels.size();) {
      if (phi.labels[k] == from) {
        phi.labels.erase(phi.labels.begin() + static_cast<std::ptrdiff_t>(k));
        phi.operands.erase(phi.operands.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        ++k;
      }
    }
  }
}

bool remove_unreachable(Function& f, SimplifyStats& st) {
  CfgInfo cfg = analyze_cfg(f);
  std::unordered_set<std::string> dead;
  for (std::size_t b = 0; b < cfg.size(); ++b)
    if (!cfg.reachable(b)) dead.insert(cfg.labels[b]);
  if (dead.empty()) return false;
  for (auto& b : f.blocks)
    for (const auto& d : dead) drop_incoming(b, d);
  std::erase_if(f.blocks, [&](const Block& b) { return dead.count(b.label) > 0; });
  st.unreachable_removed += dead.size();
  return true;
}

bool fold_branches(Function& f, SimplifyStats& st) {
  bool changed = false;
  for (auto& b : f.blocks) {
    if (!b.terminator || b.terminator->op != Opcode::Br) continue;
    Instruction& t = *b.terminator;
    std::optional<std::string> keep;
    if (t.labels[0] == t.labels[1]) {
      keep = t.labels[0];
    } else if (t.operands[0].is_literal()) {
      bool taken = t.operands[0].literal != 0;
      keep = taken ? t.labels[0] : t.labels[1];
      drop_incoming(*f.find_block(taken ? t.labels[1] : t.labels[0]), b.label);
    }
    if (!keep) continue;
    b.terminator = Instruction{{}, Opcode::Jmp, CmpCode::Eq, {}, {*keep}};
    ++st.branches_folded;
    changed = true;
  }
  return changed;
}

bool remove_trivial_phis(Function& f) {
  bool changed = false;
  for (auto& b : f.blocks) {
    for (std::size_t k = 0; k < b.phis.size();) {
      Instruction& phi = b.phis[k];
      std::optional<Operand> same;
      bool unique = true;
      for (const auto& op : phi.operands) {
        if (op.refers_to(phi.result)) continue;
        if (!same) same = op;
        else if (!(*same == op)) unique = false;
      }
      if (!unique || !same) {
        ++k;
        continue;
      }
      std::string name = phi.result;
      Operand repl = *same;
      b.phis.erase(b.phis.begin() + static_cast<std::ptrdiff_t>(k));
      replace_all_uses(f, name, repl);
      changed = true;
    }
  }
  return changed;
}

// b absorbs its single successor s when s has b as its only predecessor.
bool merge_chains(Function& f, SimplifyStats& st) {
  CfgInfo cfg = analyze_cfg(f);
  for (std::size_t b = 0; b < cfg.size(); ++b) {
    if (cfg.succs[b].size() != 1 || f.blocks[b].terminator->op != Opcode::Jmp) continue;
    std::size_t s = cfg.succs[b][0];
    if (s == b || s == 0 || cfg.preds[s].size() != 1 || !f.blocks[s].phis.empty()) continue;
    Block& from = f.blocks[b];
    Block& into = f.blocks[s];
    const std::string into_label = into.label;
    for (auto& i : into.body) from.body.push_back(std::move(i));
    from.terminator = std::move(into.terminator);
    for (const auto& l : from.successors()) retarget_phi_incoming(*f.find_block(l), into_label, from.label);
    f.blocks.erase(f.blocks.begin() + static_cast<std::ptrdiff_t>(s));
    ++st.blocks_merged;
    return true;
  }
  return false;
}

// A jmp-only block is bypassed when every predecessor can reach the target
// directly without giving the target's phis two different values on one edge.
bool fold_empty_jumps(Function& f, SimplifyStats& st) {
  CfgInfo cfg = analyze_cfg(f);
  for (std::size_t e = 1; e < cfg.size(); ++e) {
    const Block& eb = f.blocks[e];
    if (!eb.phis.empty() || !eb.body.empty() || eb.terminator->op != Opcode::Jmp) continue;
    std::size_t t = cfg.succs[e][0];
    if (t == e || cfg.preds[e].empty()) continue;
    const Block& tb = f.blocks[t];
    auto value_from = [&](const Instruction& phi, const std::string& l) -> std::optional<Operand> {
      for (std::size_t k = 0; k < phi.labels.size(); ++k)
        if (phi.labels[k] == l) return phi.operands[k];
      return std::nullopt;
    };
    bool ok = true;
    for (std::size_t p : cfg.preds[e]) {
      bool p_reaches_t = std::find(cfg.succs[p].begin(), cfg.succs[p].end(), t) != cfg.succs[p].end();
      if (!p_reaches_t) continue;
      for (const auto& phi : tb.phis)
        if (!(*value_from(phi, cfg.labels[p]) == *value_from(phi, eb.label))) ok = false;
    }
    // Values named in the target's phis from e must be available in every predecessor.
    if (!ok) continue;
    const std::string e_label = eb.label;
    const std::string t_label = tb.label;
    std::vector<std::string> pred_labels;
    for (std::size_t p : cfg.preds[e]) pred_labels.push_back(cfg.labels[p]);
    Block& target = f.blocks[t];
    for (auto& phi : target.phis) {
      Operand v = *value_from(phi, e_label);
      std::size_t k = std::find(phi.labels.begin(), phi.labels.end(), e_label) - phi.labels.begin();
      phi.labels.erase(phi.labels.begin() + static_cast<std::ptrdiff_t>(k));
      phi.operands.erase(phi.operands.begin() + static_cast<std::ptrdiff_t>(k));
      // New incomings take the bypassed block's position.
      for (const auto& pl : pred_labels) {
        if (std::find(phi.labels.begin(), phi.labels.end(), pl) != phi.labels.end()) continue;
        phi.labels.insert(phi.labels.begin() + static_cast<std::ptrdiff_t>(k), pl);
        phi.operands.insert(phi.operands.begin() + static_cast<std::ptrdiff_t>(k), v);
        ++k;
      }
    }
    for (const auto& pl : pred_labels) retarget_terminator(*f.find_block(pl), e_label, t_label);
    f.blocks.erase(f.blocks.begin() + static_cast<std::ptrdiff_t>(e));
    ++st.jumps_folded;
    return true;
  }
  return false;
}

bool removable(const Instruction& i) {
  if (i.op == Opcode::Div) return i.operands[1].is_literal() && i.operands[1].literal != 0;
  return is_pure(i.op) || i.op == Opcode::Load || i.op == Opcode::Alloca;
}

bool remove_dead(Function& f, SimplifyStats& st) {
  std::unordered_map<std::string, std::size_t> uses;
  for_each_instruction(f, [&](const Block&, const Instruction& i) {
    for (const auto& op : i.operands)
      if (op.is_value()) ++uses[op.name];
  });
  bool changed = false;
  for (auto& b : f.blocks) {
    auto dead = [&](const Instruction& i) {
      if (i.result.empty() || !removable(i)) return false;
      auto it = uses.find(i.result);
      if (it == uses.end() || it->second == 0) return true;
      if (i.op != Opcode::Phi) return false;
      // A phi used only by itself is dead too.
      std::size_t self = 0;
      for (const auto& op : i.operands) self += op.refers_to(i.result);
      return it->second == self;
    };
    std::size_t before = b.phis.size() + b.body.size();
    std::erase_if(b.phis, dead);
    std::erase_if(b.body, dead);
    std::size_t removed = before - b.phis.size() - b.body.size();
    if (removed) {
      st.dead_removed += removed;
      changed = true;
    }
  }
  return changed;
}

}  // namespace

SimplifyStats simplify_cfg(Function& f) {
  SimplifyStats st;
  for (bool changed = true; changed;) {
    changed = false;
    changed |= remove_unreachable(f, st);
    changed |= fold_branches(f, st);
    changed |= remove_unreachable(f, st);
    changed |= remove_trivial_phis(f);
    while (merge_chains(f, st)) changed = true;
    while (fold_empty_jumps(f, st)) changed = true;
    changed |= remove_dead(f, st);
  }
  return st;
}

}  // namespace vnlcm
