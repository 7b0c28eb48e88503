#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "vnlcm/cfg.hpp"
#include "vnlcm/normalize.hpp"

namespace vnlcm {

namespace {

struct Slot {
  std::string name;
  std::set<std::size_t> def_blocks;
  std::set<std::size_t> use_blocks;
  std::vector<std::string> phis;  // per-block phi name, "" if none; indexed by block
  std::size_t index = 0;
};

bool address_use(const Instruction& i, std::size_t k) {
  return (i.op == Opcode::Load && k == 0) || (i.op == Opcode::Store && k == 1);
}

// Blocks where the slot's value is live on entry: upward-exposed loads,
// propagated backwards through blocks that do not store to the slot.
std::set<std::size_t> live_in_blocks(const Function& f, const CfgInfo& cfg, const Slot& s) {
  std::set<std::size_t> live;
  std::vector<std::size_t> work;
  for (std::size_t b : s.use_blocks) {
    if (!cfg.reachable(b)) continue;
    for (const auto& i : f.blocks[b].body) {
      if (i.op == Opcode::Store && i.operands[1].refers_to(s.name)) break;
      if (i.op == Opcode::Load && i.operands[0].refers_to(s.name)) {
        if (live.insert(b).second) work.push_back(b);
        break;
      }
    }
  }
  while (!work.empty()) {
    std::size_t b = work.back();
    work.pop_back();
    for (std::size_t p : cfg.preds[b]) {
      if (s.def_blocks.count(p)) continue;
      if (live.insert(p).second) work.push_back(p);
    }
  }
  return live;
}

}  // namespace

Mem2RegStats mem2reg_promote(Function& f, const std::unordered_set<std::string>* only) {
  Mem2RegStats st;
  CfgInfo cfg = analyze_cfg(f);
  const std::size_t n = f.blocks.size();

  // Candidate allocas and the reasons to reject them.
  std::map<std::string, Slot> slots;
  for (const auto& b : f.blocks)
    for (const auto& i : b.body)
      if (i.op == Opcode::Alloca && (!only || only->count(i.result))) slots[i.result].name = i.result;
  if (slots.empty()) return st;

  std::set<std::string> escaping;
  for (std::size_t bi = 0; bi < n; ++bi) {
    const Block& b = f.blocks[bi];
    auto scan = [&](const Instruction& i) {
      for (std::size_t k = 0; k < i.operands.size(); ++k) {
        const Operand& op = i.operands[k];
        if (!op.is_value()) continue;
        auto it = slots.find(op.name);
        if (it == slots.end()) continue;
        if (!address_use(i, k)) {
          escaping.insert(op.name);
          continue;
        }
        if (i.op == Opcode::Store) it->second.def_blocks.insert(bi);
        else it->second.use_blocks.insert(bi);
      }
    };
    for (const auto& i : b.phis) scan(i);
    for (const auto& i : b.body) scan(i);
    if (b.terminator) scan(*b.terminator);
  }
  for (const auto& e : escaping) slots.erase(e);
  if (slots.empty()) return st;

  std::vector<Slot*> order;
  for (auto& [name, s] : slots) {
    s.index = order.size();
    s.phis.assign(n, "");
    order.push_back(&s);
  }

  // Phi placement at the iterated dominance frontier, pruned by liveness.
  NameGen names(f);
  for (Slot* s : order) {
    auto live = live_in_blocks(f, cfg, *s);
    std::set<std::size_t> placed;
    std::vector<std::size_t> work;
    for (std::size_t b : s->def_blocks)
      if (cfg.reachable(b)) work.push_back(b);
    std::set<std::size_t> queued(work.begin(), work.end());
    while (!work.empty()) {
      std::size_t b = work.back();
      work.pop_back();
      for (std::size_t d : cfg.df[b]) {
        if (!live.count(d) || !placed.insert(d).second) continue;
        std::string phi_name = names.value(s->name + ".");
        s->phis[d] = phi_name;
        Instruction phi{phi_name, Opcode::Phi, CmpCode::Eq, {}, {}};
        f.blocks[d].phis.push_back(std::move(phi));
        ++st.phis_inserted;
        if (queued.insert(d).second) work.push_back(d);
      }
    }
  }

  // Renaming over the dominator tree.
  std::unordered_map<std::string, Operand> forward;
  auto resolve = [&](Operand op) {
    while (op.is_value()) {
      auto it = forward.find(op.name);
      if (it == forward.end()) break;
      op = it->second;
    }
    return op;
  };
  auto phi_by_name = [&](Block& b, const std::string& nm) -> Instruction* {
    for (auto& p : b.phis)
      if (p.result == nm) return &p;
    return nullptr;
  };

  std::vector<std::optional<Operand>> current(order.size());
  struct Frame {
    std::size_t block;
    std::size_t next_child;
    std::vector<std::optional<Operand>> saved;
  };
  std::vector<Frame> stack;
  auto enter = [&](std::size_t b) {
    stack.push_back({b, 0, current});
    Block& blk = f.blocks[b];
    for (Slot* s : order)
      if (!s->phis[b].empty()) current[s->index] = Operand::value(s->phis[b]);
    for (auto& inst : blk.body) {
      for (auto& op : inst.operands) op = resolve(op);
      if (inst.op == Opcode::Load && inst.operands[0].is_value()) {
        auto it = slots.find(inst.operands[0].name);
        if (it == slots.end()) continue;
        auto& cur = current[it->second.index];
        if (!cur) {
          st.diagnostics.push_back("load %" + inst.result + " of %" + it->first + " in " + blk.label +
                                   " has no reaching store; reads 0");
          cur = Operand::lit(0);
        }
        forward.emplace(inst.result, *cur);
      } else if (inst.op == Opcode::Store && inst.operands[1].is_value()) {
        auto it = slots.find(inst.operands[1].name);
        if (it == slots.end()) continue;
        current[it->second.index] = inst.operands[0];
      }
    }
    for (std::size_t succ : cfg.succs[b]) {
      Block& sb = f.blocks[succ];
      for (Slot* s : order) {
        if (s->phis[succ].empty()) continue;
        Instruction* phi = phi_by_name(sb, s->phis[succ]);
        phi->labels.push_back(blk.label);
        phi->operands.push_back(current[s->index] ? *current[s->index] : Operand::lit(0));
      }
    }
  };
  if (!cfg.rpo.empty()) {
    enter(cfg.rpo.front());
    while (!stack.empty()) {
      Frame& fr = stack.back();
      if (fr.next_child < cfg.dom_children[fr.block].size()) {
        std::size_t child = cfg.dom_children[fr.block][fr.next_child++];
        enter(child);
      } else {
        current = std::move(fr.saved);
        stack.pop_back();
      }
    }
  }

  // Phis in blocks with unreachable predecessors still need an entry per edge.
  for (std::size_t bi = 0; bi < n; ++bi) {
    if (cfg.reachable(bi)) continue;
    for (const auto& succ_label : f.blocks[bi].successors()) {
      Block& sb = *f.find_block(succ_label);
      std::size_t si = cfg.block(succ_label);
      for (Slot* s : order) {
        if (s->phis[si].empty()) continue;
        Instruction* phi = phi_by_name(sb, s->phis[si]);
        phi->labels.push_back(f.blocks[bi].label);
        phi->operands.push_back(Operand::lit(0));
      }
    }
  }

  // Delete promoted loads, stores and allocas; unreachable loads read 0.
  for (auto& blk : f.blocks) {
    std::vector<Instruction> kept;
    kept.reserve(blk.body.size());
    for (auto& inst : blk.body) {
      if (inst.op == Opcode::Alloca && slots.count(inst.result)) continue;
      if (inst.op == Opcode::Load && inst.operands[0].is_value() && slots.count(inst.operands[0].name)) {
        forward.emplace(inst.result, Operand::lit(0));  // no-op when already renamed
        ++st.loads_removed;
        continue;
      }
      if (inst.op == Opcode::Store && inst.operands[1].is_value() && slots.count(inst.operands[1].name)) {
        ++st.stores_removed;
        continue;
      }
      kept.push_back(std::move(inst));
    }
    blk.body = std::move(kept);
  }
  for_each_instruction(f, [&](Block&, Instruction& inst) {
    for (auto& op : inst.operands) op = resolve(op);
  });

  // Remove phis that merge a single value (ignoring self references).
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& blk : f.blocks) {
      for (std::size_t k = 0; k < blk.phis.size(); ++k) {
        Instruction& phi = blk.phis[k];
        bool inserted = false;
        for (Slot* s : order)
          if (std::find(s->phis.begin(), s->phis.end(), phi.result) != s->phis.end()) inserted = true;
        if (!inserted) continue;
        std::optional<Operand> same;
        bool unique = true;
        for (const auto& op : phi.operands) {
          if (op.refers_to(phi.result)) continue;
          if (!same) same = op;
          else if (!(*same == op)) unique = false;
        }
        if (!unique) continue;
        Operand repl = same ? *same : Operand::lit(0);
        std::string dead = phi.result;
        blk.phis.erase(blk.phis.begin() + static_cast<std::ptrdiff_t>(k));
        replace_all_uses(f, dead, repl);
        --st.phis_inserted;
        changed = true;
        break;
      }
      if (changed) break;
    }
  }

  st.promoted = order.size();
  return st;
}

}  // namespace vnlcm
