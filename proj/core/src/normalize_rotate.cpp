#include <algorithm>
#include <map>
#include <unordered_map>

#include "vnlcm/cfg.hpp"
#include "vnlcm/loops.hpp"
#include "vnlcm/normalize.hpp"

namespace vnlcm {

namespace {

struct Shape {
  std::size_t header;
  std::size_t outside_pred;
  std::string body_target;
  std::string exit_target;
};

std::optional<Shape> rotatable(const Function& f, const CfgInfo& cfg, const Loop& loop, std::string& why) {
  const Block& h = f.blocks[loop.header];
  if (!h.terminator || h.terminator->op != Opcode::Br) {
    why = "header does not end in a conditional branch";
    return std::nullopt;
  }
  const std::string& t = h.terminator->labels[0];
  const std::string& e = h.terminator->labels[1];
  bool t_in = loop.contains(cfg.block(t));
  bool e_in = loop.contains(cfg.block(e));
  if (t_in == e_in) {
    why = "header does not exit the loop";
    return std::nullopt;
  }
  Shape s;
  s.header = loop.header;
  s.body_target = t_in ? t : e;
  s.exit_target = t_in ? e : t;
  if (s.body_target == h.label) {
    why = "header is its own latch";
    return std::nullopt;
  }
  for (const auto& i : h.body) {
    if (!is_pure(i.op)) {
      why = "header contains side-effecting instruction " + std::string(opcode_name(i.op));
      return std::nullopt;
    }
  }
  std::vector<std::size_t> outside;
  for (std::size_t p : cfg.preds[loop.header])
    if (!loop.contains(p)) outside.push_back(p);
  if (outside.size() != 1) {
    why = "header has " + std::to_string(outside.size()) + " predecessors outside the loop";
    return std::nullopt;
  }
  s.outside_pred = outside.front();
  return s;
}

Operand incoming_from(const Instruction& phi, const std::string& label) {
  for (std::size_t k = 0; k < phi.labels.size(); ++k)
    if (phi.labels[k] == label) return phi.operands[k];
  return Operand::lit(0);
}

std::size_t block_index(const Function& f, const std::string& label) {
  for (std::size_t k = 0; k < f.blocks.size(); ++k)
    if (f.blocks[k].label == label) return k;
  return kNoBlock;
}

void rotate(Function& f, const Shape& s, NameGen& names, std::unordered_set<std::string>& temps) {
  const std::string h_label = f.blocks[s.header].label;
  const std::string p_label = f.blocks[s.outside_pred].label;
  const std::string g_label = names.label(h_label + ".guard.");
  const std::string ph_label = names.label(h_label + ".ph.");

  // Values defined in the header are about to lose dominance over the loop
  // body and exit; route uses outside the header through temporary slots.
  std::vector<std::string> defs;
  {
    const Block& h = f.blocks[s.header];
    for (const auto& i : h.phis) defs.push_back(i.result);
    for (const auto& i : h.body) defs.push_back(i.result);
  }
  std::unordered_map<std::string, std::string> slot_of;
  for (const auto& d : defs) {
    bool outside_use = false;
    for (const auto& b : f.blocks) {
      if (b.label == h_label) continue;
      auto uses = [&](const Instruction& i, bool phi) {
        for (std::size_t k = 0; k < i.operands.size(); ++k)
          if (i.operands[k].refers_to(d) && !(phi && i.labels[k] == h_label)) return true;
        return false;
      };
      for (const auto& i : b.phis) outside_use |= uses(i, true);
      for (const auto& i : b.body) outside_use |= uses(i, false);
      if (b.terminator) outside_use |= uses(*b.terminator, false);
    }
    if (outside_use) slot_of[d] = names.value(d + ".rot.");
  }

  for (auto& b : f.blocks) {
    if (b.label == h_label) continue;
    std::vector<Instruction> body;
    auto load_for = [&](Operand& op, std::vector<Instruction>& out) {
      if (!op.is_value()) return;
      auto it = slot_of.find(op.name);
      if (it == slot_of.end()) return;
      std::string v = names.value(op.name + ".ld.");
      out.push_back(Instruction{v, Opcode::Load, CmpCode::Eq, {Operand::value(it->second)}, {}});
      op = Operand::value(v);
    };
    for (auto& i : b.body) {
      for (auto& op : i.operands) load_for(op, body);
      body.push_back(std::move(i));
    }
    if (b.terminator)
      for (auto& op : b.terminator->operands) load_for(op, body);
    b.body = std::move(body);
  }
  // Phi uses load at the end of the incoming block.
  for (auto& b : f.blocks) {
    for (auto& phi : b.phis) {
      for (std::size_t k = 0; k < phi.operands.size(); ++k) {
        Operand& op = phi.operands[k];
        if (!op.is_value() || phi.labels[k] == h_label) continue;
        auto it = slot_of.find(op.name);
        if (it == slot_of.end()) continue;
        Block* from = f.find_block(phi.labels[k]);
        std::string v = names.value(op.name + ".ld.");
        from->body.push_back(Instruction{v, Opcode::Load, CmpCode::Eq, {Operand::value(it->second)}, {}});
        op = Operand::value(v);
      }
    }
  }

  Block& h = f.blocks[s.header];
  // Guard: the header's computation for the first trip, fed by the outside incoming values.
  std::unordered_map<std::string, Operand> subst;
  Block guard;
  guard.label = g_label;
  for (const auto& phi : h.phis) {
    Operand v = incoming_from(phi, p_label);
    subst[phi.result] = v;
    if (auto it = slot_of.find(phi.result); it != slot_of.end())
      guard.body.push_back(Instruction{{}, Opcode::Store, CmpCode::Eq, {v, Operand::value(it->second)}, {}});
  }
  auto mapped = [&](Operand op) {
    if (op.is_value())
      if (auto it = subst.find(op.name); it != subst.end()) return it->second;
    return op;
  };
  for (const auto& i : h.body) {
    Instruction c = i;
    c.result = names.value(i.result + ".g.");
    for (auto& op : c.operands) op = mapped(op);
    subst[i.result] = Operand::value(c.result);
    guard.body.push_back(c);
    if (auto it = slot_of.find(i.result); it != slot_of.end())
      guard.body.push_back(
          Instruction{{}, Opcode::Store, CmpCode::Eq, {Operand::value(c.result), Operand::value(it->second)}, {}});
  }
  Instruction gterm = *h.terminator;
  for (auto& op : gterm.operands) op = mapped(op);
  for (auto& l : gterm.labels)
    if (l == s.body_target) l = ph_label;
  guard.terminator = gterm;

  // Header stores for the slots, then drop the outside incoming from its phis.
  {
    std::vector<Instruction> body;
    for (const auto& phi : h.phis)
      if (auto it = slot_of.find(phi.result); it != slot_of.end())
        body.push_back(
            Instruction{{}, Opcode::Store, CmpCode::Eq, {Operand::value(phi.result), Operand::value(it->second)}, {}});
    for (auto& i : h.body) {
      std::string r = i.result;
      body.push_back(std::move(i));
      if (auto it = slot_of.find(r); it != slot_of.end())
        body.push_back(Instruction{{}, Opcode::Store, CmpCode::Eq, {Operand::value(r), Operand::value(it->second)}, {}});
    }
    h.body = std::move(body);
    for (auto& phi : h.phis) {
      for (std::size_t k = 0; k < phi.labels.size();) {
        if (phi.labels[k] == p_label) {
          phi.labels.erase(phi.labels.begin() + static_cast<std::ptrdiff_t>(k));
          phi.operands.erase(phi.operands.begin() + static_cast<std::ptrdiff_t>(k));
        } else {
          ++k;
        }
      }
    }
  }

  // Body target and exit receive the new edges.
  for (auto& phi : f.find_block(s.body_target)->phis) {
    phi.labels.push_back(ph_label);
    phi.operands.push_back(mapped(incoming_from(phi, h_label)));
  }
  for (auto& phi : f.find_block(s.exit_target)->phis) {
    phi.labels.push_back(g_label);
    phi.operands.push_back(mapped(incoming_from(phi, h_label)));
  }
  retarget_terminator(*f.find_block(p_label), h_label, g_label);

  Block pre;
  pre.label = ph_label;
  pre.terminator = Instruction{{}, Opcode::Jmp, CmpCode::Eq, {}, {s.body_target}};

  Block& entry = f.blocks.front();
  std::vector<Instruction> allocas;
  for (const auto& d : defs)
    if (auto it = slot_of.find(d); it != slot_of.end()) {
      allocas.push_back(Instruction{it->second, Opcode::Alloca, CmpCode::Eq, {}, {}});
      temps.insert(it->second);
    }
  entry.body.insert(entry.body.begin(), allocas.begin(), allocas.end());

  std::size_t at = block_index(f, h_label);
  f.blocks.insert(f.blocks.begin() + static_cast<std::ptrdiff_t>(at), std::move(pre));
  f.blocks.insert(f.blocks.begin() + static_cast<std::ptrdiff_t>(at), std::move(guard));
}

}  // namespace

RotateStats rotate_loops(Function& f) {
  RotateStats st;
  std::vector<std::pair<unsigned, std::string>> headers;
  {
    CfgInfo cfg = analyze_cfg(f);
    LoopInfo li = find_natural_loops(f, cfg);
    for (const auto& d : li.diagnostics) st.diagnostics.push_back(d);
    for (const auto& l : li.loops) headers.emplace_back(li.loop_depth[l.header], cfg.labels[l.header]);
  }
  std::stable_sort(headers.begin(), headers.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  NameGen names(f);
  for (const auto& [depth, label] : headers) {
    CfgInfo cfg = analyze_cfg(f);
    LoopInfo li = find_natural_loops(f, cfg);
    std::size_t hi = cfg.block(label);
    const Loop* loop = hi == kNoBlock ? nullptr : li.loop_with_header(hi);
    if (!loop) continue;
    std::string why;
    auto shape = rotatable(f, cfg, *loop, why);
    if (!shape) {
      st.diagnostics.push_back("loop at " + label + " in @" + f.name + " not rotated: " + why);
      continue;
    }
    std::unordered_set<std::string> temps;
    rotate(f, *shape, names, temps);
    if (!temps.empty()) mem2reg_promote(f, &temps);
    ++st.rotated;
  }
  return st;
}

}  // namespace vnlcm
