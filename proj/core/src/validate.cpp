#include "vnlcm/validate.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "vnlcm/cfg.hpp"
#include "vnlcm/printer.hpp"

namespace vnlcm {

namespace {

struct DefSite {
  std::size_t block;
  std::size_t pos;  // phis first, then body; kNoBlock for params
  Opcode op;
};

// Position index of an instruction within its block: phis, body, terminator.
constexpr std::size_t kTermPos = std::numeric_limits<std::size_t>::max() - 1;

bool expects_result(Opcode op) {
  return !(op == Opcode::Store || op == Opcode::Print || is_terminator(op));
}

std::size_t expected_operands(Opcode op) {
  switch (op) {
    case Opcode::Opaque:
    case Opcode::Alloca:
    case Opcode::Jmp:
      return 0;
    case Opcode::Const:
    case Opcode::Load:
    case Opcode::Print:
    case Opcode::Br:
    case Opcode::Ret:
      return 1;
    default:
      return 2;
  }
}

std::size_t expected_labels(Opcode op) {
  if (op == Opcode::Jmp) return 1;
  if (op == Opcode::Br) return 2;
  return 0;
}

}  // namespace

std::vector<std::string> validate(const Function& f) {
  std::vector<std::string> diags;
  const std::string where = "@" + f.name;
  if (f.blocks.empty()) {
    diags.push_back("function " + where + " has no blocks");
    return diags;
  }

  std::unordered_set<std::string> labels;
  for (const auto& b : f.blocks)
    if (!labels.insert(b.label).second) diags.push_back("duplicate label " + b.label + " in " + where);

  bool structure_ok = true;
  for (const auto& b : f.blocks) {
    const std::string at = where + ":" + b.label;
    if (!b.terminator) {
      diags.push_back("no terminator in " + at);
      structure_ok = false;
    } else if (!is_terminator(b.terminator->op)) {
      diags.push_back("last instruction is not a terminator in " + at);
      structure_ok = false;
    }
    for (const auto& p : b.phis)
      if (p.op != Opcode::Phi) diags.push_back("non-phi in phi section of " + at + ": " + print_instruction(p));
    for (const auto& i : b.body)
      if (i.op == Opcode::Phi || is_terminator(i.op))
        diags.push_back("misplaced " + std::string(opcode_name(i.op)) + " in body of " + at);
  }

  for_each_instruction(f, [&](const Block& b, const Instruction& i) {
    const std::string at = where + ":" + b.label;
    if (expects_result(i.op) == i.result.empty())
      diags.push_back("bad result for " + std::string(opcode_name(i.op)) + " in " + at);
    if (i.op == Opcode::Phi) {
      if (i.operands.empty() || i.labels.size() != i.operands.size())
        diags.push_back("malformed phi %" + i.result + " in " + at);
    } else {
      if (i.operands.size() != expected_operands(i.op) || i.labels.size() != expected_labels(i.op))
        diags.push_back("operand count mismatch in " + at + ": " + print_instruction(i));
    }
    if (i.op == Opcode::Const && (i.operands.size() != 1 || !i.operands[0].is_literal()))
      diags.push_back("const needs a literal in " + at);
    for (const auto& l : i.labels)
      if (!labels.count(l)) {
        diags.push_back("unknown label " + l + " in " + at);
        structure_ok = false;
      }
  });
  if (!structure_ok) return diags;

  // Definitions.
  std::unordered_map<std::string, DefSite> defs;
  std::unordered_set<std::string> params;
  for (const auto& p : f.params)
    if (!params.insert(p).second) diags.push_back("duplicate parameter %" + p + " in " + where);
  for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
    const Block& b = f.blocks[bi];
    std::size_t pos = 0;
    auto def = [&](const Instruction& i) {
      if (!i.result.empty()) {
        if (params.count(i.result) || !defs.emplace(i.result, DefSite{bi, pos, i.op}).second)
          diags.push_back("duplicate definition of %" + i.result + " in " + where);
      }
      ++pos;
    };
    for (const auto& i : b.phis) def(i);
    for (const auto& i : b.body) def(i);
  }

  CfgInfo cfg = analyze_cfg(f);

  // Entry has no predecessors; phi incoming sets match predecessor sets.
  std::vector<std::set<std::string>> structural_preds(f.blocks.size());
  for (const auto& b : f.blocks)
    for (const auto& s : b.successors()) structural_preds[cfg.block(s)].insert(b.label);
  if (!structural_preds[0].empty()) diags.push_back("entry block " + f.blocks[0].label + " of " + where + " has predecessors");
  for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
    const Block& b = f.blocks[bi];
    for (const auto& phi : b.phis) {
      std::set<std::string> incoming(phi.labels.begin(), phi.labels.end());
      if (incoming.size() != phi.labels.size())
        diags.push_back("phi %" + phi.result + " lists an incoming block twice in " + where + ":" + b.label);
      if (incoming != structural_preds[bi])
        diags.push_back("phi %" + phi.result + " incoming labels do not match predecessors of " + where + ":" +
                        b.label);
    }
  }

  // Uses.
  for (std::size_t bi = 0; bi < f.blocks.size(); ++bi) {
    const Block& b = f.blocks[bi];
    std::size_t pos = 0;
    auto check = [&](const Instruction& i, std::size_t use_pos) {
      const std::string at = where + ":" + b.label;
      for (std::size_t k = 0; k < i.operands.size(); ++k) {
        const Operand& op = i.operands[k];
        if (op.is_literal()) continue;
        if (op.is_param()) {
          if (!params.count(op.name)) diags.push_back("unknown parameter %" + op.name + " in " + at);
          continue;
        }
        auto it = defs.find(op.name);
        if (it == defs.end()) {
          diags.push_back("use of undefined %" + op.name + " in " + at);
          continue;
        }
        const DefSite& d = it->second;
        bool is_address = (i.op == Opcode::Load && k == 0) || (i.op == Opcode::Store && k == 1);
        if (is_address && d.op != Opcode::Alloca)
          diags.push_back("memory access through non-alloca %" + op.name + " in " + at);
        if (i.op == Opcode::Phi) {
          std::size_t from = cfg.index.count(i.labels[k]) ? cfg.block(i.labels[k]) : kNoBlock;
          if (from == kNoBlock || !cfg.reachable(from)) continue;
          if (!cfg.dominates(d.block, from))
            diags.push_back("dominance violation at " + at + ": %" + op.name + " does not reach edge from " +
                            i.labels[k]);
          continue;
        }
        if (!cfg.reachable(bi)) continue;
        bool ok = d.block == bi ? d.pos < use_pos : cfg.dominates(d.block, bi);
        if (!ok) diags.push_back("dominance violation at " + at + ": %" + op.name + " used before definition");
      }
    };
    for (const auto& i : b.phis) check(i, pos++);
    for (const auto& i : b.body) check(i, pos++);
    if (b.terminator) check(*b.terminator, kTermPos);
  }
  return diags;
}

std::vector<std::string> validate(const Module& m) {
  std::vector<std::string> diags;
  std::unordered_set<std::string> names;
  for (const auto& f : m.functions) {
    if (!names.insert(f.name).second) diags.push_back("duplicate function @" + f.name);
    auto d = validate(f);
    diags.insert(diags.end(), d.begin(), d.end());
  }
  return diags;
}

}  // namespace vnlcm
