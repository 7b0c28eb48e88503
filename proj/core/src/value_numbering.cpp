#include "vnlcm/value_numbering.hpp"

#include <sstream>
#include <unordered_set>

namespace vnlcm {

ValueNumber ValueTable::of_name(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? kNoValue : it->second;
}

ValueNumber ValueTable::of_literal(std::int64_t v) const {
  auto it = by_literal_.find(v);
  return it == by_literal_.end() ? kNoValue : it->second;
}

ValueNumber ValueTable::of(const Operand& op) const {
  return op.is_literal() ? of_literal(op.literal) : of_name(op.name);
}

std::optional<std::int64_t> ValueTable::constant(ValueNumber vn) const {
  if (vn == kNoValue || vn >= values_.size()) return std::nullopt;
  const ValueInfo& vi = values_[vn];
  if (vi.kind != ValueInfo::Kind::Constant) return std::nullopt;
  return vi.constant;
}

const std::string* ValueTable::leader_of(ValueNumber vn) const {
  if (vn == kNoValue || vn >= values_.size()) return nullptr;
  const Occurrence* l = values_[vn].leader();
  return l ? &l->name : nullptr;
}

ValueNumber ValueTable::fresh_root(const std::string& name) {
  ValueInfo vi;
  vi.kind = ValueInfo::Kind::Root;
  vi.root = name;
  values_.push_back(std::move(vi));
  return max_vn();
}

ValueNumber ValueTable::literal(std::int64_t v) {
  auto [it, inserted] = by_literal_.emplace(v, kNoValue);
  if (inserted) {
    ValueInfo vi;
    vi.kind = ValueInfo::Kind::Constant;
    vi.constant = v;
    values_.push_back(std::move(vi));
    it->second = max_vn();
  }
  return it->second;
}

ValueNumber ValueTable::expression(const ExprKey& key, bool& existed) {
  auto [it, inserted] = by_expr_.emplace(key, kNoValue);
  existed = !inserted;
  if (inserted) {
    ValueInfo vi;
    vi.kind = ValueInfo::Kind::Expression;
    vi.expr = key;
    values_.push_back(std::move(vi));
    it->second = max_vn();
  }
  return it->second;
}

namespace {

class Numbering {
 public:
  Numbering(Function& f, const VnOptions& opts, VnStats& st) : f_(f), opts_(opts), st_(st) {}

  ValueTable run(const CfgInfo& cfg) {
    for (const auto& p : f_.params) vt_.bind(p, vt_.fresh_root(p));
    for (std::size_t b : cfg.rpo) {
      Block& blk = f_.blocks[b];
      for (auto& phi : blk.phis) number_phi(phi);
      for (auto& inst : blk.body) number(inst, b);
      if (blk.terminator)
        for (auto& op : blk.terminator->operands) op = resolve(op);
    }
    // Back-edge phi operands and unreachable code may still name deleted values.
    for_each_instruction(f_, [&](Block&, Instruction& inst) {
      for (auto& op : inst.operands) op = resolve(op);
    });
    for (auto& blk : f_.blocks)
      std::erase_if(blk.body, [&](const Instruction& i) { return doomed_.count(i.result) > 0; });
    return std::move(vt_);
  }

 private:
  Operand resolve(Operand op) const {
    while (op.is_value()) {
      auto it = forward_.find(op.name);
      if (it == forward_.end()) break;
      op = it->second;
    }
    return op;
  }

  ValueNumber vn(const Operand& op) { return op.is_literal() ? vt_.literal(op.literal) : vt_.of_name(op.name); }

  void number_phi(Instruction& phi) {
    ValueNumber common = kNoValue;
    bool same = opts_.phi_merge;
    for (auto& op : phi.operands) {
      op = resolve(op);
      ValueNumber v = vn(op);
      if (v == kNoValue || (common != kNoValue && v != common)) same = false;
      if (common == kNoValue) common = v;
    }
    if (same && common != kNoValue) {
      vt_.bind(phi.result, common);
      ++st_.phis_merged;
    } else {
      vt_.bind(phi.result, vt_.fresh_root(phi.result));
    }
  }

  void number(Instruction& inst, std::size_t block) {
    for (auto& op : inst.operands) op = resolve(op);
    switch (inst.op) {
      case Opcode::Const:
        vt_.bind(inst.result, vt_.literal(inst.operands[0].literal));
        return;
      case Opcode::Opaque:
      case Opcode::Load:
      case Opcode::Alloca:
        vt_.bind(inst.result, vt_.fresh_root(inst.result));
        return;
      case Opcode::Store:
      case Opcode::Print:
        return;
      default:
        break;
    }
    if (!is_candidate(inst.op)) return;

    if (auto repl = simplify(inst)) {
      vt_.bind(inst.result, vn(*repl));
      forward_.emplace(inst.result, *repl);
      doomed_.insert(inst.result);
      return;
    }

    ExprKey key{inst.op, inst.op == Opcode::Cmp ? inst.cc : CmpCode::Eq, vn(inst.operands[0]),
                vn(inst.operands[1])};
    if (is_commutative(inst.op, inst.cc) && key.lhs > key.rhs) {
      std::swap(key.lhs, key.rhs);
      if (opts_.canonicalize) {
        std::swap(inst.operands[0], inst.operands[1]);
        ++st_.canonicalized;
      }
    }
    bool existed = false;
    ValueNumber v = vt_.expression(key, existed);
    vt_.bind(inst.result, v);
    vt_.info(v).occurrences.push_back({inst.result, block});
  }

  std::optional<Operand> simplify(const Instruction& inst) {
    const Operand& lhs = inst.operands[0];
    const Operand& rhs = inst.operands[1];
    const ValueNumber l = vn(lhs);
    const ValueNumber r = vn(rhs);
    const auto cl = vt_.constant(l);
    const auto cr = vt_.constant(r);

    if (opts_.fold_constants && cl && cr) {
      if (auto v = evaluate(inst.op, inst.cc, *cl, *cr)) {
        ++st_.folded;
        return Operand::lit(*v);
      }
    }

    if (opts_.forced_results && l != kNoValue && l == r) {
      std::optional<Operand> out;
      if (inst.op == Opcode::And || inst.op == Opcode::Or) out = lhs;
      if (inst.op == Opcode::Cmp && inst.cc == CmpCode::Eq) out = Operand::lit(1);
      if (inst.op == Opcode::Cmp && inst.cc == CmpCode::Ne) out = Operand::lit(0);
      if (out) {
        ++st_.forced;
        return out;
      }
    }

    if (opts_.identities) {
      auto is = [](const std::optional<std::int64_t>& c, std::int64_t v) { return c && *c == v; };
      std::optional<Operand> out;
      switch (inst.op) {
        case Opcode::Add:
        case Opcode::Or:
        case Opcode::Xor:
          if (is(cr, 0)) out = lhs;
          else if (is(cl, 0)) out = rhs;
          break;
        case Opcode::Sub:
          if (is(cr, 0)) out = lhs;
          break;
        case Opcode::Mul:
          if (is(cr, 0) || is(cl, 0)) out = Operand::lit(0);
          else if (is(cr, 1)) out = lhs;
          else if (is(cl, 1)) out = rhs;
          break;
        case Opcode::Div:
          if (is(cr, 1)) out = lhs;
          break;
        case Opcode::And:
          if (is(cr, 0) || is(cl, 0)) out = Operand::lit(0);
          break;
        default:
          break;
      }
      if (out) {
        ++st_.simplified;
        return out;
      }
    }
    return std::nullopt;
  }

  Function& f_;
  const VnOptions& opts_;
  VnStats& st_;
  ValueTable vt_;
  std::unordered_map<std::string, Operand> forward_;
  std::unordered_set<std::string> doomed_;
};

}  // namespace

ValueTable assign_value_numbers(Function& f, const CfgInfo& cfg, const VnOptions& opts, VnStats* stats) {
  VnStats local;
  ValueTable vt = Numbering(f, opts, stats ? *stats : local).run(cfg);
  return vt;
}

VnStats reassociate(Function& f) {
  VnOptions opts;
  opts.forced_results = false;
  opts.phi_merge = false;
  opts.canonicalize = true;
  VnStats st;
  assign_value_numbers(f, analyze_cfg(f), opts, &st);
  return st;
}

std::string dump_value_numbers(const Function& f, const ValueTable& vt) {
  std::ostringstream os;
  os << "@" << f.name << " max_vn=" << vt.max_vn() << '\n';
  for (const auto& p : f.params) os << "  param %" << p << " vn=" << vt.of_name(p) << '\n';
  for (const auto& b : f.blocks) {
    os << "  " << b.label << ":\n";
    auto line = [&](const Instruction& i) {
      if (i.result.empty()) return;
      ValueNumber v = vt.of_name(i.result);
      os << "    %" << i.result << " vn=" << v;
      if (v != kNoValue && is_candidate(i.op)) {
        const ValueInfo& vi = vt.info(v);
        const std::string* lead = vt.leader_of(v);
        if (lead && *lead == i.result) os << " leader";
        else if (lead) os << " leader=%" << *lead;
        os << " occurrences=" << vi.occurrences.size();
      }
      os << '\n';
    };
    for (const auto& i : b.phis) line(i);
    for (const auto& i : b.body) line(i);
  }
  return os.str();
}

}  // namespace vnlcm
