#include "vnlcm/pre.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vnlcm/normalize.hpp"

namespace vnlcm {

std::optional<std::size_t> SlotMap::slot(ValueNumber vn) const {
  auto it = slot_of.find(vn);
  if (it == slot_of.end()) return std::nullopt;
  return it->second;
}

SlotMap allocate_slots(const ValueTable& vt, const LoopInfo& li) {
  SlotMap sm;
  for (ValueNumber vn = 1; vn <= vt.max_vn(); ++vn) {
    const ValueInfo& vi = vt.info(vn);
    if (vi.kind != ValueInfo::Kind::Expression) continue;
    const auto& occ = vi.occurrences;
    bool wanted = occ.size() >= 2 || (occ.size() == 1 && li.in_loop(occ.front().block));
    if (!wanted) continue;
    if (vi.expr.op == Opcode::Div) {
      auto divisor = vt.constant(vi.expr.rhs);
      if (!divisor || *divisor == 0) continue;
    }
    sm.slot_of[vn] = sm.vn_of_slot.size();
    sm.vn_of_slot.push_back(vn);
  }
  return sm;
}

namespace {

// Block index of every definition (parameters are absent).
std::unordered_map<std::string, std::size_t> definition_blocks(const Function& f) {
  std::unordered_map<std::string, std::size_t> defs;
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    for (const auto& i : f.blocks[b].phis) defs[i.result] = b;
    for (const auto& i : f.blocks[b].body)
      if (!i.result.empty()) defs[i.result] = b;
  }
  return defs;
}

const Instruction* find_instruction(const Function& f, std::size_t block, const std::string& name) {
  for (const auto& i : f.blocks[block].body)
    if (i.result == name) return &i;
  return nullptr;
}

}  // namespace

LocalProperties compute_local_properties(const Function& f, const CfgInfo& cfg, const ValueTable& vt,
                                         const SlotMap& sm) {
  const std::size_t n = cfg.size();
  const std::size_t w = sm.width();
  LocalProperties lp;
  lp.transp.assign(n, BitVector::universe(w));
  lp.antloc.assign(n, BitVector::empty(w));
  lp.xcomp.assign(n, BitVector::empty(w));
  auto defs = definition_blocks(f);

  for (std::size_t s = 0; s < w; ++s) {
    const ValueInfo& vi = vt.info(sm.vn_of_slot[s]);
    const Occurrence* lead = vi.leader();
    const Instruction* li = find_instruction(f, lead->block, lead->name);
    for (const auto& op : li->operands) {
      if (!op.is_value()) continue;
      auto it = defs.find(op.name);
      if (it != defs.end()) lp.transp[it->second].reset(s);
    }
    for (const auto& o : vi.occurrences) {
      if (lp.transp[o.block].test(s))
        lp.antloc[o.block].set(s);
      else
        lp.xcomp[o.block].set(s);
    }
  }
  return lp;
}

DataflowSpec ant_spec(const LocalProperties& lp, std::size_t width) {
  DataflowSpec s;
  s.name = "ANT";
  s.direction = Direction::Backward;
  s.meet = Meet::Intersection;
  s.width = width;
  s.alpha = [&lp](std::size_t b) { return lp.xcomp[b]; };
  s.beta = [](std::size_t b, const Solution& sol) { return sol.in[b]; };
  s.gamma = [&lp](std::size_t b, const Solution& sol) { return (lp.transp[b] & sol.out[b]) | lp.antloc[b]; };
  s.bottom = BitVector::empty(width);
  s.top = BitVector::universe(width);
  return s;
}

DataflowSpec avail_spec(const LocalProperties& lp, std::size_t width) {
  DataflowSpec s;
  s.name = "AVAIL";
  s.direction = Direction::Forward;
  s.meet = Meet::Intersection;
  s.width = width;
  s.beta = [&lp](std::size_t b, const Solution& sol) { return lp.xcomp[b] | sol.out[b]; };
  s.gamma = [&lp](std::size_t b, const Solution& sol) { return (lp.antloc[b] | sol.in[b]) & lp.transp[b]; };
  s.bottom = BitVector::empty(width);
  s.top = BitVector::universe(width);
  return s;
}

DataflowSpec delay_spec(const LocalProperties& lp, const std::vector<BitVector>& earlin,
                        const std::vector<BitVector>& earlout, std::size_t width) {
  DataflowSpec s;
  s.name = "DELAY";
  s.direction = Direction::Forward;
  s.meet = Meet::Intersection;
  s.width = width;
  s.alpha = [&earlin](std::size_t b) { return earlin[b]; };
  s.beta = [&lp](std::size_t b, const Solution& sol) { return ~lp.xcomp[b] & sol.out[b]; };
  s.gamma = [&lp, &earlout](std::size_t b, const Solution& sol) {
    return (sol.in[b] & ~lp.antloc[b]) | earlout[b];
  };
  s.bottom = BitVector::empty(width);
  s.top = BitVector::universe(width);
  return s;
}

DataflowSpec iso_spec(const LocalProperties& lp, const std::vector<BitVector>& earlin,
                      const std::vector<BitVector>& earlout, std::size_t width) {
  DataflowSpec s;
  s.name = "ISO";
  s.direction = Direction::Backward;
  s.meet = Meet::Intersection;
  s.width = width;
  s.beta = [&lp, &earlin](std::size_t b, const Solution& sol) { return (~lp.antloc[b] & sol.in[b]) | earlin[b]; };
  s.gamma = [&earlout](std::size_t b, const Solution& sol) { return earlout[b] | sol.out[b]; };
  s.bottom = BitVector::universe(width);
  s.top = BitVector::universe(width);
  return s;
}

std::vector<std::pair<std::string, const std::vector<BitVector>*>> LcmSets::named() const {
  return {{"TRANSP", &transp},       {"ANTLOC", &antloc},       {"XCOMP", &xcomp},
          {"ANTIN", &antin},         {"ANTOUT", &antout},       {"AVAILIN", &availin},
          {"AVAILOUT", &availout},   {"EARLIN", &earlin},       {"EARLOUT", &earlout},
          {"DELAYIN", &delayin},     {"DELAYOUT", &delayout},   {"LATESTIN", &latestin},
          {"LATESTOUT", &latestout}, {"ISOIN", &isoin},         {"ISOOUT", &isoout},
          {"INSERTIN", &insertin},   {"INSERTOUT", &insertout}, {"REPLACEIN", &replacein},
          {"REPLACEOUT", &replaceout}};
}

const std::vector<BitVector>* LcmSets::find(std::string_view name) const {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (const auto& [n, v] : named())
    if (n == upper) return v;
  return nullptr;
}

LcmSets run_lcm_analyses(const CfgInfo& cfg, const LocalProperties& lp, std::size_t width, WorklistOrder order) {
  const std::size_t n = cfg.size();
  LcmSets s;
  s.width = width;
  s.transp = lp.transp;
  s.antloc = lp.antloc;
  s.xcomp = lp.xcomp;

  Solution ant = solve(cfg, ant_spec(lp, width), order);
  s.antin = ant.in;
  s.antout = ant.out;
  Solution avail = solve(cfg, avail_spec(lp, width), order);
  s.availin = avail.in;
  s.availout = avail.out;

  s.earlin.assign(n, BitVector::empty(width));
  s.earlout.assign(n, BitVector::empty(width));
  for (std::size_t b = 0; b < n; ++b) {
    BitVector acc = BitVector::universe(width);
    for (std::size_t p : cfg.preds[b]) acc &= ~(s.availout[p] | s.antout[p]);
    s.earlin[b] = s.antin[b] & acc;
    s.earlout[b] = s.antout[b] & ~lp.transp[b];
  }

  Solution delay = solve(cfg, delay_spec(lp, s.earlin, s.earlout, width), order);
  s.delayin = delay.in;
  s.delayout = delay.out;

  s.latestin.assign(n, BitVector::empty(width));
  s.latestout.assign(n, BitVector::empty(width));
  for (std::size_t b = 0; b < n; ++b) {
    s.latestin[b] = s.delayin[b] & lp.antloc[b];
    BitVector acc = BitVector::empty(width);
    for (std::size_t x : cfg.succs[b]) acc |= ~s.delayin[x];
    s.latestout[b] = s.delayout[b] & (lp.xcomp[b] | acc);
  }

  Solution iso = solve(cfg, iso_spec(lp, s.earlin, s.earlout, width), order);
  s.isoin = iso.in;
  s.isoout = iso.out;

  s.insertin.resize(n);
  s.insertout.resize(n);
  s.replacein.resize(n);
  s.replaceout.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    s.insertin[b] = s.latestin[b] & ~s.isoin[b];
    s.insertout[b] = s.latestout[b] & ~s.isoout[b];
    s.replacein[b] = lp.antloc[b] & ~(s.latestin[b] & s.isoin[b]);
    s.replaceout[b] = lp.xcomp[b] & ~(s.latestout[b] & s.isoout[b]);
  }
  s.solver_visits = ant.visits + avail.visits + delay.visits + iso.visits;

  std::vector<BitVector>* families[] = {&s.transp,   &s.antloc,    &s.xcomp,    &s.antin,     &s.antout,
                                        &s.availin,  &s.availout,  &s.earlin,   &s.earlout,   &s.delayin,
                                        &s.delayout, &s.latestin,  &s.latestout, &s.isoin,    &s.isoout,
                                        &s.insertin, &s.insertout, &s.replacein, &s.replaceout};
  for (std::size_t b = 0; b < n; ++b) {
    if (cfg.reachable(b)) continue;
    for (auto* family : families) (*family)[b] = BitVector::empty(width);
  }
  return s;
}

std::size_t local_cse(Function& f, ValueTable& vt) {
  std::size_t removed = 0;
  std::unordered_map<std::string, Operand> forward;
  std::set<std::string> gone;
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    std::unordered_map<ValueNumber, std::string> first;
    std::vector<Instruction> kept;
    for (auto& i : f.blocks[b].body) {
      if (is_candidate(i.op)) {
        ValueNumber vn = vt.of_name(i.result);
        if (vn != kNoValue) {
          auto [it, fresh] = first.emplace(vn, i.result);
          if (!fresh) {
            forward.emplace(i.result, Operand::value(it->second));
            gone.insert(i.result);
            ++removed;
            continue;
          }
        }
      }
      kept.push_back(std::move(i));
    }
    f.blocks[b].body = std::move(kept);
  }
  if (!removed) return 0;
  for_each_instruction(f, [&](Block&, Instruction& inst) {
    for (auto& op : inst.operands)
      if (op.is_value())
        if (auto it = forward.find(op.name); it != forward.end()) op = it->second;
  });
  for (ValueNumber vn = 1; vn <= vt.max_vn(); ++vn)
    std::erase_if(vt.info(vn).occurrences, [&](const Occurrence& o) { return gone.count(o.name) > 0; });
  return removed;
}

std::string_view insert_pos_name(InsertPos p) {
  switch (p) {
    case InsertPos::EntryAfterPhis: return "entry-after-phis";
    case InsertPos::BeforeTerminator: return "before-terminator";
    case InsertPos::AtOccurrence: return "at-occurrence";
  }
  return "?";
}

namespace {

struct DefSite {
  std::size_t block;
  bool phi;
};

std::unordered_map<std::string, DefSite> definition_sites(const Function& f) {
  std::unordered_map<std::string, DefSite> defs;
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    for (const auto& i : f.blocks[b].phis) defs[i.result] = {b, true};
    for (const auto& i : f.blocks[b].body)
      if (!i.result.empty()) defs[i.result] = {b, false};
  }
  return defs;
}

std::optional<std::string> find_provider_with(ValueNumber vn, std::size_t block, InsertPos pos, const Function& f,
                                              const ValueTable& vt, const CfgInfo& cfg,
                                              const std::unordered_map<std::string, DefSite>& defs) {
  for (const auto& o : vt.info(vn).occurrences) {
    const Instruction* inst = find_instruction(f, o.block, o.name);
    if (!inst) continue;
    bool legal = true;
    for (const auto& op : inst->operands) {
      if (!op.is_value()) continue;
      auto it = defs.find(op.name);
      if (it == defs.end()) {
        legal = false;
        break;
      }
      const DefSite& d = it->second;
      if (d.block == block) {
        legal = pos == InsertPos::BeforeTerminator || d.phi;
      } else {
        legal = cfg.strictly_dominates(d.block, block);
      }
      if (!legal) break;
    }
    if (legal) return o.name;
  }
  return std::nullopt;
}

// Forward must-analysis: a slot counts as stored at a point if every path
// from entry passes a store to it.
void check_coverage(const Function& f, const std::vector<Instruction>& slots) {
  CfgInfo cfg = analyze_cfg(f);
  std::map<std::string, std::size_t> index;
  for (const auto& i : slots) index.emplace(i.result, index.size());
  const std::size_t w = index.size();
  if (!w) return;
  std::vector<BitVector> gen(cfg.size(), BitVector::empty(w));
  for (std::size_t b = 0; b < cfg.size(); ++b)
    for (const auto& i : f.blocks[b].body)
      if (i.op == Opcode::Store && i.operands[1].is_value())
        if (auto it = index.find(i.operands[1].name); it != index.end()) gen[b].set(it->second);
  DataflowSpec spec;
  spec.name = "STORED";
  spec.direction = Direction::Forward;
  spec.meet = Meet::Intersection;
  spec.width = w;
  spec.beta = [](std::size_t b, const Solution& sol) { return sol.out[b]; };
  spec.gamma = [&gen](std::size_t b, const Solution& sol) { return sol.in[b] | gen[b]; };
  spec.bottom = BitVector::empty(w);
  spec.top = BitVector::universe(w);
  Solution sol = solve(cfg, spec);
  for (std::size_t b : cfg.rpo) {
    BitVector cur = sol.in[b];
    for (const auto& i : f.blocks[b].body) {
      if (i.op == Opcode::Store && i.operands[1].is_value()) {
        if (auto it = index.find(i.operands[1].name); it != index.end()) cur.set(it->second);
      } else if (i.op == Opcode::Load && i.operands[0].is_value()) {
        auto it = index.find(i.operands[0].name);
        if (it != index.end() && !cur.test(it->second))
          throw std::logic_error("load %" + i.result + " in " + f.name + ":" + f.blocks[b].label +
                                 " is not covered by a store to %" + it->first + " on every path");
      }
    }
  }
}

}  // namespace

std::optional<std::string> find_provider(ValueNumber vn, std::size_t block, InsertPos pos, const Function& f,
                                         const ValueTable& vt, const CfgInfo& cfg) {
  return find_provider_with(vn, block, pos, f, vt, cfg, definition_sites(f));
}

void apply_insert_replace(Function& f, const CfgInfo& cfg, const ValueTable& vt, const SlotMap& sm,
                          const LcmSets& sets, PreReport& report) {
  const std::size_t n = cfg.size();
  const std::size_t w = sm.width();
  auto defs = definition_sites(f);
  NameGen names(f);

  struct Plan {
    std::vector<Insertion> insertions;
    std::vector<std::pair<std::string, std::size_t>> replaced;  // occurrence, block
    bool touched = false;
    bool failed = false;
  };
  std::vector<Plan> plans(w);

  for (std::size_t s = 0; s < w; ++s) {
    const ValueNumber vn = sm.vn_of_slot[s];
    Plan& plan = plans[s];
    auto occurrence_in = [&](std::size_t b) -> std::string {
      for (const auto& o : vt.info(vn).occurrences)
        if (o.block == b) return o.name;
      return {};
    };
    for (std::size_t b : cfg.rpo) {
      // INSERTIN implies REPLACEIN here, and INSERTOUT with XCOMP implies
      // REPLACEOUT; both collapse into a store after the occurrence.
      if (sets.insertin[b].test(s)) {
        plan.touched = true;
        plan.insertions.push_back({cfg.labels[b], InsertPos::AtOccurrence, vn, occurrence_in(b), {}});
      } else if (sets.replacein[b].test(s)) {
        plan.touched = true;
        plan.replaced.emplace_back(occurrence_in(b), b);
      }
      if (sets.insertout[b].test(s)) {
        plan.touched = true;
        if (sets.xcomp[b].test(s)) {
          plan.insertions.push_back({cfg.labels[b], InsertPos::AtOccurrence, vn, occurrence_in(b), {}});
        } else {
          auto p = find_provider_with(vn, b, InsertPos::BeforeTerminator, f, vt, cfg, defs);
          if (!p) plan.failed = true;
          else plan.insertions.push_back({cfg.labels[b], InsertPos::BeforeTerminator, vn, *p, {}});
        }
      } else if (sets.replaceout[b].test(s)) {
        plan.touched = true;
        plan.replaced.emplace_back(occurrence_in(b), b);
      }
    }
  }

  // Edits keyed by block.
  std::vector<std::vector<Instruction>> before_term(n);
  std::unordered_map<std::string, std::string> load_from;   // occurrence -> slot
  std::unordered_map<std::string, std::string> store_to;    // occurrence -> slot
  std::vector<Instruction> allocas;

  for (std::size_t s = 0; s < w; ++s) {
    Plan& plan = plans[s];
    const ValueNumber vn = sm.vn_of_slot[s];
    if (!plan.touched) continue;
    if (plan.failed) {
      report.skipped_vns.push_back(vn);
      continue;
    }
    const std::string slot = names.value("pre.v" + std::to_string(vn) + ".");
    allocas.push_back(Instruction{slot, Opcode::Alloca, CmpCode::Eq, {}, {}});
    for (auto& ins : plan.insertions) {
      if (ins.pos == InsertPos::AtOccurrence) {
        store_to[ins.provider] = slot;
        report.insertions.push_back(ins);
        continue;
      }
      std::size_t b = cfg.block(ins.block);
      const Instruction* prov = nullptr;
      for (const auto& o : vt.info(vn).occurrences)
        if (o.name == ins.provider) prov = find_instruction(f, o.block, o.name);
      Instruction clone = *prov;
      clone.result = names.value(ins.provider + ".pre.");
      ins.clone = clone.result;
      auto& dst = before_term[b];
      dst.push_back(clone);
      dst.push_back(Instruction{{}, Opcode::Store, CmpCode::Eq, {Operand::value(clone.result), Operand::value(slot)}, {}});
      report.insertions.push_back(ins);
    }
    std::set<std::string> replaced;
    for (const auto& [occ, b] : plan.replaced) {
      replaced.insert(occ);
      load_from[occ] = slot;
      report.replacements.push_back({occ, cfg.labels[b], vn, slot});
    }
    for (const auto& o : vt.info(vn).occurrences) {
      if (replaced.count(o.name) || store_to.count(o.name)) continue;
      store_to[o.name] = slot;
      ++report.companion_stores;
    }
  }

  for (std::size_t b = 0; b < n; ++b) {
    Block& blk = f.blocks[b];
    std::vector<Instruction> body;
    for (auto& i : blk.body) {
      if (auto it = load_from.find(i.result); it != load_from.end()) {
        body.push_back(Instruction{i.result, Opcode::Load, CmpCode::Eq, {Operand::value(it->second)}, {}});
        continue;
      }
      std::string r = i.result;
      body.push_back(std::move(i));
      if (auto it = store_to.find(r); !r.empty() && it != store_to.end())
        body.push_back(Instruction{{}, Opcode::Store, CmpCode::Eq, {Operand::value(r), Operand::value(it->second)}, {}});
    }
    for (auto& i : before_term[b]) body.push_back(std::move(i));
    blk.body = std::move(body);
  }
  Block& entry = f.blocks.front();
  entry.body.insert(entry.body.begin(), allocas.begin(), allocas.end());

  check_coverage(f, allocas);
}

PreReport pre_pass(Function& f, PreArtifacts* artifacts) {
  PreReport report;
  report.function = f.name;
  report.split_edges = split_critical_edges(f);

  CfgInfo cfg = analyze_cfg(f);
  ValueTable vt = assign_value_numbers(f, cfg);
  LoopInfo loops = find_natural_loops(f, cfg);
  report.lcse_removed = local_cse(f, vt);
  SlotMap sm = allocate_slots(vt, loops);
  report.max_vn = vt.max_vn();
  report.width = sm.width();

  LocalProperties lp = compute_local_properties(f, cfg, vt, sm);
  LcmSets sets = run_lcm_analyses(cfg, lp, sm.width());
  if (artifacts) artifacts->analyzed = f;
  apply_insert_replace(f, cfg, vt, sm, sets, report);

  if (artifacts) {
    artifacts->cfg = std::move(cfg);
    artifacts->loops = std::move(loops);
    artifacts->vt = std::move(vt);
    artifacts->slots = std::move(sm);
    artifacts->sets = std::move(sets);
  }
  return report;
}

std::string dump_lcm_sets(const Function& f, const CfgInfo& cfg, const SlotMap& sm, const LcmSets& sets) {
  std::ostringstream os;
  os << "@" << f.name << " width=" << sm.width() << " slots=[";
  for (std::size_t s = 0; s < sm.width(); ++s) os << (s ? " " : "") << "v" << sm.vn_of_slot[s];
  os << "]\n";
  for (std::size_t b = 0; b < cfg.size(); ++b) {
    os << "  " << cfg.labels[b] << ":\n";
    for (const auto& [name, family] : sets.named()) {
      os << "    " << name << " = {";
      bool first = true;
      for (std::size_t s : (*family)[b].indices()) {
        os << (first ? "" : ", ") << "v" << sm.vn_of_slot[s];
        first = false;
      }
      os << "}\n";
    }
  }
  return os.str();
}

}  // namespace vnlcm
