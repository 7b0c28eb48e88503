#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "corpus.hpp"
#include "oracles.hpp"
#include "vnlcm/cfg.hpp"
#include "vnlcm/interpreter.hpp"
#include "vnlcm/loops.hpp"
#include "vnlcm/normalize.hpp"
#include "vnlcm/parser.hpp"
#include "vnlcm/pre.hpp"
#include "vnlcm/printer.hpp"
#include "vnlcm/validate.hpp"

using namespace vnlcm;
using namespace vnlcm::testing;

namespace {

struct Stage {
  Function f;
  CfgInfo cfg;
  ValueTable vt;
  LoopInfo li;
  SlotMap sm;
  LocalProperties lp;
  std::size_t lcse = 0;
};

// The steps of pre_pass up to the local properties, on a copy.
Stage stage(const Function& input, bool split = true) {
  Stage s;
  s.f = input;
  if (split) split_critical_edges(s.f);
  s.cfg = analyze_cfg(s.f);
  s.vt = assign_value_numbers(s.f, s.cfg);
  s.li = find_natural_loops(s.f, s.cfg);
  s.lcse = local_cse(s.f, s.vt);
  s.sm = allocate_slots(s.vt, s.li);
  s.lp = compute_local_properties(s.f, s.cfg, s.vt, s.sm);
  return s;
}

Function rotated(std::string_view program) {
  return with_passes(corpus_program(program).module, "mem2reg,loop-rotate,reassociate").functions.at(0);
}

std::size_t slot_of_name(const Stage& s, const std::string& name) {
  auto slot = s.sm.slot(s.vt.of_name(name));
  EXPECT_TRUE(slot.has_value()) << name;
  return slot.value_or(0);
}

const Instruction* find(const Function& f, std::string_view name) {
  const Instruction* hit = nullptr;
  for_each_instruction(f, [&](const Block&, const Instruction& i) {
    if (i.result == name) hit = &i;
  });
  return hit;
}

}  // namespace

TEST(LocalCse, RemovesSecondCopyInBlock) {
  Stage s = stage(corpus_program("f3_lcse").module.functions[0]);
  EXPECT_EQ(s.lcse, 1u);
  EXPECT_EQ(find(s.f, "v"), nullptr);
  const Instruction* w = find(s.f, "w");
  ASSERT_NE(w, nullptr);
  EXPECT_EQ(w->operands[0], Operand::value("u"));
  EXPECT_EQ(w->operands[1], Operand::value("u"));
  const auto& occ = s.vt.info(s.vt.of_name("u")).occurrences;
  ASSERT_EQ(occ.size(), 1u);
  EXPECT_EQ(occ[0].name, "u");
  EXPECT_TRUE(validate(s.f).empty());
}

TEST(LocalCse, LeavesCrossBlockCopies) {
  Stage s = stage(corpus_program("f1_diamond").module.functions[0]);
  EXPECT_EQ(s.lcse, 0u);
  EXPECT_EQ(s.vt.info(s.vt.of_name("x1")).occurrences.size(), 2u);
}

TEST(LocalCse, AtMostOneOccurrencePerBlock) {
  for (const auto& a : analyzed_corpus()) {
    const ValueTable& vt = a.art.vt;
    for (ValueNumber vn = 1; vn <= vt.max_vn(); ++vn) {
      std::set<std::size_t> blocks;
      for (const auto& o : vt.info(vn).occurrences)
        EXPECT_TRUE(blocks.insert(o.block).second) << a.program << " v" << vn;
    }
  }
}

TEST(AllocateSlots, DiamondSlotsOnlyTheRedundantValue) {
  Stage s = stage(corpus_program("f1_diamond").module.functions[0]);
  EXPECT_EQ(s.sm.width(), 1u);
  EXPECT_TRUE(s.sm.slot(s.vt.of_name("x1")).has_value());
  EXPECT_FALSE(s.sm.slot(s.vt.of_name("c")).has_value());
  EXPECT_LT(s.sm.width(), s.vt.max_vn());
}

TEST(AllocateSlots, SingleOccurrenceInsideLoop) {
  Stage s = stage(rotated("f2_while_licm"));
  ValueNumber t = s.vt.of_name("t");
  ASSERT_EQ(s.vt.info(t).occurrences.size(), 1u);
  EXPECT_TRUE(s.sm.slot(t).has_value());
}

TEST(AllocateSlots, StraightLineUniqueExpressions) {
  Stage s = stage(corpus_program("straight_line").module.functions[0]);
  EXPECT_EQ(s.sm.width(), 0u);
  LcmSets sets = run_lcm_analyses(s.cfg, s.lp, 0);
  for (const auto& [name, family] : sets.named())
    for (const auto& v : *family) EXPECT_EQ(v.width(), 0u) << name;
}

TEST(AllocateSlots, DivisionOnlyWithNonzeroConstantDivisor) {
  Stage var = stage(rotated("div_in_loop"));
  for (ValueNumber vn : var.sm.vn_of_slot) EXPECT_NE(var.vt.info(vn).expr.op, Opcode::Div);
  Stage lit = stage(rotated("div_const_loop"));
  bool has_div = false;
  for (ValueNumber vn : lit.sm.vn_of_slot)
    if (lit.vt.info(vn).expr.op == Opcode::Div) has_div = true;
  EXPECT_TRUE(has_div);
}

TEST(AllocateSlots, DenseInNumberOrder) {
  for (const auto& a : analyzed_corpus()) {
    const SlotMap& sm = a.art.slots;
    EXPECT_TRUE(std::is_sorted(sm.vn_of_slot.begin(), sm.vn_of_slot.end()));
    for (std::size_t s = 0; s < sm.width(); ++s) EXPECT_EQ(sm.slot(sm.vn_of_slot[s]), s);
    EXPECT_LE(sm.width(), a.art.vt.max_vn());
  }
}

TEST(LocalProperties, DiamondJoin) {
  Stage s = stage(corpus_program("f1_diamond").module.functions[0]);
  std::size_t join = s.cfg.block("join");
  std::size_t bbF = s.cfg.block("bbF");
  EXPECT_TRUE(s.lp.transp[join].test(0));
  EXPECT_TRUE(s.lp.antloc[join].test(0));
  EXPECT_FALSE(s.lp.xcomp[join].test(0));
  EXPECT_TRUE(s.lp.transp[bbF].test(0));
  EXPECT_FALSE(s.lp.antloc[bbF].test(0));
  EXPECT_FALSE(s.lp.xcomp[bbF].test(0));
}

TEST(LocalProperties, OperandDefinedInBlock) {
  Stage s = stage(parse_module(R"(
    func @f(%a, %c) {
    entry:
      br %c, l, r
    l:
      %t = add %a, 2
      %s = add %t, 1
      jmp j
    r:
      %u = add %a, 2
      %v = add %u, 1
      jmp j
    j:
      ret 0
    })").functions[0]);
  std::size_t slot = slot_of_name(s, "s");
  std::size_t l = s.cfg.block("l");
  EXPECT_TRUE(s.lp.xcomp[l].test(slot));
  EXPECT_FALSE(s.lp.antloc[l].test(slot));
  EXPECT_FALSE(s.lp.transp[l].test(slot));
  std::size_t t = slot_of_name(s, "t");
  EXPECT_TRUE(s.lp.antloc[l].test(t));
}

TEST(LocalProperties, MatchReferenceOnCorpus) {
  for (const auto& a : analyzed_corpus()) {
    LocalProperties got = compute_local_properties(a.art.analyzed, a.art.cfg, a.art.vt, a.art.slots);
    LocalProperties want = reference_local_properties(a.art.analyzed, a.art.vt, a.art.slots);
    EXPECT_EQ(got.transp, want.transp) << a.program;
    EXPECT_EQ(got.antloc, want.antloc) << a.program;
    EXPECT_EQ(got.xcomp, want.xcomp) << a.program;
    for (std::size_t b = 0; b < got.antloc.size(); ++b) EXPECT_TRUE((got.antloc[b] & got.xcomp[b]).none());
  }
}

TEST(LcmAnalyses, DiamondInsertsOnElseArm) {
  Stage s = stage(corpus_program("f1_diamond").module.functions[0]);
  LcmSets sets = run_lcm_analyses(s.cfg, s.lp, s.sm.width());
  EXPECT_TRUE(sets.insertout[s.cfg.block("bbF")].test(0));
  EXPECT_TRUE(sets.replacein[s.cfg.block("join")].test(0));
  EXPECT_FALSE(sets.insertin[s.cfg.block("join")].test(0));
  EXPECT_TRUE(sets.insertin[s.cfg.block("bbT")].test(0)) << "the original occurrence feeds the slot";
  EXPECT_FALSE(sets.insertin[s.cfg.block("entry")].test(0));
  EXPECT_FALSE(sets.insertout[s.cfg.block("entry")].test(0));
}

TEST(LcmAnalyses, RotatedLoopHoistsToPreheader) {
  Stage s = stage(rotated("f2_while_licm"));
  LcmSets sets = run_lcm_analyses(s.cfg, s.lp, s.sm.width());
  std::size_t slot = slot_of_name(s, "t");
  LoopInfo li = find_natural_loops(s.f, s.cfg);
  ASSERT_EQ(li.loops.size(), 1u);
  std::size_t ph = li.loops[0].preheader.value();
  EXPECT_TRUE(sets.insertin[ph].test(slot) || sets.insertout[ph].test(slot));
  std::size_t body = s.cfg.block("body");
  EXPECT_TRUE(sets.replacein[body].test(slot));
  EXPECT_FALSE(sets.insertin[body].test(slot));
}

TEST(LcmAnalyses, MatchReferenceEquationsOnCorpus) {
  for (const auto& a : analyzed_corpus()) {
    LocalProperties lp = compute_local_properties(a.art.analyzed, a.art.cfg, a.art.vt, a.art.slots);
    LcmSets want = reference_lcm(a.art.analyzed, lp, a.art.slots.width());
    EXPECT_EQ(first_difference(a.art.analyzed, a.art.sets, want), "") << a.program << "/" << a.function;
    LcmSets rev = run_lcm_analyses(a.art.cfg, lp, a.art.slots.width(), WorklistOrder::Reversed);
    EXPECT_EQ(first_difference(a.art.analyzed, a.art.sets, rev), "") << a.program << "/" << a.function;
  }
}

TEST(LcmAnalyses, InclusionChains) {
  for (const auto& a : analyzed_corpus()) {
    const LcmSets& s = a.art.sets;
    for (std::size_t b = 0; b < a.art.analyzed.blocks.size(); ++b) {
      std::string at = a.program + ":" + a.art.analyzed.blocks[b].label;
      EXPECT_TRUE(s.earlin[b].subset_of(s.antin[b])) << at;
      EXPECT_TRUE(s.latestin[b].subset_of(s.delayin[b])) << at;
      EXPECT_TRUE(s.latestout[b].subset_of(s.delayout[b])) << at;
      EXPECT_TRUE(s.insertin[b].subset_of(s.latestin[b])) << at;
      EXPECT_TRUE(s.insertout[b].subset_of(s.latestout[b])) << at;
      EXPECT_TRUE(s.replacein[b].subset_of(s.antloc[b])) << at;
      EXPECT_TRUE(s.replaceout[b].subset_of(s.xcomp[b])) << at;
      EXPECT_TRUE((s.antloc[b] & s.xcomp[b]).none()) << at;
      EXPECT_TRUE(s.delayin[b].subset_of(s.antin[b])) << at;
    }
  }
}

TEST(FindProvider, ParametersDominateEverything) {
  Stage s = stage(corpus_program("f1_diamond").module.functions[0]);
  auto p = find_provider(s.vt.of_name("y"), s.cfg.block("bbF"), InsertPos::BeforeTerminator, s.f, s.vt, s.cfg);
  ASSERT_TRUE(p);
  EXPECT_EQ(*p, "x1");
}

TEST(FindProvider, PhiOperandInInsertionBlock) {
  Stage s = stage(parse_module(R"(
    func @f(%a, %b, %c) {
    entry:
      br %c, l, r
    l:
      jmp j
    r:
      jmp j
    j:
      %q = phi [l: %a, r: %b]
      %x = add %q, 1
      ret %x
    })").functions[0],
                  false);
  ValueNumber vn = s.vt.of_name("x");
  auto at_phis = find_provider(vn, s.cfg.block("j"), InsertPos::EntryAfterPhis, s.f, s.vt, s.cfg);
  ASSERT_TRUE(at_phis);
  EXPECT_EQ(*at_phis, "x");
  EXPECT_FALSE(find_provider(vn, s.cfg.block("l"), InsertPos::BeforeTerminator, s.f, s.vt, s.cfg));
}

TEST(FindProvider, SiblingDefinitionDoesNotQualify) {
  Stage s = stage(corpus_program("f5_provider_fail").module.functions[0]);
  ValueNumber vn = s.vt.of_name("y");
  ASSERT_EQ(s.vt.of_name("w"), vn);
  EXPECT_FALSE(find_provider(vn, s.cfg.block("bbF"), InsertPos::BeforeTerminator, s.f, s.vt, s.cfg));
}

TEST(ApplyInsertReplace, DiamondBeforePromotion) {
  Function f = corpus_program("f1_diamond").module.functions[0];
  PreReport rep = pre_pass(f);
  ASSERT_TRUE(validate(f).empty()) << print_function(f);
  std::string text = print_function(f);
  EXPECT_NE(text.find("alloca"), std::string::npos);
  // Entry holds the slot.
  ASSERT_FALSE(f.entry().body.empty());
  EXPECT_EQ(f.entry().body[0].op, Opcode::Alloca);
  const std::string slot = f.entry().body[0].result;
  // Else arm: clone plus store.
  const Block* bbF = f.find_block("bbF");
  ASSERT_EQ(bbF->body.size(), 2u);
  EXPECT_EQ(bbF->body[0].op, Opcode::Add);
  EXPECT_EQ(bbF->body[1].op, Opcode::Store);
  EXPECT_EQ(bbF->body[1].operands[1], Operand::value(slot));
  // Then arm keeps its add and stores it.
  const Block* bbT = f.find_block("bbT");
  ASSERT_EQ(bbT->body.size(), 2u);
  EXPECT_EQ(bbT->body[0].result, "x1");
  EXPECT_EQ(bbT->body[1].op, Opcode::Store);
  EXPECT_EQ(bbT->body[1].operands[0], Operand::value("x1"));
  // Join reloads instead of recomputing.
  const Instruction* y = find(f, "y");
  ASSERT_NE(y, nullptr);
  EXPECT_EQ(y->op, Opcode::Load);
  EXPECT_EQ(y->operands[0], Operand::value(slot));
  ASSERT_EQ(rep.replacements.size(), 1u);
  EXPECT_EQ(rep.replacements[0].instruction, "y");
  EXPECT_EQ(rep.replacements[0].block, "join");
  EXPECT_EQ(rep.insertions.size(), 2u);
}

TEST(ApplyInsertReplace, IsolatedComputationUntouched) {
  Function f = parse_module("func @f(%a){ e: %x = add %a, 1\n ret %x }").functions[0];
  Function before = f;
  PreReport rep = pre_pass(f);
  EXPECT_EQ(f, before);
  EXPECT_TRUE(rep.insertions.empty());
  EXPECT_TRUE(rep.replacements.empty());
}

TEST(ApplyInsertReplace, IsolatedInLoopUntouched) {
  // A single in-loop occurrence that is not invariant gets a slot but the
  // isolation analysis keeps it in place.
  Function f = rotated("induction_kill");
  PreArtifacts art;
  PreReport rep = pre_pass(f, &art);
  EXPECT_GT(rep.width, 0u);
  EXPECT_TRUE(rep.insertions.empty());
  EXPECT_TRUE(rep.replacements.empty());
  EXPECT_EQ(f, art.analyzed);
}

TEST(ApplyInsertReplace, ProviderFailureSkipsValueEntirely) {
  Function f = corpus_program("f5_provider_fail").module.functions[0];
  PreArtifacts art;
  PreReport rep = pre_pass(f, &art);
  ValueNumber vn = art.vt.of_name("y");
  EXPECT_NE(std::find(rep.skipped_vns.begin(), rep.skipped_vns.end(), vn), rep.skipped_vns.end());
  for (const auto& i : rep.insertions) EXPECT_NE(i.vn, vn);
  for (const auto& r : rep.replacements) EXPECT_NE(r.vn, vn);
  ASSERT_NE(find(f, "y"), nullptr);
  EXPECT_EQ(find(f, "y")->op, Opcode::Add);
  EXPECT_EQ(find(f, "w")->op, Opcode::Add);
}

TEST(ApplyInsertReplace, SkippedValuesAreNeverTransformed) {
  for (const auto& a : analyzed_corpus()) {
    std::set<ValueNumber> skipped(a.report.skipped_vns.begin(), a.report.skipped_vns.end());
    for (const auto& i : a.report.insertions) EXPECT_FALSE(skipped.count(i.vn)) << a.program;
    for (const auto& r : a.report.replacements) EXPECT_FALSE(skipped.count(r.vn)) << a.program;
  }
}

TEST(ApplyInsertReplace, CoverageCheckRejectsBrokenSets) {
  Stage s = stage(corpus_program("f1_diamond").module.functions[0]);
  LcmSets sets = run_lcm_analyses(s.cfg, s.lp, s.sm.width());
  // Drop the else-arm insertion: the join load is no longer covered.
  sets.insertout[s.cfg.block("bbF")].reset(0);
  PreReport rep;
  EXPECT_THROW(apply_insert_replace(s.f, s.cfg, s.vt, s.sm, sets, rep), std::logic_error);
}

// Every load PRE introduces is preceded by a store on every path.
TEST(ApplyInsertReplace, NoUninitializedLoadsExecute) {
  std::size_t runs = 0;
  for (const auto& p : corpus()) {
    Module m = with_passes(p.module, "mem2reg,loop-rotate,reassociate,lcm");
    for (const auto& c : p.cases) {
      ExecProfile prof = execute(m, p.entry, c.args, c.tape);
      EXPECT_EQ(prof.uninit_loads, 0u) << p.name;
      ++runs;
    }
  }
  EXPECT_GE(runs, 200u);
}

TEST(PrePass, ReportFields) {
  Function f = corpus_program("f3_lcse").module.functions[0];
  PreReport rep = pre_pass(f);
  EXPECT_EQ(rep.lcse_removed, 1u);
  EXPECT_EQ(rep.function, "f3");
  Function g = corpus_program("f1_diamond").module.functions[0];
  PreReport r1 = pre_pass(g);
  EXPECT_GE(r1.width, 1u);
  EXPECT_LT(r1.width_ratio(), 1.0);
  EXPECT_DOUBLE_EQ(r1.width_ratio(), static_cast<double>(r1.width) / static_cast<double>(r1.max_vn));
}

TEST(PrePass, NeverIncreasesDynamicWork) {
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> totals;
  for (const auto& p : corpus()) {
    Module base = optimized(p.module, "base");
    Module lcm = optimized(p.module, "lcm-pre");
    for (const auto& c : p.cases) {
      auto b = execute(base, p.entry, c.args, c.tape);
      auto l = execute(lcm, p.entry, c.args, c.tape);
      EXPECT_EQ(b.behavior, l.behavior) << p.name;
      EXPECT_LE(l.candidate_total, b.candidate_total) << p.name;
      totals[p.name].first += b.candidate_total;
      totals[p.name].second += l.candidate_total;
    }
  }
  for (const char* strict : {"f1_diamond", "f2_while_licm", "f3_lcse"})
    EXPECT_LT(totals[strict].second, totals[strict].first) << strict;
}

TEST(PrePass, DumpListsAllFamilies) {
  const auto& a = analyzed_corpus().front();
  std::string d = dump_lcm_sets(a.art.analyzed, a.art.cfg, a.art.slots, a.art.sets);
  for (const auto& [name, family] : a.art.sets.named()) EXPECT_NE(d.find(name + " = {"), std::string::npos);
  EXPECT_NE(a.art.sets.find("insertin"), nullptr);
  EXPECT_EQ(a.art.sets.find("nope"), nullptr);
}
