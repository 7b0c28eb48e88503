#include <gtest/gtest.h>

#include "corpus.hpp"
#include "vnlcm/interpreter.hpp"
#include "vnlcm/parser.hpp"

using namespace vnlcm;
using namespace vnlcm::testing;

TEST(Execute, DiamondTruePathBeforePre) {
  const Module& m = corpus_program("f1_diamond").module;
  ExecProfile p = execute(m, "f1", {2, 3}, {1});
  EXPECT_EQ(p.behavior.status, ExitStatus::Returned);
  EXPECT_EQ(p.behavior.returned, 5);
  EXPECT_EQ(p.behavior.printed, std::vector<std::int64_t>{5});
  EXPECT_EQ(p.count("add"), 2u);
  EXPECT_EQ(p.count("cmp"), 1u);
  EXPECT_EQ(p.candidate_total, 3u);
}

TEST(Execute, DiamondAfterPipeline) {
  Module m = optimized(corpus_program("f1_diamond").module, "lcm-pre");
  for (std::int64_t t : {1, 0}) {
    ExecProfile p = execute(m, "f1", {2, 3}, {t});
    EXPECT_EQ(p.behavior.returned, 5);
    EXPECT_EQ(p.count("add"), 1u) << "tape " << t;
  }
}

TEST(Execute, CandidateTotalIsSumOfParts) {
  for (const auto& p : corpus()) {
    for (const auto& c : p.cases) {
      ExecProfile prof = execute(p.module, p.entry, c.args, c.tape);
      std::uint64_t sum = 0;
      for (const char* op : {"add", "sub", "mul", "div", "and", "or", "xor", "cmp"}) sum += prof.count(op);
      EXPECT_EQ(prof.candidate_total, sum) << p.name;
      std::uint64_t all = 0;
      for (const auto& [op, n] : prof.op_counts) all += n;
      EXPECT_EQ(all, prof.steps) << p.name;
    }
  }
}

TEST(Execute, PhisReadSimultaneously) {
  Module m = parse_module(R"(
    func @swap(%n) {
    entry:
      jmp loop
    loop:
      %x = phi [entry: 1, loop: %y]
      %y = phi [entry: 2, loop: %x]
      %i = phi [entry: 0, loop: %i1]
      %i1 = add %i, 1
      %c = cmp lt %i1, %n
      br %c, loop, done
    done:
      print %x
      ret %y
    })");
  ExecProfile p = execute(m, "swap", {2}, {});
  EXPECT_EQ(p.behavior.printed, std::vector<std::int64_t>{2});
  EXPECT_EQ(p.behavior.returned, 1);
}

TEST(Execute, OpaqueTapeRunsOutToZero) {
  Module m = parse_module("func @f(){ e: %a = opaque\n %b = opaque\n %c = opaque\n print %a\n print %b\n ret %c }");
  ExecProfile p = execute(m, "f", {}, {7, -1});
  EXPECT_EQ(p.behavior.printed, (std::vector<std::int64_t>{7, -1}));
  EXPECT_EQ(p.behavior.returned, 0);
}

TEST(Execute, DivisionByZeroTrapsWithPartialOutput) {
  Module m = parse_module("func @f(%a){ e: print 1\n %q = div 5, %a\n print %q\n ret 0 }");
  ExecProfile p = execute(m, "f", {0}, {});
  EXPECT_EQ(p.behavior.status, ExitStatus::TrappedDivZero);
  EXPECT_EQ(p.behavior.printed, std::vector<std::int64_t>{1});
  EXPECT_FALSE(p.behavior.returned);
  EXPECT_EQ(execute(m, "f", {5}, {}).behavior.returned, 0);
}

TEST(Execute, FuelExhaustion) {
  Module m = parse_module("func @spin(){ e: jmp l\n l: jmp l }");
  ExecProfile p = execute(m, "spin", {}, {}, 1000);
  EXPECT_EQ(p.behavior.status, ExitStatus::FuelExhausted);
  EXPECT_EQ(p.steps, 1000u);
}

TEST(Execute, MemoryAndUninitializedLoads) {
  Module m = parse_module(R"(
    func @f() {
    e:
      %p = alloca
      %q = alloca
      %u = load %q
      store 4, %p
      %v = load %p
      print %u
      ret %v
    })");
  ExecProfile p = execute(m, "f", {}, {});
  EXPECT_EQ(p.behavior.printed, std::vector<std::int64_t>{0});
  EXPECT_EQ(p.behavior.returned, 4);
  EXPECT_EQ(p.uninit_loads, 1u);
}

TEST(Execute, Errors) {
  const Module& m = corpus_program("f1_diamond").module;
  EXPECT_THROW(execute(m, "nope", {}, {}), ExecError);
  EXPECT_THROW(execute(m, "f1", {1}, {}), ExecError);
}

TEST(Execute, Deterministic) {
  for (const auto& p : corpus())
    for (const auto& c : p.cases) {
      ExecProfile a = execute(p.module, p.entry, c.args, c.tape);
      ExecProfile b = execute(p.module, p.entry, c.args, c.tape);
      EXPECT_EQ(a.behavior, b.behavior);
      EXPECT_EQ(a.op_counts, b.op_counts);
      EXPECT_EQ(a.steps, b.steps);
    }
}

TEST(Execute, ObserverSeesEveryValue) {
  const Module& m = corpus_program("f1_diamond").module;
  std::vector<std::string> seen;
  std::optional<std::int64_t> x1_at_y;
  ExecObserver obs = [&](const Instruction& i, std::int64_t, const auto& read) {
    seen.push_back(i.result);
    if (i.result == "y") x1_at_y = read("x1");
  };
  execute(m, "f1", {2, 3}, {1}, kDefaultFuel, &obs);
  EXPECT_EQ(seen, (std::vector<std::string>{"t", "c", "x1", "x", "y"}));
  EXPECT_EQ(x1_at_y, 5);
}

TEST(Differential, DiamondCountsPerPath) {
  const auto& p = corpus_program("f1_diamond");
  Module base = optimized(p.module, "base");
  Module lcm = optimized(p.module, "lcm-pre");
  std::vector<ExecCase> cases{{{2, 3}, {1}}, {{2, 3}, {0}}};
  DiffVerdict v = differential(base, lcm, "f1", cases);
  EXPECT_TRUE(v.pass);
  ASSERT_EQ(v.cases.size(), 2u);
  // Both arms also run one cmp.
  EXPECT_EQ(v.cases[0].candidates_before, 3u);
  EXPECT_EQ(v.cases[0].candidates_after, 2u);
  EXPECT_EQ(v.cases[1].candidates_before, 2u);
  EXPECT_EQ(v.cases[1].candidates_after, 2u);
}

TEST(Differential, IdenticalModules) {
  const auto& p = corpus_program("nested_loops");
  DiffVerdict v = differential(p.module, p.module, p.entry, p.cases);
  EXPECT_TRUE(v.pass);
  for (const auto& e : v.cases) EXPECT_EQ(e.candidates_before, e.candidates_after);
}

TEST(Differential, MutationIsCaught) {
  const auto& p = corpus_program("f1_diamond");
  Module mutant = p.module;
  for (auto& b : mutant.functions[0].blocks)
    for (auto& i : b.body)
      if (i.op == Opcode::Add) i.op = Opcode::Sub;
  DiffVerdict v = differential(p.module, mutant, "f1", {{{2, 3}, {1}}, {{2, 3}, {0}}});
  EXPECT_FALSE(v.pass);
  EXPECT_FALSE(v.cases[0].equal);
  EXPECT_NE(describe(v.cases[0].after).find("returned=-1"), std::string::npos);
}

TEST(Differential, LoadStoreFormMatchesSsaForm) {
  for (const auto& p : corpus()) {
    Module promoted = with_passes(p.module, "mem2reg");
    DiffVerdict v = differential(p.module, promoted, p.entry, p.cases);
    EXPECT_TRUE(v.pass) << p.name;
  }
}

TEST(Describe, Format) {
  Behavior b;
  b.printed = {1, -2};
  b.returned = 3;
  EXPECT_EQ(describe(b), "status=returned printed=[1,-2] returned=3");
  b.returned.reset();
  b.status = ExitStatus::FuelExhausted;
  EXPECT_EQ(describe(b), "status=fuel-exhausted printed=[1,-2] returned=none");
}
