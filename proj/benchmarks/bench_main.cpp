#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vnlcm/cfg.hpp"
#include "vnlcm/interpreter.hpp"
#include "vnlcm/parser.hpp"
#include "vnlcm/pipeline.hpp"
#include "vnlcm/pre.hpp"

using namespace vnlcm;

namespace {

Module load(const std::string& name) {
  std::ifstream in(std::filesystem::path(VNLCM_CORPUS_DIR) / (name + ".ir"));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_module(ss.str());
}

// A chain of n diamonds, each recomputing a+b at its join.
Module diamond_chain(int n) {
  std::ostringstream s;
  s << "func @chain(%a, %b) {\nentry:\n  jmp d0\n";
  for (int k = 0; k < n; ++k) {
    s << "d" << k << ":\n  %t" << k << " = opaque\n  br %t" << k << ", l" << k << ", r" << k << "\n";
    s << "l" << k << ":\n  %x" << k << " = add %a, %b\n  print %x" << k << "\n  jmp j" << k << "\n";
    s << "r" << k << ":\n  jmp j" << k << "\n";
    s << "j" << k << ":\n  %y" << k << " = add %b, %a\n  print %y" << k << "\n  jmp d" << k + 1 << "\n";
  }
  s << "d" << n << ":\n  ret 0\n}\n";
  return parse_module(s.str());
}

void BM_PrePassDiamondChain(benchmark::State& state) {
  Module m = diamond_chain(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Function f = m.functions[0];
    benchmark::DoNotOptimize(pre_pass(f));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PrePassDiamondChain)->RangeMultiplier(4)->Range(4, 256)->Complexity();

void BM_LcmPipeline(benchmark::State& state) {
  Module m = load("extended_example");
  auto passes = named_pipeline("lcm-pre");
  for (auto _ : state) {
    Module copy = m;
    benchmark::DoNotOptimize(run_pipeline(copy, passes));
  }
}
BENCHMARK(BM_LcmPipeline);

void BM_AntSolve(benchmark::State& state) {
  Module m = diamond_chain(64);
  Function f = m.functions[0];
  PreArtifacts art;
  pre_pass(f, &art);
  LocalProperties lp = compute_local_properties(art.analyzed, art.cfg, art.vt, art.slots);
  DataflowSpec spec = ant_spec(lp, art.slots.width());
  for (auto _ : state) benchmark::DoNotOptimize(solve(art.cfg, spec));
}
BENCHMARK(BM_AntSolve);

void BM_InterpretLoop(benchmark::State& state) {
  Module m = load("f2_while_licm");
  run_pipeline(m, named_pipeline("lcm-pre"));
  for (auto _ : state) benchmark::DoNotOptimize(execute(m, "f2", {2, 3, 1000}, {}));
}
BENCHMARK(BM_InterpretLoop);

}  // namespace

BENCHMARK_MAIN();
