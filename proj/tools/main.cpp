#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vnlcm/cfg.hpp"
#include "vnlcm/dot.hpp"
#include "vnlcm/interpreter.hpp"
#include "vnlcm/parser.hpp"
#include "vnlcm/pipeline.hpp"
#include "vnlcm/pre.hpp"
#include "vnlcm/printer.hpp"
#include "vnlcm/validate.hpp"
#include "vnlcm/value_numbering.hpp"

namespace {

using namespace vnlcm;

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Module load(const std::string& path) {
  Module m = parse_module(read_file(path));
  auto diags = validate(m);
  if (!diags.empty()) {
    std::string msg = path + ": invalid module";
    for (const auto& d : diags) msg += "\n  " + d;
    throw std::runtime_error(msg);
  }
  return m;
}

std::vector<std::int64_t> parse_values(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    long long v = std::stoll(item, &used);
    if (used != item.size()) throw std::runtime_error("bad integer '" + item + "'");
    out.push_back(v);
  }
  return out;
}

ExecCase parse_case(const std::string& text) {
  ExecCase c;
  auto colon = text.find(':');
  c.args = parse_values(text.substr(0, colon));
  if (colon != std::string::npos) c.tape = parse_values(text.substr(colon + 1));
  return c;
}

struct PipelineChoice {
  std::string passes;
  std::string pipeline;

  std::vector<std::string> resolve(const std::string& fallback) const {
    if (!passes.empty() && !pipeline.empty()) throw std::runtime_error("use either --passes or --pipeline");
    if (!pipeline.empty()) return named_pipeline(pipeline);
    if (!passes.empty()) return parse_pass_list(passes);
    return fallback.empty() ? std::vector<std::string>{} : named_pipeline(fallback);
  }

  void attach(CLI::App* app) {
    app->add_option("--passes", passes, "Comma-separated pass list");
    app->add_option("--pipeline", pipeline, "Named pipeline: base or lcm-pre");
  }
};

void print_pre_stats(std::ostream& os, const PreReport& r) {
  os << "function=" << r.function << " max_vn=" << r.max_vn << " width=" << r.width
     << " width_ratio=" << r.width_ratio() << " insertions=" << r.insertions.size()
     << " replacements=" << r.replacements.size() << " lcse_removed=" << r.lcse_removed
     << " companion_stores=" << r.companion_stores << " split_edges=" << r.split_edges << " skipped_vns=";
  for (std::size_t k = 0; k < r.skipped_vns.size(); ++k) os << (k ? "," : "") << r.skipped_vns[k];
  os << '\n';
  for (const auto& ins : r.insertions)
    os << "  insert block=" << ins.block << " pos=" << insert_pos_name(ins.pos) << " vn=" << ins.vn
       << " provider=%" << ins.provider << (ins.clone.empty() ? "" : " clone=%" + ins.clone) << '\n';
  for (const auto& rep : r.replacements)
    os << "  replace %" << rep.instruction << " block=" << rep.block << " vn=" << rep.vn << " slot=%" << rep.slot
       << '\n';
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_dots(const std::string& dir, const std::vector<std::pair<Function, PreArtifacts>>& snaps,
                const Module& m, const std::vector<std::string>& families) {
  std::filesystem::create_directories(dir);
  for (const auto& f : m.functions) {
    const PreArtifacts* art = nullptr;
    for (const auto& [fn, a] : snaps)
      if (fn.name == f.name) art = &a;
    // Sets describe the function as analyzed, before insert/replace.
    const Function& shown = art ? art->analyzed : f;
    std::ofstream out(std::filesystem::path(dir) / (f.name + ".dot"));
    out << to_dot(shown, art, families);
  }
}

int cmd_opt(const std::string& input, const PipelineChoice& choice, const std::string& output, bool stats,
            bool dump_sets, bool dump_vn, const std::string& dot_dir, const std::string& sets) {
  Module m = load(input);
  auto passes = choice.resolve("");
  std::vector<std::pair<Function, PreArtifacts>> snaps;
  PipelineOptions opts;
  if (dump_sets || dump_vn || !dot_dir.empty())
    opts.on_pre = [&](const Function& f, const PreArtifacts& a) { snaps.emplace_back(f, a); };
  PipelineResult res = run_pipeline(m, passes, opts);

  std::string text = print_module(m);
  if (output.empty() || output == "-") {
    std::cout << text;
  } else {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    out << text;
  }
  if (stats) {
    for (const auto& p : res.passes) {
      std::cerr << "pass=" << p.pass << " function=" << p.function;
      for (const auto& [k, v] : p.counters) std::cerr << ' ' << k << '=' << v;
      std::cerr << '\n';
      for (const auto& d : p.diagnostics) std::cerr << "  note: " << d << '\n';
    }
    for (const auto& r : res.pre) print_pre_stats(std::cerr, r);
  }
  if (dump_sets)
    for (const auto& [f, a] : snaps) std::cerr << dump_lcm_sets(a.analyzed, a.cfg, a.slots, a.sets);
  if (dump_vn) {
    if (!snaps.empty()) {
      for (const auto& [f, a] : snaps) std::cerr << dump_value_numbers(a.analyzed, a.vt);
    } else {
      for (const auto& f : m.functions) {
        Function copy = f;
        ValueTable vt = assign_value_numbers(copy, analyze_cfg(copy));
        std::cerr << dump_value_numbers(copy, vt);
      }
    }
  }
  if (!dot_dir.empty()) {
    auto families = split_names(sets);
    if (families.empty() && !snaps.empty()) families = {"INSERTIN", "INSERTOUT", "REPLACEIN", "REPLACEOUT"};
    write_dots(dot_dir, snaps, m, families);
  }
  return 0;
}

void print_profile(const ExecProfile& p, bool kv) {
  const Behavior& b = p.behavior;
  if (kv) {
    std::cout << "status=" << exit_status_name(b.status) << '\n';
    std::cout << "returned=" << (b.returned ? std::to_string(*b.returned) : "none") << '\n';
    std::cout << "printed=";
    for (std::size_t k = 0; k < b.printed.size(); ++k) std::cout << (k ? "," : "") << b.printed[k];
    std::cout << '\n';
    std::cout << "steps=" << p.steps << '\n';
    std::cout << "candidate_total=" << p.candidate_total << '\n';
    std::cout << "uninit_loads=" << p.uninit_loads << '\n';
    for (const auto& [op, n] : p.op_counts) std::cout << "count." << op << '=' << n << '\n';
    return;
  }
  for (auto v : b.printed) std::cout << "print " << v << '\n';
  std::cout << "status: " << exit_status_name(b.status) << '\n';
  if (b.returned) std::cout << "return: " << *b.returned << '\n';
  std::cout << "steps: " << p.steps << "  candidates: " << p.candidate_total << '\n';
  std::cout << "ops:";
  for (const auto& [op, n] : p.op_counts) std::cout << ' ' << op << '=' << n;
  std::cout << '\n';
}

std::string default_function(const Module& m, const std::string& requested) {
  if (!requested.empty()) return requested;
  return m.functions.front().name;
}

int cmd_run(const std::string& input, const PipelineChoice& choice, std::string func, const std::string& args,
            const std::string& tape, std::uint64_t fuel, bool kv) {
  Module m = load(input);
  run_pipeline(m, choice.resolve(""));
  func = default_function(m, func);
  ExecProfile p = execute(m, func, parse_values(args), parse_values(tape), fuel);
  print_profile(p, kv);
  return 0;
}

int cmd_diff(const std::string& before_path, const std::string& after_path, std::string func,
             const std::vector<std::string>& case_text, std::uint64_t fuel) {
  Module before = load(before_path);
  Module after;
  if (after_path.empty()) {
    after = before;
    run_pipeline(before, named_pipeline("base"));
    run_pipeline(after, named_pipeline("lcm-pre"));
  } else {
    after = load(after_path);
  }
  func = default_function(before, func);
  std::vector<ExecCase> cases;
  for (const auto& c : case_text) cases.push_back(parse_case(c));
  if (cases.empty()) cases.push_back({});
  DiffVerdict v = differential(before, after, func, cases, fuel);
  for (std::size_t k = 0; k < v.cases.size(); ++k) {
    const auto& e = v.cases[k];
    std::cout << "case=" << k << " equal=" << (e.equal ? 1 : 0) << " candidates_before=" << e.candidates_before
              << " candidates_after=" << e.candidates_after << '\n';
    if (!e.equal) {
      std::cout << "  before: " << describe(e.before) << "\n  after:  " << describe(e.after) << '\n';
    }
  }
  std::cout << "verdict=" << (v.pass ? "pass" : "fail") << '\n';
  return v.pass ? 0 : 1;
}

int cmd_stats(const std::vector<std::string>& inputs, const PipelineChoice& choice) {
  auto passes = choice.resolve("lcm-pre");
  if (std::find(passes.begin(), passes.end(), "lcm") == passes.end())
    throw std::runtime_error("stats needs a pipeline containing lcm");
  double ratio_sum = 0;
  std::size_t funcs = 0, width_sum = 0, maxvn_sum = 0;
  for (const auto& path : inputs) {
    Module m = load(path);
    PipelineResult res = run_pipeline(m, passes);
    for (const auto& r : res.pre) {
      std::cout << "file=" << path << ' ';
      print_pre_stats(std::cout, r);
      ratio_sum += r.width_ratio();
      width_sum += r.width;
      maxvn_sum += r.max_vn;
      ++funcs;
    }
  }
  std::cout << "functions=" << funcs << " average_width_ratio=" << (funcs ? ratio_sum / funcs : 0.0)
            << " total_width=" << width_sum << " total_max_vn=" << maxvn_sum << '\n';
  return 0;
}

int cmd_dot(const std::string& input, const PipelineChoice& choice, const std::string& dir, const std::string& sets) {
  Module m = load(input);
  std::vector<std::pair<Function, PreArtifacts>> snaps;
  PipelineOptions opts;
  opts.on_pre = [&](const Function& f, const PreArtifacts& a) { snaps.emplace_back(f, a); };
  run_pipeline(m, choice.resolve(""), opts);
  auto families = split_names(sets);
  write_dots(dir, snaps, m, families);
  for (const auto& f : m.functions) std::cout << (std::filesystem::path(dir) / (f.name + ".dot")).string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-number driven lazy code motion on a small SSA IR"};
  app.require_subcommand(1);

  std::string input, output, dot_dir, sets, func, args, tape, after;
  std::vector<std::string> inputs, cases;
  std::uint64_t fuel = kDefaultFuel;
  bool stats = false, dump_sets = false, dump_vn = false, kv = false;
  PipelineChoice choice;

  auto* opt = app.add_subcommand("opt", "Run a pass pipeline and print the resulting IR");
  opt->add_option("input", input, "IR file (- for stdin)")->required();
  choice.attach(opt);
  opt->add_option("-o,--output", output, "Write IR here instead of stdout");
  opt->add_flag("--stats", stats, "Per-pass counters and PRE reports on stderr");
  opt->add_flag("--dump-sets", dump_sets, "All 19 LCM sets per block on stderr");
  opt->add_flag("--dump-vn", dump_vn, "Value numbers, leaders and occurrence counts on stderr");
  opt->add_option("--dot", dot_dir, "Write one CFG .dot file per function into this directory");
  opt->add_option("--sets", sets, "Set families to annotate in --dot output");

  auto* run = app.add_subcommand("run", "Interpret a function");
  run->add_option("input", input)->required();
  choice.attach(run);
  run->add_option("--func", func, "Function name (default: first)");
  run->add_option("--args", args, "Comma-separated arguments");
  run->add_option("--tape", tape, "Comma-separated opaque input values");
  run->add_option("--fuel", fuel, "Step limit");
  run->add_flag("--kv", kv, "key=value output");

  auto* diff = app.add_subcommand("diff", "Compare two modules, or BASE against LCM-PRE of one module");
  diff->add_option("before", input)->required();
  diff->add_option("after", after);
  diff->add_option("--func", func);
  diff->add_option("--case", cases, "args:tape, e.g. 2,3:1,0 (repeatable)");
  diff->add_option("--fuel", fuel);

  auto* st = app.add_subcommand("stats", "PRE statistics per function and corpus averages");
  st->add_option("inputs", inputs)->required();
  choice.attach(st);

  auto* dot = app.add_subcommand("dot", "Write CFG .dot files annotated with LCM sets");
  dot->add_option("input", input)->required();
  choice.attach(dot);
  dot->add_option("-o,--output", dot_dir, "Output directory")->required();
  dot->add_option("--sets", sets, "Set families, e.g. ANTIN,INSERTOUT");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*opt) return cmd_opt(input, choice, output, stats, dump_sets, dump_vn, dot_dir, sets);
    if (*run) return cmd_run(input, choice, func, args, tape, fuel, kv);
    if (*diff) return cmd_diff(input, after, func, cases, fuel);
    if (*st) return cmd_stats(inputs, choice);
    if (*dot) return cmd_dot(input, choice, dot_dir, sets);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
