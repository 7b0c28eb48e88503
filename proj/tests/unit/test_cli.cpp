#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "corpus.hpp"
#include "vnlcm/interpreter.hpp"
#include "vnlcm/parser.hpp"
#include "vnlcm/printer.hpp"

using namespace vnlcm;
using namespace vnlcm::testing;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into stdout.
CliRun cli(const std::string& args) {
  std::string cmd = std::string("\"") + VNLCM_CLI_PATH + "\" " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string corpus_file(const std::string& name) {
  return (fs::path(VNLCM_CORPUS_DIR) / (name + ".ir")).string();
}

std::map<std::string, std::string> key_values(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

std::string line_with(const std::string& text, const std::string& needle) {
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (line.find(needle) != std::string::npos) return line;
  return "";
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("vnlcm_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, OptMatchesLibrary) {
  for (const char* name : {"f1_diamond", "f2_while_licm", "nested_loops", "two_functions"}) {
    for (const char* pipe : {"base", "lcm-pre"}) {
      CliRun r = cli(std::string("opt --pipeline ") + pipe + " " + corpus_file(name));
      ASSERT_EQ(r.code, 0) << r.out;
      EXPECT_EQ(r.out, print_module(optimized(corpus_program(name).module, pipe))) << name << " " << pipe;
    }
  }
}

TEST(Cli, OptWithoutPassesCanonicalizes) {
  CliRun r = cli("opt " + corpus_file("f1_diamond"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, print_module(corpus_program("f1_diamond").module));
}

TEST(Cli, OptWritesOutputFile) {
  fs::path dir = scratch("out");
  fs::create_directories(dir);
  fs::path out = dir / "f1.ir";
  CliRun r = cli("opt --passes mem2reg,lcm " + corpus_file("f1_diamond") + " -o " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), print_module(with_passes(corpus_program("f1_diamond").module, "mem2reg,lcm")));
  fs::remove_all(dir);
}

TEST(Cli, OptStatsAndDumps) {
  CliRun r = cli("opt --pipeline lcm-pre --stats --dump-sets --dump-vn " + corpus_file("f1_diamond"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("pass=lcm function=f1"), std::string::npos);
  EXPECT_NE(r.out.find("INSERTOUT"), std::string::npos);
  EXPECT_NE(r.out.find("REPLACEIN"), std::string::npos);
  EXPECT_NE(r.out.find("pos=before-terminator"), std::string::npos) << r.out;
}

TEST(Cli, ParseErrorReportsPosition) {
  fs::path dir = scratch("bad");
  fs::create_directories(dir);
  fs::path bad = dir / "bad.ir";
  std::ofstream(bad) << "func @f() {\nentry:\n  %x = add 1, 2\n  %x = add 3, 4\n  ret %x\n}\n";
  CliRun r = cli("opt " + bad.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("error: 4:"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("duplicate"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, UnknownPassFails) {
  CliRun r = cli("opt --passes mem2reg,gvn " + corpus_file("f1_diamond"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("gvn"), std::string::npos);
}

TEST(Cli, MissingFileFails) {
  CliRun r = cli("run /nonexistent/file.ir");
  EXPECT_NE(r.code, 0);
}

TEST(Cli, RunKeyValues) {
  for (const char* tape : {"1", "0"}) {
    CliRun r = cli(std::string("run --pipeline lcm-pre --kv --args 2,3 --tape ") + tape + " " + corpus_file("f1_diamond"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("status=returned\n"), std::string::npos);
    EXPECT_NE(r.out.find("returned=5\n"), std::string::npos);
    EXPECT_NE(r.out.find("count.add=1\n"), std::string::npos) << r.out;
  }
}

TEST(Cli, RunMatchesInterpreter) {
  const auto& p = corpus_program("nested_loops");
  for (const auto& c : p.cases) {
    std::string args, tape;
    for (auto v : c.args) args += (args.empty() ? "" : ",") + std::to_string(v);
    for (auto v : c.tape) tape += (tape.empty() ? "" : ",") + std::to_string(v);
    std::string cmd = "run --kv " + corpus_file(p.name);
    if (!args.empty()) cmd += " --args=" + args;
    if (!tape.empty()) cmd += " --tape=" + tape;
    CliRun r = cli(cmd);
    ASSERT_EQ(r.code, 0) << r.out;
    ExecProfile prof = execute(p.module, p.entry, c.args, c.tape);
    EXPECT_NE(r.out.find("candidate_total=" + std::to_string(prof.candidate_total) + "\n"), std::string::npos);
    EXPECT_NE(r.out.find("steps=" + std::to_string(prof.steps) + "\n"), std::string::npos);
  }
}

TEST(Cli, DiffBaseAgainstLcm) {
  CliRun r = cli("diff " + corpus_file("f1_diamond") + " --case 2,3:1 --case 2,3:0");
  ASSERT_EQ(r.code, 0) << r.out;
  auto c0 = key_values(line_with(r.out, "case=0"));
  auto c1 = key_values(line_with(r.out, "case=1"));
  EXPECT_EQ(c0["equal"], "1");
  EXPECT_EQ(c0["candidates_before"], "3");
  EXPECT_EQ(c0["candidates_after"], "2");
  EXPECT_EQ(c1["candidates_before"], "2");
  EXPECT_EQ(c1["candidates_after"], "2");
  EXPECT_NE(r.out.find("verdict=pass"), std::string::npos);
}

TEST(Cli, DiffReportsMismatch) {
  fs::path dir = scratch("diff");
  fs::create_directories(dir);
  fs::path mutant = dir / "mutant.ir";
  Module m = corpus_program("f1_diamond").module;
  for (auto& b : m.functions[0].blocks)
    for (auto& i : b.body)
      if (i.op == Opcode::Add) i.op = Opcode::Sub;
  std::ofstream(mutant) << print_module(m);
  CliRun r = cli("diff " + corpus_file("f1_diamond") + " " + mutant.string() + " --case 2,3:1");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("verdict=fail"), std::string::npos);
  EXPECT_NE(r.out.find("returned=-1"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, StatsWidths) {
  CliRun r = cli("stats " + corpus_file("f1_diamond") + " " + corpus_file("straight_line"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto f1 = key_values(line_with(r.out, "function=f1"));
  ASSERT_FALSE(f1.empty()) << r.out;
  EXPECT_GE(std::stoul(f1["width"]), 1u);
  EXPECT_LT(std::stod(f1["width_ratio"]), 1.0);
  auto sl = key_values(line_with(r.out, "straight_line.ir"));
  EXPECT_EQ(sl["width"], "0");
  auto total = key_values(line_with(r.out, "functions="));
  EXPECT_EQ(total["functions"], "2");
}

TEST(Cli, StatsNeedsLcm) {
  CliRun r = cli("stats --pipeline base " + corpus_file("f1_diamond"));
  EXPECT_NE(r.code, 0);
}

TEST(Cli, DotFiles) {
  fs::path dir = scratch("dot");
  CliRun r = cli("dot --pipeline lcm-pre --sets ANTIN,INSERTOUT " + corpus_file("two_functions") + " -o " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"main.dot", "helper.dot"}) {
    std::ifstream in(dir / f);
    ASSERT_TRUE(in) << f;
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(text.str().rfind("digraph", 0), 0u);
    EXPECT_NE(text.str().find("ANTIN"), std::string::npos);
  }
  fs::remove_all(dir);
}
