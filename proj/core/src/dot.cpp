#include "vnlcm/dot.hpp"

#include <sstream>

#include "vnlcm/printer.hpp"

namespace vnlcm {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\' || c == '{' || c == '}' || c == '<' || c == '>' || c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const Function& f, const PreArtifacts* art, const std::vector<std::string>& families) {
  std::ostringstream os;
  os << "digraph \"" << escape(f.name) << "\" {\n  node [shape=record, fontname=monospace];\n";
  for (const auto& b : f.blocks) {
    os << "  \"" << escape(b.label) << "\" [label=\"{" << escape(b.label) << ":\\l";
    for (const auto& i : b.phis) os << escape(print_instruction(i)) << "\\l";
    for (const auto& i : b.body) os << escape(print_instruction(i)) << "\\l";
    if (b.terminator) os << escape(print_instruction(*b.terminator)) << "\\l";
    if (art) {
      std::size_t bi = art->cfg.block(b.label);
      if (bi != kNoBlock) {
        os << '|';
        for (const auto& name : families) {
          const auto* fam = art->sets.find(name);
          if (!fam) continue;
          os << escape(name) << " = ";
          bool first = true;
          for (std::size_t s : (*fam)[bi].indices()) {
            os << (first ? "" : ",") << 'v' << art->slots.vn_of_slot[s];
            first = false;
          }
          os << "\\l";
        }
      }
    }
    os << "}\"];\n";
  }
  for (const auto& b : f.blocks)
    for (const auto& s : b.successors()) os << "  \"" << escape(b.label) << "\" -> \"" << escape(s) << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace vnlcm
