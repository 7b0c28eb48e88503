#include "vnlcm/pipeline.hpp"

#include <algorithm>
#include <cctype>

#include "vnlcm/normalize.hpp"
#include "vnlcm/printer.hpp"
#include "vnlcm/validate.hpp"
#include "vnlcm/value_numbering.hpp"

namespace vnlcm {

const std::vector<std::string>& known_passes() {
  static const std::vector<std::string> passes{"mem2reg", "loop-rotate", "split-crit",
                                               "lcm",     "simplifycfg", "reassociate"};
  return passes;
}

std::vector<std::string> parse_pass_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string name(text.substr(pos, comma - pos));
    name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }),
               name.end());
    if (!name.empty()) {
      const auto& known = known_passes();
      if (std::find(known.begin(), known.end(), name) == known.end())
        throw PipelineError("unknown pass '" + name + "'");
      out.push_back(name);
    }
    pos = comma + 1;
  }
  return out;
}

std::vector<std::string> named_pipeline(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "base") return {"mem2reg", "loop-rotate", "reassociate", "mem2reg", "simplifycfg"};
  if (n == "lcm-pre" || n == "lcm") return {"mem2reg", "loop-rotate", "reassociate", "lcm", "mem2reg", "simplifycfg"};
  throw PipelineError("unknown pipeline '" + std::string(name) + "' (expected base or lcm-pre)");
}

namespace {

PassRecord run_one(Function& f, const std::string& pass, PipelineResult& result, const PipelineOptions& opts) {
  PassRecord rec;
  rec.pass = pass;
  rec.function = f.name;
  if (pass == "mem2reg") {
    auto st = mem2reg_promote(f);
    rec.counters = {{"promoted", st.promoted},
                    {"phis_inserted", st.phis_inserted},
                    {"loads_removed", st.loads_removed},
                    {"stores_removed", st.stores_removed}};
    rec.diagnostics = std::move(st.diagnostics);
  } else if (pass == "loop-rotate") {
    auto st = rotate_loops(f);
    rec.counters = {{"rotated", st.rotated}};
    rec.diagnostics = std::move(st.diagnostics);
  } else if (pass == "split-crit") {
    rec.counters = {{"split", split_critical_edges(f)}};
  } else if (pass == "simplifycfg") {
    auto st = simplify_cfg(f);
    rec.counters = {{"unreachable_removed", st.unreachable_removed},
                    {"blocks_merged", st.blocks_merged},
                    {"jumps_folded", st.jumps_folded},
                    {"branches_folded", st.branches_folded},
                    {"dead_removed", st.dead_removed}};
  } else if (pass == "reassociate") {
    auto st = reassociate(f);
    rec.counters = {{"folded", st.folded}, {"simplified", st.simplified}, {"canonicalized", st.canonicalized}};
  } else if (pass == "lcm") {
    PreArtifacts art;
    PreReport rep = pre_pass(f, opts.on_pre ? &art : nullptr);
    rec.counters = {{"insertions", rep.insertions.size()},
                    {"replacements", rep.replacements.size()},
                    {"skipped_vns", rep.skipped_vns.size()},
                    {"lcse_removed", rep.lcse_removed},
                    {"split_edges", rep.split_edges},
                    {"width", rep.width},
                    {"max_vn", rep.max_vn}};
    if (opts.on_pre) opts.on_pre(f, art);
    result.pre.push_back(std::move(rep));
  } else {
    throw PipelineError("unknown pass '" + pass + "'");
  }
  return rec;
}

}  // namespace

PipelineResult run_pipeline(Module& m, const std::vector<std::string>& passes, const PipelineOptions& opts) {
  PipelineResult result;
  for (auto& f : m.functions) {
    for (const auto& pass : passes) {
      result.passes.push_back(run_one(f, pass, result, opts));
      if (!opts.validate) continue;
      auto diags = validate(f);
      if (!diags.empty()) {
        std::string msg = "validation failed after " + pass + " on @" + f.name + ":";
        for (const auto& d : diags) msg += "\n  " + d;
        msg += "\n" + print_function(f);
        throw PipelineError(msg);
      }
    }
  }
  return result;
}

}  // namespace vnlcm
