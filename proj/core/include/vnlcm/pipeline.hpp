#pragma once

// Named pass sequences over a module, with validation after each pass.

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vnlcm/ir.hpp"
#include "vnlcm/pre.hpp"

namespace vnlcm {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// mem2reg, loop-rotate, split-crit, lcm, simplifycfg, reassociate.
const std::vector<std::string>& known_passes();

/// Splits a comma-separated list; throws PipelineError on unknown names.
std::vector<std::string> parse_pass_list(std::string_view text);

/// "base" and "lcm-pre" (case-insensitive).
std::vector<std::string> named_pipeline(std::string_view name);

struct PassRecord {
  std::string pass;
  std::string function;
  std::map<std::string, std::size_t> counters;
  std::vector<std::string> diagnostics;
};

struct PipelineResult {
  std::vector<PassRecord> passes;
  std::vector<PreReport> pre;
};

struct PipelineOptions {
  bool validate = true;
  // Called after each lcm pass with its intermediate state.
  std::function<void(const Function&, const PreArtifacts&)> on_pre;
};

/// Applies the passes in order to every function. Throws PipelineError when
/// a pass leaves a function that fails validation.
PipelineResult run_pipeline(Module& m, const std::vector<std::string>& passes, const PipelineOptions& opts = {});

}  // namespace vnlcm
