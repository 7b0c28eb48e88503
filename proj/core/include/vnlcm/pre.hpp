#pragma once

// Value-number driven lazy code motion.

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vnlcm/bitvector.hpp"
#include "vnlcm/cfg.hpp"
#include "vnlcm/dataflow.hpp"
#include "vnlcm/ir.hpp"
#include "vnlcm/loops.hpp"
#include "vnlcm/value_numbering.hpp"

namespace vnlcm {

/// Dense bit positions for the value numbers PRE works on.
struct SlotMap {
  std::vector<ValueNumber> vn_of_slot;
  std::unordered_map<ValueNumber, std::size_t> slot_of;

  std::size_t width() const { return vn_of_slot.size(); }
  std::optional<std::size_t> slot(ValueNumber vn) const;
};

/// Slots go to value numbers with two or more occurrences, or one occurrence
/// inside a natural loop, in ascending VN order. Divisions are left out
/// unless the divisor is a known nonzero constant, since hoisting one could
/// move a trap ahead of observable output.
SlotMap allocate_slots(const ValueTable& vt, const LoopInfo& li);

struct LocalProperties {
  std::vector<BitVector> transp;
  std::vector<BitVector> antloc;
  std::vector<BitVector> xcomp;
};

/// TRANSP(v,B) is false iff B defines (phis included) an operand of v's
/// leader. ANTLOC = Eval & TRANSP, XCOMP = Eval & ~TRANSP.
LocalProperties compute_local_properties(const Function& f, const CfgInfo& cfg, const ValueTable& vt,
                                         const SlotMap& sm);

struct LcmSets {
  std::size_t width = 0;
  std::vector<BitVector> transp, antloc, xcomp;
  std::vector<BitVector> antin, antout;
  std::vector<BitVector> availin, availout;
  std::vector<BitVector> earlin, earlout;
  std::vector<BitVector> delayin, delayout;
  std::vector<BitVector> latestin, latestout;
  std::vector<BitVector> isoin, isoout;
  std::vector<BitVector> insertin, insertout;
  std::vector<BitVector> replacein, replaceout;
  std::size_t solver_visits = 0;

  /// All 19 families in a fixed order, with upper-case names.
  std::vector<std::pair<std::string, const std::vector<BitVector>*>> named() const;
  const std::vector<BitVector>* find(std::string_view name) const;
};

/// The four iterative problems as solver plug-ins. Delay and isolation
/// depend on the earliest sets.
DataflowSpec ant_spec(const LocalProperties& lp, std::size_t width);
DataflowSpec avail_spec(const LocalProperties& lp, std::size_t width);
DataflowSpec delay_spec(const LocalProperties& lp, const std::vector<BitVector>& earlin,
                        const std::vector<BitVector>& earlout, std::size_t width);
DataflowSpec iso_spec(const LocalProperties& lp, const std::vector<BitVector>& earlin,
                      const std::vector<BitVector>& earlout, std::size_t width);

/// Down-safety, up-safety, earliest, delay, latest, isolation and the
/// insert/replace sets. Unreachable blocks get empty sets.
LcmSets run_lcm_analyses(const CfgInfo& cfg, const LocalProperties& lp, std::size_t width,
                         WorklistOrder order = WorklistOrder::Natural);

/// Keeps only the first candidate of each value number within a block;
/// later ones are deleted and their uses redirected. Updates occurrences.
std::size_t local_cse(Function& f, ValueTable& vt);

enum class InsertPos {
  EntryAfterPhis,
  BeforeTerminator,
  // The block's own occurrence already sits at the insertion point (INSERTIN
  // with its ANTLOC occurrence, INSERTOUT with its XCOMP occurrence): it
  // stays and stores to the slot.
  AtOccurrence,
};

std::string_view insert_pos_name(InsertPos p);

/// First occurrence of vn (RPO order) whose operands are all available at
/// the insertion point, or nullopt.
std::optional<std::string> find_provider(ValueNumber vn, std::size_t block, InsertPos pos, const Function& f,
                                         const ValueTable& vt, const CfgInfo& cfg);

struct Insertion {
  std::string block;
  InsertPos pos = InsertPos::BeforeTerminator;
  ValueNumber vn = kNoValue;
  std::string provider;
  std::string clone;  // empty for AtOccurrence
};

struct Replacement {
  std::string instruction;
  std::string block;
  ValueNumber vn = kNoValue;
  std::string slot;
};

struct PreReport {
  std::string function;
  std::vector<Insertion> insertions;
  std::vector<Replacement> replacements;
  std::vector<ValueNumber> skipped_vns;
  std::size_t lcse_removed = 0;
  std::size_t companion_stores = 0;
  std::size_t split_edges = 0;
  std::size_t max_vn = 0;
  std::size_t width = 0;

  double width_ratio() const { return max_vn ? static_cast<double>(width) / static_cast<double>(max_vn) : 0.0; }
};

/// Rewrites f: one alloca per transformed VN in the entry block, provider
/// clones plus stores at insertion points, stores after surviving
/// occurrences, loads in place of replaced occurrences. Throws
/// std::logic_error if some load is not preceded by a store on every path.
void apply_insert_replace(Function& f, const CfgInfo& cfg, const ValueTable& vt, const SlotMap& sm,
                          const LcmSets& sets, PreReport& report);

/// Intermediate state of one pre_pass run, for dumps and tests.
struct PreArtifacts {
  Function analyzed;  // after edge splitting, numbering and local CSE
  CfgInfo cfg;
  LoopInfo loops;
  ValueTable vt;
  SlotMap slots;
  LcmSets sets;
};

/// split_critical_edges, value numbering, local CSE, slot allocation, local
/// properties, the LCM analyses and insert/replace.
PreReport pre_pass(Function& f, PreArtifacts* artifacts = nullptr);

/// VN-labelled listing of the 19 sets per block.
std::string dump_lcm_sets(const Function& f, const CfgInfo& cfg, const SlotMap& sm, const LcmSets& sets);

}  // namespace vnlcm
