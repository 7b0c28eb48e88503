#pragma once

// Hash-based global value numbering over reverse post-order, with leader
// expressions and occurrence lists per value number.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vnlcm/cfg.hpp"
#include "vnlcm/ir.hpp"

namespace vnlcm {

using ValueNumber = std::uint32_t;
inline constexpr ValueNumber kNoValue = 0;

struct Occurrence {
  std::string name;   // result of the candidate instruction
  std::size_t block;  // index into Function::blocks

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

/// Canonical expression key: opcode plus operand value numbers, sorted for
/// commutative operators.
struct ExprKey {
  Opcode op = Opcode::Add;
  CmpCode cc = CmpCode::Eq;
  ValueNumber lhs = kNoValue;
  ValueNumber rhs = kNoValue;

  auto operator<=>(const ExprKey&) const = default;
};

struct ValueInfo {
  enum class Kind { Root, Constant, Expression };

  Kind kind = Kind::Root;
  std::int64_t constant = 0;     // Constant
  ExprKey expr;                  // Expression
  std::string root;              // Root: the parameter / instruction that introduced it
  std::vector<Occurrence> occurrences;  // candidate instructions, RPO order

  const Occurrence* leader() const { return occurrences.empty() ? nullptr : &occurrences.front(); }
};

class ValueTable {
 public:
  ValueNumber of_name(const std::string& name) const;
  ValueNumber of_literal(std::int64_t v) const;
  ValueNumber of(const Operand& op) const;

  const ValueInfo& info(ValueNumber vn) const { return values_.at(vn); }
  ValueInfo& info(ValueNumber vn) { return values_.at(vn); }
  std::optional<std::int64_t> constant(ValueNumber vn) const;

  ValueNumber max_vn() const { return static_cast<ValueNumber>(values_.size() - 1); }
  const std::unordered_map<std::string, ValueNumber>& names() const { return by_name_; }

  /// Leader instruction name of vn; nullptr when vn has no candidate occurrence.
  const std::string* leader_of(ValueNumber vn) const;

  // Construction interface used by the numbering pass.
  ValueNumber fresh_root(const std::string& name);
  ValueNumber literal(std::int64_t v);
  ValueNumber expression(const ExprKey& key, bool& existed);
  void bind(const std::string& name, ValueNumber vn) { by_name_[name] = vn; }
  void forget(const std::string& name) { by_name_.erase(name); }

 private:
  std::vector<ValueInfo> values_{ValueInfo{}};  // index 0 unused
  std::unordered_map<std::string, ValueNumber> by_name_;
  std::map<std::int64_t, ValueNumber> by_literal_;
  std::map<ExprKey, ValueNumber> by_expr_;
};

struct VnOptions {
  bool forced_results = true;   // and/or/cmp eq/ne with equal operands
  bool fold_constants = true;   // all operands constant
  bool identities = true;       // x+0, x*1, x*0, ...
  bool phi_merge = true;        // phi whose incomings share one number
  bool canonicalize = false;    // rewrite commutative operand order by number
};

struct VnStats {
  std::size_t forced = 0;
  std::size_t folded = 0;
  std::size_t simplified = 0;
  std::size_t phis_merged = 0;
  std::size_t canonicalized = 0;
};

/// Numbers every reachable value of `f`, deleting instructions whose result
/// is forced, constant or an identity and rewriting their uses. The function
/// is modified in place; the table describes the result.
ValueTable assign_value_numbers(Function& f, const CfgInfo& cfg, const VnOptions& opts = {},
                                VnStats* stats = nullptr);

/// Stand-alone constant folding, identity simplification and commutative
/// operand canonicalization.
VnStats reassociate(Function& f);

/// Per-instruction listing of value numbers, leaders and occurrence counts.
std::string dump_value_numbers(const Function& f, const ValueTable& vt);

}  // namespace vnlcm
