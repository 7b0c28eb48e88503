#pragma once

// SSA intermediate representation: a module of functions, each a CFG of
// basic blocks. Every value is a 64-bit two's-complement integer.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace vnlcm {

enum class Opcode : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  And,
  Or,
  Xor,
  Cmp,
  Const,
  Opaque,
  Phi,
  Alloca,
  Load,
  Store,
  Print,
  Jmp,
  Br,
  Ret,
};

enum class CmpCode : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

struct Operand {
  enum class Kind : std::uint8_t { Value, Param, Literal };

  Kind kind = Kind::Literal;
  std::string name;
  std::int64_t literal = 0;

  static Operand value(std::string n) { return {Kind::Value, std::move(n), 0}; }
  static Operand param(std::string n) { return {Kind::Param, std::move(n), 0}; }
  static Operand lit(std::int64_t v) { return {Kind::Literal, {}, v}; }

  bool is_literal() const { return kind == Kind::Literal; }
  bool is_value() const { return kind == Kind::Value; }
  bool is_param() const { return kind == Kind::Param; }
  bool refers_to(std::string_view n) const { return !is_literal() && name == n; }

  friend bool operator==(const Operand&, const Operand&) = default;
};

/// One IR instruction.
///
/// `labels` holds the incoming block of each phi operand (parallel to
/// `operands`) or the targets of a terminator. `Const` keeps its value as a
/// single literal operand. `result` is empty for store, print and terminators.
struct Instruction {
  std::string result;
  Opcode op = Opcode::Ret;
  CmpCode cc = CmpCode::Eq;
  std::vector<Operand> operands;
  std::vector<std::string> labels;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Block {
  std::string label;
  std::vector<Instruction> phis;
  std::vector<Instruction> body;
  std::optional<Instruction> terminator;

  /// Distinct successor labels in terminator operand order.
  std::vector<std::string> successors() const;

  friend bool operator==(const Block&, const Block&) = default;
};

struct Function {
  std::string name;
  std::vector<std::string> params;
  std::vector<Block> blocks;

  const Block& entry() const { return blocks.front(); }
  Block& entry() { return blocks.front(); }

  Block* find_block(std::string_view label);
  const Block* find_block(std::string_view label) const;
  bool has_param(std::string_view n) const;

  friend bool operator==(const Function&, const Function&) = default;
};

struct Module {
  std::vector<Function> functions;

  Function* find_function(std::string_view name);
  const Function* find_function(std::string_view name) const;

  friend bool operator==(const Module&, const Module&) = default;
};

bool is_candidate(Opcode op);
bool is_terminator(Opcode op);
/// Pure and value-producing without reading memory or input.
bool is_pure(Opcode op);
bool is_commutative(Opcode op, CmpCode cc);

std::string_view opcode_name(Opcode op);
std::string_view cmp_name(CmpCode cc);
std::optional<Opcode> binop_from_name(std::string_view s);
std::optional<CmpCode> cmp_from_name(std::string_view s);

/// Wrapping evaluation of a candidate operation. Returns nullopt on division
/// by zero; INT64_MIN / -1 wraps to INT64_MIN.
std::optional<std::int64_t> evaluate(Opcode op, CmpCode cc, std::int64_t lhs,
                                     std::int64_t rhs);

/// Visits phis, body and terminator of every block in layout order.
void for_each_instruction(Function& f, const std::function<void(Block&, Instruction&)>& fn);
void for_each_instruction(const Function& f,
                          const std::function<void(const Block&, const Instruction&)>& fn);

/// Rewrites every operand naming `name` to `replacement`. Returns the number
/// of operands rewritten.
std::size_t replace_all_uses(Function& f, std::string_view name, const Operand& replacement);

/// Number of operands (including phi incomings) that reference `name`.
std::size_t count_uses(const Function& f, std::string_view name);

/// Replaces every occurrence of block label `from` in phi incoming lists.
void retarget_phi_incoming(Block& b, std::string_view from, std::string_view to);

/// Replaces terminator targets equal to `from` with `to`.
void retarget_terminator(Block& b, std::string_view from, std::string_view to);

/// Generates SSA names and labels that do not collide with anything already
/// present in a function.
class NameGen {
 public:
  explicit NameGen(const Function& f);

  std::string value(std::string_view stem);
  std::string label(std::string_view stem);

 private:
  std::string fresh(std::unordered_set<std::string>& taken, std::string_view stem);

  std::unordered_set<std::string> values_;
  std::unordered_set<std::string> labels_;
};

}  // namespace vnlcm
