#include "vnlcm/interpreter.hpp"

#include <sstream>
#include <unordered_map>

namespace vnlcm {

std::string_view exit_status_name(ExitStatus s) {
  switch (s) {
    case ExitStatus::Returned: return "returned";
    case ExitStatus::TrappedDivZero: return "trapped-div0";
    case ExitStatus::FuelExhausted: return "fuel-exhausted";
  }
  return "?";
}

std::uint64_t ExecProfile::count(std::string_view op) const {
  auto it = op_counts.find(std::string(op));
  return it == op_counts.end() ? 0 : it->second;
}

namespace {

struct Ref {
  bool literal = true;
  std::int64_t value = 0;
  std::size_t reg = 0;
};

struct Step {
  const Instruction* src = nullptr;
  std::size_t result = 0;  // register, valid when src->result is nonempty
  std::vector<Ref> args;
  std::vector<std::size_t> targets;  // block indices for jmp/br
};

struct PhiEdge {
  std::size_t from = 0;
  std::vector<Ref> values;  // one per phi of the block, in order
};

struct CompiledBlock {
  std::vector<Step> phis;
  std::vector<PhiEdge> edges;
  std::vector<Step> body;  // ends with the terminator
};

class Program {
 public:
  explicit Program(const Function& f) {
    for (const auto& p : f.params) reg(p);
    for_each_instruction(f, [&](const Block&, const Instruction& i) {
      if (!i.result.empty()) reg(i.result);
    });
    std::unordered_map<std::string, std::size_t> block_of;
    for (std::size_t b = 0; b < f.blocks.size(); ++b) block_of[f.blocks[b].label] = b;
    auto ref = [&](const Operand& op) {
      Ref r;
      if (op.is_literal()) {
        r.value = op.literal;
      } else {
        r.literal = false;
        auto it = regs_.find(op.name);
        if (it == regs_.end()) throw ExecError("use of undefined name %" + op.name + " in @" + f.name);
        r.reg = it->second;
      }
      return r;
    };
    auto step = [&](const Instruction& i) {
      Step s;
      s.src = &i;
      if (!i.result.empty()) s.result = regs_.at(i.result);
      if (i.op != Opcode::Phi)
        for (const auto& op : i.operands) s.args.push_back(ref(op));
      for (const auto& l : i.labels) {
        if (i.op == Opcode::Phi) break;
        auto it = block_of.find(l);
        if (it == block_of.end()) throw ExecError("unknown label " + l + " in @" + f.name);
        s.targets.push_back(it->second);
      }
      return s;
    };
    blocks_.resize(f.blocks.size());
    for (std::size_t b = 0; b < f.blocks.size(); ++b) {
      const Block& blk = f.blocks[b];
      CompiledBlock& cb = blocks_[b];
      for (const auto& phi : blk.phis) cb.phis.push_back(step(phi));
      // One edge record per distinct incoming label.
      for (std::size_t k = 0; k < blk.phis.size(); ++k) {
        const Instruction& phi = blk.phis[k];
        for (std::size_t j = 0; j < phi.labels.size(); ++j) {
          auto it = block_of.find(phi.labels[j]);
          if (it == block_of.end()) continue;
          PhiEdge* e = nullptr;
          for (auto& x : cb.edges)
            if (x.from == it->second) e = &x;
          if (!e) {
            cb.edges.push_back({it->second, std::vector<Ref>(blk.phis.size(), Ref{})});
            e = &cb.edges.back();
          }
          e->values[k] = ref(phi.operands[j]);
        }
      }
      for (const auto& i : blk.body) cb.body.push_back(step(i));
      if (!blk.terminator) throw ExecError("no terminator in @" + f.name + ":" + blk.label);
      cb.body.push_back(step(*blk.terminator));
    }
  }

  std::size_t registers() const { return names_.size(); }
  const std::vector<CompiledBlock>& blocks() const { return blocks_; }
  const std::unordered_map<std::string, std::size_t>& regs() const { return regs_; }

 private:
  void reg(const std::string& name) {
    if (regs_.emplace(name, names_.size()).second) names_.push_back(name);
  }

  std::unordered_map<std::string, std::size_t> regs_;
  std::vector<std::string> names_;
  std::vector<CompiledBlock> blocks_;
};

}  // namespace

ExecProfile execute(const Module& m, std::string_view func, const std::vector<std::int64_t>& args,
                    const std::vector<std::int64_t>& tape, std::uint64_t fuel, const ExecObserver* observer) {
  const Function* f = m.find_function(func);
  if (!f) throw ExecError("unknown function @" + std::string(func));
  if (args.size() != f->params.size())
    throw ExecError("@" + f->name + " expects " + std::to_string(f->params.size()) + " arguments, got " +
                    std::to_string(args.size()));
  Program prog(*f);
  std::vector<std::int64_t> regs(prog.registers(), 0);
  std::vector<char> defined(prog.registers(), 0);
  for (std::size_t k = 0; k < args.size(); ++k) {
    regs[k] = args[k];
    defined[k] = 1;
  }
  std::unordered_map<std::int64_t, std::int64_t> memory;
  std::int64_t next_slot = 1;
  std::size_t tape_pos = 0;

  std::function<std::optional<std::int64_t>(std::string_view)> read = [&](std::string_view name)
      -> std::optional<std::int64_t> {
    auto it = prog.regs().find(std::string(name));
    if (it == prog.regs().end() || !defined[it->second]) return std::nullopt;
    return regs[it->second];
  };

  ExecProfile prof;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(Opcode::Ret) + 1, 0);
  auto val = [&](const Ref& r) { return r.literal ? r.value : regs[r.reg]; };
  auto set = [&](const Step& s, std::int64_t v) {
    regs[s.result] = v;
    defined[s.result] = 1;
    if (observer) (*observer)(*s.src, v, read);
  };
  auto finish = [&](ExitStatus st) {
    prof.behavior.status = st;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (!counts[k]) continue;
      auto op = static_cast<Opcode>(k);
      prof.op_counts[std::string(opcode_name(op))] = counts[k];
      if (is_candidate(op)) prof.candidate_total += counts[k];
    }
    return prof;
  };

  std::size_t cur = 0;
  std::size_t prev = 0;
  bool first = true;
  std::vector<std::int64_t> incoming;
  for (;;) {
    const CompiledBlock& cb = prog.blocks()[cur];
    if (!cb.phis.empty()) {
      if (first) throw ExecError("entry block of @" + f->name + " has phis");
      const PhiEdge* edge = nullptr;
      for (const auto& e : cb.edges)
        if (e.from == prev) edge = &e;
      if (!edge) throw ExecError("phi in @" + f->name + " has no incoming for the taken edge");
      incoming.clear();
      for (const auto& r : edge->values) incoming.push_back(val(r));
      for (std::size_t k = 0; k < cb.phis.size(); ++k) {
        if (prof.steps >= fuel) return finish(ExitStatus::FuelExhausted);
        ++prof.steps;
        ++counts[static_cast<std::size_t>(Opcode::Phi)];
        set(cb.phis[k], incoming[k]);
      }
    }
    first = false;
    std::size_t next = cur;
    for (const Step& s : cb.body) {
      if (prof.steps >= fuel) return finish(ExitStatus::FuelExhausted);
      ++prof.steps;
      const Instruction& i = *s.src;
      ++counts[static_cast<std::size_t>(i.op)];
      switch (i.op) {
        case Opcode::Const:
          set(s, s.args[0].value);
          break;
        case Opcode::Opaque:
          set(s, tape_pos < tape.size() ? tape[tape_pos++] : 0);
          break;
        case Opcode::Alloca:
          set(s, next_slot++);
          break;
        case Opcode::Load: {
          auto it = memory.find(val(s.args[0]));
          if (it == memory.end()) ++prof.uninit_loads;
          set(s, it == memory.end() ? 0 : it->second);
          break;
        }
        case Opcode::Store:
          memory[val(s.args[1])] = val(s.args[0]);
          break;
        case Opcode::Print:
          prof.behavior.printed.push_back(val(s.args[0]));
          break;
        case Opcode::Jmp:
          next = s.targets[0];
          break;
        case Opcode::Br:
          next = val(s.args[0]) != 0 ? s.targets[0] : s.targets[1];
          break;
        case Opcode::Ret:
          prof.behavior.returned = val(s.args[0]);
          return finish(ExitStatus::Returned);
        case Opcode::Phi:
          break;
        default: {
          auto v = evaluate(i.op, i.cc, val(s.args[0]), val(s.args[1]));
          if (!v) return finish(ExitStatus::TrappedDivZero);
          set(s, *v);
          break;
        }
      }
    }
    prev = cur;
    cur = next;
  }
}

DiffVerdict differential(const Module& before, const Module& after, std::string_view func,
                         const std::vector<ExecCase>& cases, std::uint64_t fuel) {
  DiffVerdict v;
  for (const auto& c : cases) {
    ExecProfile a = execute(before, func, c.args, c.tape, fuel);
    ExecProfile b = execute(after, func, c.args, c.tape, fuel);
    DiffVerdict::Entry e;
    e.equal = a.behavior == b.behavior;
    e.candidates_before = a.candidate_total;
    e.candidates_after = b.candidate_total;
    e.before = a.behavior;
    e.after = b.behavior;
    v.pass = v.pass && e.equal;
    v.cases.push_back(std::move(e));
  }
  return v;
}

std::string describe(const Behavior& b) {
  std::ostringstream os;
  os << "status=" << exit_status_name(b.status) << " printed=[";
  for (std::size_t k = 0; k < b.printed.size(); ++k) os << (k ? "," : "") << b.printed[k];
  os << "] returned=";
  if (b.returned) os << *b.returned;
  else os << "none";
  return os.str();
}

}  // namespace vnlcm
