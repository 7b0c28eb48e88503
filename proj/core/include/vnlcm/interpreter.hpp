#pragma once

// Reference executor: observable behavior plus dynamic operation counts.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vnlcm/ir.hpp"

namespace vnlcm {

inline constexpr std::uint64_t kDefaultFuel = 10'000'000;

enum class ExitStatus { Returned, TrappedDivZero, FuelExhausted };

std::string_view exit_status_name(ExitStatus s);

struct Behavior {
  std::vector<std::int64_t> printed;
  std::optional<std::int64_t> returned;
  ExitStatus status = ExitStatus::Returned;

  friend bool operator==(const Behavior&, const Behavior&) = default;
};

struct ExecProfile {
  Behavior behavior;
  std::map<std::string, std::uint64_t> op_counts;  // opcode name -> executions
  std::uint64_t candidate_total = 0;
  std::uint64_t steps = 0;
  std::uint64_t uninit_loads = 0;  // loads from a slot never stored to

  std::uint64_t count(std::string_view op) const;
};

class ExecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Called after every value-producing instruction with its result. `read`
/// returns the current value of any name (nullopt if not yet defined).
using ExecObserver = std::function<void(const Instruction& inst, std::int64_t value,
                                        const std::function<std::optional<std::int64_t>(std::string_view)>& read)>;

/// Runs `func` from its entry block. `opaque` consumes the tape in order and
/// yields 0 once it is exhausted. Every executed instruction, phis and
/// terminators included, costs one step of fuel.
ExecProfile execute(const Module& m, std::string_view func, const std::vector<std::int64_t>& args,
                    const std::vector<std::int64_t>& tape, std::uint64_t fuel = kDefaultFuel,
                    const ExecObserver* observer = nullptr);

struct ExecCase {
  std::vector<std::int64_t> args;
  std::vector<std::int64_t> tape;
};

struct DiffVerdict {
  struct Entry {
    bool equal = false;
    std::uint64_t candidates_before = 0;
    std::uint64_t candidates_after = 0;
    Behavior before;
    Behavior after;
  };
  std::vector<Entry> cases;
  bool pass = true;
};

DiffVerdict differential(const Module& before, const Module& after, std::string_view func,
                         const std::vector<ExecCase>& cases, std::uint64_t fuel = kDefaultFuel);

std::string describe(const Behavior& b);

}  // namespace vnlcm
