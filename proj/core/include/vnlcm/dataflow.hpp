#pragma once

// Generic iterative bit-vector dataflow solver.
//
//   forward:  IN(b)  = alpha(b) | (b == entry ? bottom : MEET_{p in pred(b)} beta(p))
//             OUT(b) = gamma(b)
//   backward: OUT(b) = alpha(b) | (b is an exit ? bottom : MEET_{s in succ(b)} beta(s))
//             IN(b)  = gamma(b)
//
// beta and gamma read the evolving solution, so one solver covers
// self-referential plug-ins such as beta(p) = ~XCOMP(p) & DELAYOUT(p).

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vnlcm/bitvector.hpp"
#include "vnlcm/cfg.hpp"

namespace vnlcm {

enum class Direction { Forward, Backward };
enum class Meet { Intersection, Union };

struct Solution {
  std::vector<BitVector> in;
  std::vector<BitVector> out;
  std::size_t visits = 0;
};

struct DataflowSpec {
  using LocalFn = std::function<BitVector(std::size_t block)>;
  using SolutionFn = std::function<BitVector(std::size_t block, const Solution& current)>;

  std::string name;
  Direction direction = Direction::Forward;
  Meet meet = Meet::Intersection;
  std::size_t width = 0;
  LocalFn alpha;  // empty means the empty set
  SolutionFn beta;
  SolutionFn gamma;
  BitVector bottom;
  BitVector top;
};

/// Which end of the traversal the worklist starts from. Natural is RPO for
/// forward problems and post-order for backward ones.
enum class WorklistOrder { Natural, Reversed };

class DataflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Meet over an empty operand list: intersection gives the universe, union
/// the empty set.
BitVector meet_identity(Meet meet, std::size_t width);
void meet_into(Meet meet, BitVector& acc, const BitVector& v);

/// Worklist fixpoint. All interior sets start at `top`. Throws DataflowError
/// if it needs more than (width + 1) * blocks * 4 block visits, which only a
/// non-monotone plug-in can cause.
Solution solve(const CfgInfo& cfg, const DataflowSpec& spec, WorklistOrder order = WorklistOrder::Natural);

}  // namespace vnlcm
