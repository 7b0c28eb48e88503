#include "vnlcm/dataflow.hpp"

#include <algorithm>
#include <deque>

namespace vnlcm {

BitVector meet_identity(Meet meet, std::size_t width) {
  return meet == Meet::Intersection ? BitVector::universe(width) : BitVector::empty(width);
}

void meet_into(Meet meet, BitVector& acc, const BitVector& v) {
  if (meet == Meet::Intersection)
    acc &= v;
  else
    acc |= v;
}

namespace {

bool update(BitVector& slot, BitVector value) {
  if (slot == value) return false;
  slot = std::move(value);
  return true;
}

}  // namespace

Solution solve(const CfgInfo& cfg, const DataflowSpec& spec, WorklistOrder order) {
  const std::size_t n = cfg.size();
  const std::size_t w = spec.width;
  if (spec.top.width() != w || spec.bottom.width() != w)
    throw std::invalid_argument("dataflow spec " + spec.name + ": boundary widths differ from " +
                                std::to_string(w));

  Solution sol;
  sol.in.assign(n, spec.top);
  sol.out.assign(n, spec.top);
  if (cfg.rpo.empty()) return sol;

  const bool forward = spec.direction == Direction::Forward;
  const std::size_t entry = cfg.rpo.front();

  std::vector<std::size_t> initial(cfg.rpo.begin(), cfg.rpo.end());
  if (!forward) std::reverse(initial.begin(), initial.end());
  if (order == WorklistOrder::Reversed) std::reverse(initial.begin(), initial.end());

  std::deque<std::size_t> work(initial.begin(), initial.end());
  std::vector<char> queued(n, 0);
  for (std::size_t b : initial) queued[b] = 1;

  const std::size_t limit = (w + 1) * cfg.rpo.size() * 4;

  while (!work.empty()) {
    std::size_t b = work.front();
    work.pop_front();
    queued[b] = 0;
    if (++sol.visits > limit)
      throw DataflowError("dataflow " + spec.name + " did not converge after " + std::to_string(limit) +
                          " block visits");

    const auto& neighbours = forward ? cfg.preds[b] : cfg.succs[b];
    const bool boundary = forward ? b == entry : neighbours.empty();
    BitVector merged = boundary ? spec.bottom : meet_identity(spec.meet, w);
    if (!boundary)
      for (std::size_t x : neighbours) meet_into(spec.meet, merged, spec.beta(x, sol));
    if (spec.alpha) merged |= spec.alpha(b);

    bool changed;
    if (forward) {
      changed = update(sol.in[b], std::move(merged));
      changed |= update(sol.out[b], spec.gamma(b, sol));
    } else {
      changed = update(sol.out[b], std::move(merged));
      changed |= update(sol.in[b], spec.gamma(b, sol));
    }
    if (!changed) continue;
    for (std::size_t d : forward ? cfg.succs[b] : cfg.preds[b]) {
      if (!queued[d]) {
        queued[d] = 1;
        work.push_back(d);
      }
    }
  }
  return sol;
}

}  // namespace vnlcm
