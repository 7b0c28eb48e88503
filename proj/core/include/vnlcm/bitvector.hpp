#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace vnlcm {

/// Fixed-width set of slot indices. Binary operations require equal widths;
/// complement is relative to the width.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t width, bool fill = false);

  static BitVector empty(std::size_t width) { return BitVector(width, false); }
  static BitVector universe(std::size_t width) { return BitVector(width, true); }

  std::size_t width() const { return width_; }
  bool test(std::size_t i) const;
  void set(std::size_t i, bool v = true);
  void reset(std::size_t i) { set(i, false); }
  std::size_t count() const;
  bool none() const { return count() == 0; }
  bool all() const { return count() == width_; }
  bool subset_of(const BitVector& o) const;
  std::vector<std::size_t> indices() const;

  BitVector operator~() const;
  BitVector& operator&=(const BitVector& o);
  BitVector& operator|=(const BitVector& o);
  friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
  friend BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }
  friend bool operator==(const BitVector&, const BitVector&) = default;

  /// "0101..." with slot 0 first.
  std::string to_string() const;

 private:
  void clear_tail();
  void check_width(const BitVector& o) const;

  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace vnlcm
