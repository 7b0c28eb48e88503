#include "vnlcm/bitvector.hpp"

#include <bit>
#include <stdexcept>

namespace vnlcm {

BitVector::BitVector(std::size_t width, bool fill)
    : width_(width), words_((width + 63) / 64, fill ? ~std::uint64_t{0} : 0) {
  clear_tail();
}

void BitVector::clear_tail() {
  if (width_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (width_ % 64)) - 1;
}

void BitVector::check_width(const BitVector& o) const {
  if (o.width_ != width_)
    throw std::invalid_argument("bit vector width mismatch: " + std::to_string(width_) + " vs " +
                                std::to_string(o.width_));
}

bool BitVector::test(std::size_t i) const {
  if (i >= width_) throw std::out_of_range("bit index " + std::to_string(i));
  return (words_[i / 64] >> (i % 64)) & 1;
}

void BitVector::set(std::size_t i, bool v) {
  if (i >= width_) throw std::out_of_range("bit index " + std::to_string(i));
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (v)
    words_[i / 64] |= mask;
  else
    words_[i / 64] &= ~mask;
}

std::size_t BitVector::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitVector::subset_of(const BitVector& o) const {
  check_width(o);
  for (std::size_t k = 0; k < words_.size(); ++k)
    if (words_[k] & ~o.words_[k]) return false;
  return true;
}

std::vector<std::size_t> BitVector::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < width_; ++i)
    if (test(i)) out.push_back(i);
  return out;
}

BitVector BitVector::operator~() const {
  BitVector r = *this;
  for (auto& w : r.words_) w = ~w;
  r.clear_tail();
  return r;
}

BitVector& BitVector::operator&=(const BitVector& o) {
  check_width(o);
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
  return *this;
}

BitVector& BitVector::operator|=(const BitVector& o) {
  check_width(o);
  for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
  return *this;
}

std::string BitVector::to_string() const {
  std::string s;
  s.reserve(width_);
  for (std::size_t i = 0; i < width_; ++i) s += test(i) ? '1' : '0';
  return s;
}

}  // namespace vnlcm
