#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trsq/rng.hpp"

namespace trsq {

// Fixed-length binary string with the padded-read convention used throughout:
// reads past the end return 0, matching the infinite zero suffix of traces.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t n, int fill = 0) : bits_(n, check_bit(fill)) {}

  static BitString from_string(std::string_view s) {
    BitString x(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '0' && s[i] != '1')
        throw std::invalid_argument("BitString: expected only '0'/'1'");
      x.bits_[i] = std::uint8_t(s[i] - '0');
    }
    return x;
  }

  static BitString random(std::size_t n, Rng& rng) {
    BitString x(n);
    for (auto& b : x.bits_) b = std::uint8_t(rng.next_u64() & 1u);
    return x;
  }

  // LSB-first packing: bit i of `word` is x[i].
  static BitString from_word(std::uint64_t word, std::size_t n) {
    if (n > 64) throw std::invalid_argument("BitString::from_word: n > 64");
    BitString x(n);
    for (std::size_t i = 0; i < n; ++i) x.bits_[i] = (word >> i) & 1u;
    return x;
  }

  std::uint64_t as_word() const {
    if (size() > 64) throw std::logic_error("BitString::as_word: n > 64");
    std::uint64_t w = 0;
    for (std::size_t i = 0; i < size(); ++i) w |= std::uint64_t(bits_[i]) << i;
    return w;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }

  // Padded read: zero beyond the last real position.
  int get(std::size_t i) const noexcept { return i < bits_.size() ? bits_[i] : 0; }
  int operator[](std::size_t i) const noexcept { return get(i); }

  void set(std::size_t i, int v) { bits_.at(i) = check_bit(v); }
  void push_back(int v) { bits_.push_back(check_bit(v)); }

  BitString with_flipped(std::size_t i) const {
    BitString x = *this;
    x.set(i, 1 - x.get(i));
    return x;
  }

  std::size_t count_ones() const noexcept {
    std::size_t c = 0;
    for (auto b : bits_) c += b;
    return c;
  }

  std::string str() const {
    std::string s(size(), '0');
    for (std::size_t i = 0; i < size(); ++i) s[i] = char('0' + bits_[i]);
    return s;
  }

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  static std::uint8_t check_bit(int v) {
    if (v != 0 && v != 1) throw std::invalid_argument("BitString: bit not 0/1");
    return std::uint8_t(v);
  }

  std::vector<std::uint8_t> bits_;
};

// ---------------------------------------------------------------------------
// Window patterns w in {0,1}^ell are indexed by widx = sum_k w_k 2^k, i.e.
// the first window position is the least significant bit. String form is
// "w_0 w_1 ... w_{ell-1}" read left to right. Both encodings appear in
// artifacts, so keep them in one place.

inline int pattern_bit(unsigned widx, unsigned k) noexcept {
  return int((widx >> k) & 1u);
}

inline std::string pattern_str(unsigned widx, unsigned ell) {
  std::string s(ell, '0');
  for (unsigned k = 0; k < ell; ++k) s[k] = char('0' + pattern_bit(widx, k));
  return s;
}

inline unsigned pattern_from_str(std::string_view s) {
  if (s.size() > 31) throw std::invalid_argument("pattern_from_str: too long");
  unsigned w = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] != '0' && s[k] != '1')
      throw std::invalid_argument("pattern_from_str: expected only '0'/'1'");
    w |= unsigned(s[k] - '0') << k;
  }
  return w;
}

inline unsigned popcount32(std::uint32_t v) noexcept {
  return unsigned(__builtin_popcount(v));
}

}  // namespace trsq
