#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spex {

/// A subset of the feature universe {0, ..., n-1}. Bit i set means feature i
/// is retained (unmasked). Bits at positions >= n are always clear, so
/// equality and hashing can work on raw words.
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  static Mask full(std::size_t n);
  static Mask from_indices(std::size_t n, std::span<const std::size_t> indices);
  static Mask from_indices(std::size_t n, std::initializer_list<std::size_t> indices) {
    return from_indices(n, std::span<const std::size_t>(indices.begin(), indices.size()));
  }
  /// Low `n` bits of `bits`; requires n <= 64.
  static Mask from_word(std::size_t n, std::uint64_t bits);
  /// Length-n string of '0'/'1', index 0 leftmost.
  static Mask from_bitstring(std::string_view bits);

  std::size_t width() const noexcept { return n_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

  Mask with(std::size_t i) const {
    Mask m = *this;
    m.set(i);
    return m;
  }
  Mask without(std::size_t i) const {
    Mask m = *this;
    m.reset(i);
    return m;
  }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool empty() const noexcept {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }

  /// Parity of |this ∩ other|; true when odd.
  bool odd_overlap(const Mask& other) const noexcept {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) acc ^= words_[w] & other.words_[w];
    return std::popcount(acc) & 1;
  }
  bool is_subset_of(const Mask& other) const noexcept {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~other.words_[w]) return false;
    return true;
  }
  Mask operator|(const Mask& other) const;
  Mask operator&(const Mask& other) const;
  /// Complement within the universe of width n.
  Mask complement() const;

  std::vector<std::size_t> indices() const;
  std::string to_bitstring() const;
  /// Human-readable "{0,3,5}".
  std::string to_string() const;

  template <class F>
  void for_each(F&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        fn(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

  friend bool operator==(const Mask&, const Mask&) = default;

  std::size_t hash() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Lexicographic order of the sorted index lists ({0} < {0,1} < {1}).
bool lex_less(const Mask& a, const Mask& b);

/// Cardinality first, then lex_less. The canonical order for listings.
bool canonical_less(const Mask& a, const Mask& b);

struct MaskHash {
  std::size_t operator()(const Mask& m) const noexcept { return m.hash(); }
};

/// Calls fn(sub) for every subset of `set` (including the empty set and `set`).
template <class F>
void for_each_subset(const Mask& set, F&& fn) {
  const auto idx = set.indices();
  if (idx.size() >= 63) throw std::length_error("subset enumeration over a set of size >= 63");
  const std::uint64_t total = std::uint64_t{1} << idx.size();
  for (std::uint64_t code = 0; code < total; ++code) {
    Mask m(set.width());
    for (std::size_t b = 0; b < idx.size(); ++b)
      if ((code >> b) & 1U) m.set(idx[b]);
    fn(m);
  }
}

}  // namespace spex

template <>
struct std::hash<spex::Mask> {
  std::size_t operator()(const spex::Mask& m) const noexcept { return m.hash(); }
};
