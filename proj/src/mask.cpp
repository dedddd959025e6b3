#include "spex/mask.hpp"

#include <algorithm>

#include "spex/errors.hpp"

namespace spex {

Mask Mask::full(std::size_t n) {
  Mask m(n);
  for (auto& w : m.words_) w = ~std::uint64_t{0};
  if (n % 64 != 0) m.words_.back() = (std::uint64_t{1} << (n % 64)) - 1;
  return m;
}

Mask Mask::from_indices(std::size_t n, std::span<const std::size_t> indices) {
  Mask m(n);
  for (auto i : indices) {
    if (i >= n)
      throw InvalidArgument("feature index " + std::to_string(i) + " out of range for n=" +
                            std::to_string(n));
    m.set(i);
  }
  return m;
}

Mask Mask::from_word(std::size_t n, std::uint64_t bits) {
  if (n > 64) throw InvalidArgument("from_word needs n <= 64");
  Mask m(n);
  if (n == 0) return m;
  m.words_[0] = n == 64 ? bits : bits & ((std::uint64_t{1} << n) - 1);
  return m;
}

Mask Mask::from_bitstring(std::string_view bits) {
  Mask m(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      m.set(i);
    else if (bits[i] != '0')
      throw InvalidArgument("bitstring may only contain '0' and '1'");
  }
  return m;
}

Mask Mask::operator|(const Mask& other) const {
  Mask m = *this;
  for (std::size_t w = 0; w < words_.size(); ++w) m.words_[w] |= other.words_[w];
  return m;
}

Mask Mask::operator&(const Mask& other) const {
  Mask m = *this;
  for (std::size_t w = 0; w < words_.size(); ++w) m.words_[w] &= other.words_[w];
  return m;
}

Mask Mask::complement() const {
  Mask m = full(n_);
  for (std::size_t w = 0; w < words_.size(); ++w) m.words_[w] &= ~words_[w];
  return m;
}

std::vector<std::size_t> Mask::indices() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for_each([&](std::size_t i) { out.push_back(i); });
  return out;
}

std::string Mask::to_bitstring() const {
  std::string s(n_, '0');
  for_each([&](std::size_t i) { s[i] = '1'; });
  return s;
}

std::string Mask::to_string() const {
  std::string s = "{";
  bool first = true;
  for_each([&](std::size_t i) {
    if (!first) s += ',';
    s += std::to_string(i);
    first = false;
  });
  return s + "}";
}

std::size_t Mask::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ n_;
  for (auto w : words_) {
    h ^= w + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

bool lex_less(const Mask& a, const Mask& b) {
  // Walk both index lists in step; the first position that differs decides.
  const auto wa = a.words();
  const auto wb = b.words();
  const std::size_t nw = std::min(wa.size(), wb.size());
  for (std::size_t w = 0; w < nw; ++w) {
    if (wa[w] == wb[w]) continue;
    const std::uint64_t diff = wa[w] ^ wb[w];
    const std::uint64_t low = diff & (~diff + 1);  // lowest differing bit
    const bool a_has = (wa[w] & low) != 0;
    // Elements below `low` are shared. If a has the element there, then b's
    // next element is larger (or b ended), so a sorts first, unless a's list
    // is what ends first on the other side.
    if (a_has) {
      // b lacks it: b continues with something larger than low, or ends.
      const std::uint64_t above = ~((low << 1) - 1);
      bool b_more = (wb[w] & above) != 0;
      for (std::size_t v = w + 1; !b_more && v < wb.size(); ++v) b_more = wb[v] != 0;
      return b_more;  // if b ended, b is a prefix of a, so b < a
    }
    const std::uint64_t above = ~((low << 1) - 1);
    bool a_more = (wa[w] & above) != 0;
    for (std::size_t v = w + 1; !a_more && v < wa.size(); ++v) a_more = wa[v] != 0;
    return !a_more;
  }
  return wa.size() < wb.size();
}

bool canonical_less(const Mask& a, const Mask& b) {
  const auto ca = a.count();
  const auto cb = b.count();
  if (ca != cb) return ca < cb;
  return lex_less(a, b);
}

}  // namespace spex
