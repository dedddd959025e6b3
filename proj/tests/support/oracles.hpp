#pragma once

// Brute-force reference implementations. They work on dense tables indexed
// by bit patterns (bit i = feature i) and share no code with the library
// beyond the Mask type used to hand results back.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spex/mask.hpp"
#include "spex/spectrum.hpp"

namespace oracle {

using Table = std::vector<double>;
using Sparse = std::map<std::uint32_t, double>;  // set bits -> coefficient

inline int pc(std::uint32_t x) { return __builtin_popcount(x); }

inline double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

inline double binom(int a, int b) {
  if (b < 0 || b > a) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
  return r;
}

inline spex::Mask to_mask(int n, std::uint32_t bits) { return spex::Mask::from_word(n, bits); }

inline std::uint32_t to_bits(const spex::Mask& m) {
  std::uint32_t b = 0;
  m.for_each([&](std::size_t i) { b |= 1U << i; });
  return b;
}

inline Sparse to_sparse(const spex::FourierSpectrum& s) {
  Sparse out;
  for (const auto& t : s.terms()) out[to_bits(t.set)] = t.coef;
  return out;
}

// f(S) = Σ_T (-1)^{|S∩T|} F(T), directly.
inline Table table_from_fourier(int n, const Sparse& F) {
  Table f(std::size_t{1} << n, 0.0);
  for (std::uint32_t S = 0; S < f.size(); ++S)
    for (const auto& [T, c] : F) f[S] += (pc(S & T) & 1) ? -c : c;
  return f;
}

// F(T) = 2^{-n} Σ_S (-1)^{|S∩T|} f(S), quadratic time.
inline Table naive_fourier(int n, const Table& f) {
  const std::size_t N = f.size();
  Table F(N, 0.0);
  for (std::uint32_t T = 0; T < N; ++T) {
    double s = 0.0;
    for (std::uint32_t S = 0; S < N; ++S) s += (pc(S & T) & 1) ? -f[S] : f[S];
    F[T] = s / static_cast<double>(N);
  }
  (void)n;
  return F;
}

// I(T) = Σ_{S⊆T} (-1)^{|T\S|} f(S).
inline Table mobius(int n, const Table& f) {
  Table I(f.size(), 0.0);
  for (std::uint32_t T = 0; T < f.size(); ++T)
    for (std::uint32_t S = T;; S = (S - 1) & T) {
      I[T] += ((pc(T) - pc(S)) & 1) ? -f[S] : f[S];
      if (S == 0) break;
    }
  (void)n;
  return I;
}

inline std::vector<double> shapley(int n, const Table& f) {
  std::vector<double> phi(n, 0.0);
  const std::uint32_t N = 1U << n;
  for (int i = 0; i < n; ++i)
    for (std::uint32_t S = 0; S < N; ++S) {
      if (S >> i & 1U) continue;
      const int s = pc(S);
      const double w = factorial(s) * factorial(n - s - 1) / factorial(n);
      phi[i] += w * (f[S | 1U << i] - f[S]);
    }
  return phi;
}

inline std::vector<double> banzhaf(int n, const Table& f) {
  std::vector<double> psi(n, 0.0);
  const std::uint32_t N = 1U << n;
  for (int i = 0; i < n; ++i)
    for (std::uint32_t S = 0; S < N; ++S)
      if (!(S >> i & 1U)) psi[i] += f[S | 1U << i] - f[S];
  for (auto& v : psi) v /= static_cast<double>(N / 2);
  return psi;
}

// Average squared change from flipping feature i, divided by 4 so that a
// parity ±1 function has influence 1 on each of its variables.
inline std::vector<double> influence(int n, const Table& f) {
  std::vector<double> inf(n, 0.0);
  const std::uint32_t N = 1U << n;
  for (int i = 0; i < n; ++i)
    for (std::uint32_t S = 0; S < N; ++S) {
      const double d = f[S] - f[S ^ 1U << i];
      inf[i] += d * d / 4.0;
    }
  for (auto& v : inf) v /= static_cast<double>(N);
  return inf;
}

// Δ_T f(S) = Σ_{L⊆T} (-1)^{|T|-|L|} f(S ∪ L), for S ∩ T = ∅.
inline double derivative(const Table& f, std::uint32_t T, std::uint32_t S) {
  double d = 0.0;
  for (std::uint32_t L = T;; L = (L - 1) & T) {
    d += ((pc(T) - pc(L)) & 1) ? -f[S | L] : f[S | L];
    if (L == 0) break;
  }
  return d;
}

inline Table banzhaf_interaction(int n, const Table& f) {
  const std::uint32_t N = 1U << n;
  Table out(N, 0.0);
  for (std::uint32_t T = 0; T < N; ++T) {
    const std::uint32_t rest = (N - 1) & ~T;
    double s = 0.0;
    for (std::uint32_t S = rest;; S = (S - 1) & rest) {
      s += derivative(f, T, S);
      if (S == 0) break;
    }
    out[T] = s / std::ldexp(1.0, n - pc(T));
  }
  return out;
}

// Shapley interaction index (Grabisch): Σ_{S⊆N\T} (n-s-t)! s! / (n-t+1)! Δ_T f(S).
inline Table shapley_interaction(int n, const Table& f) {
  const std::uint32_t N = 1U << n;
  Table out(N, 0.0);
  for (std::uint32_t T = 0; T < N; ++T) {
    const int t = pc(T);
    const std::uint32_t rest = (N - 1) & ~T;
    double s = 0.0;
    for (std::uint32_t S = rest;; S = (S - 1) & rest) {
      const int k = pc(S);
      s += factorial(n - k - t) * factorial(k) / factorial(n - t + 1) * derivative(f, T, S);
      if (S == 0) break;
    }
    out[T] = s;
  }
  return out;
}

// Shapley-Taylor of order l: Möbius below order l, and for |T| = l
// (l/n) Σ_{S⊆N\T} Δ_T f(S) / C(n-1, |S|).
inline Table shapley_taylor(int n, const Table& f, int l) {
  const std::uint32_t N = 1U << n;
  const auto I = mobius(n, f);
  Table out(N, 0.0);
  for (std::uint32_t T = 0; T < N; ++T) {
    const int t = pc(T);
    if (t < l) {
      out[T] = I[T];
    } else if (t == l) {
      const std::uint32_t rest = (N - 1) & ~T;
      double s = 0.0;
      for (std::uint32_t S = rest;; S = (S - 1) & rest) {
        s += derivative(f, T, S) / binom(n - 1, pc(S));
        if (S == 0) break;
      }
      out[T] = static_cast<double>(l) / n * s;
    }
  }
  return out;
}

// Weighted least squares of f onto monomials 1[T⊆S] with |T| ≤ l. Weights
// w(S) > 0 for every S; `pinned` masks are enforced exactly (KKT system).
inline Table faith_fit(int n, const Table& f, int l, const std::function<double(int)>& weight,
                       const std::vector<std::uint32_t>& pinned) {
  const std::uint32_t N = 1U << n;
  std::vector<std::uint32_t> basis;
  for (std::uint32_t T = 0; T < N; ++T)
    if (pc(T) <= l) basis.push_back(T);
  const int p = static_cast<int>(basis.size());
  const int q = static_cast<int>(pinned.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p + q, p + q);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + q);
  for (std::uint32_t S = 0; S < N; ++S) {
    const double w = weight(pc(S));
    if (w == 0.0) continue;
    for (int a = 0; a < p; ++a) {
      if ((basis[a] & S) != basis[a]) continue;
      rhs(a) += w * f[S];
      for (int b = 0; b < p; ++b)
        if ((basis[b] & S) == basis[b]) K(a, b) += w;
    }
  }
  for (int c = 0; c < q; ++c) {
    for (int a = 0; a < p; ++a)
      if ((basis[a] & pinned[c]) == basis[a]) K(p + c, a) = K(a, p + c) = 1.0;
    rhs(p + c) = f[pinned[c]];
  }
  const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  Table out(N, 0.0);
  for (int a = 0; a < p; ++a) out[basis[a]] = sol(a);
  return out;
}

inline Table faith_banzhaf(int n, const Table& f, int l) {
  return faith_fit(n, f, l, [](int) { return 1.0; }, {});
}

// Shapley kernel μ(s) ∝ (n-1) / (C(n,s) s (n-s)) on proper non-empty
// coalitions; ∅ and [n] carry infinite weight and are pinned instead.
inline Table faith_shapley(int n, const Table& f, int l) {
  return faith_fit(
      n, f, l,
      [n](int s) { return (s == 0 || s == n) ? 0.0 : (n - 1) / (binom(n, s) * s * (n - s)); },
      {0U, (1U << n) - 1});
}

// Or/co-Möbius: I(∅) = f(∅); otherwise -Σ_{R⊆T} (-1)^{|T|-|R|} f([n] \ R).
inline Table or_index(int n, const Table& f) {
  const std::uint32_t N = 1U << n;
  Table out(N, 0.0);
  for (std::uint32_t T = 0; T < N; ++T) {
    if (T == 0) {
      out[T] = f[0];
      continue;
    }
    double s = 0.0;
    for (std::uint32_t R = T;; R = (R - 1) & T) {
      const double v = f[(N - 1) & ~R];
      s += ((pc(T) - pc(R)) & 1) ? -v : v;
      if (R == 0) break;
    }
    out[T] = -s;
  }
  return out;
}

// Random sparse Fourier spectrum with coefficients in (-1, 1).
inline Sparse random_sparse(std::mt19937_64& gen, int n, int support, int max_degree) {
  std::uniform_int_distribution<int> feat(0, n - 1), deg(0, max_degree);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Sparse F;
  while (static_cast<int>(F.size()) < support) {
    std::uint32_t T = 0;
    const int d = deg(gen);
    while (pc(T) < d) T |= 1U << feat(gen);
    F[T] = coef(gen);
  }
  return F;
}

inline spex::FourierSpectrum to_spectrum(int n, const Sparse& F) {
  std::vector<spex::Term> terms;
  for (const auto& [T, c] : F) terms.push_back({to_mask(n, T), c});
  return spex::FourierSpectrum(static_cast<std::size_t>(n), std::move(terms));
}

}  // namespace oracle
