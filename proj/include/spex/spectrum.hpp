#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "spex/mask.hpp"
#include "spex/setfn.hpp"

namespace spex {

enum class Basis { fourier, mobius };

struct Term {
  Mask set;
  double coef = 0.0;
};

/// Sparse set-function expansion. Under Basis::fourier a coefficient F(T)
/// weighs the parity (-1)^{|S∩T|}; under Basis::mobius I(T) weighs the
/// monomial 1[T ⊆ S]. Terms are stored in canonical order (cardinality, then
/// lexicographic) with exact zeros dropped.
template <Basis B>
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(std::size_t n) : n_(n) {}
  Spectrum(std::size_t n, std::vector<Term> terms, double prune_below = 0.0);
  Spectrum(std::size_t n, const std::unordered_map<Mask, double, MaskHash>& coeffs,
           double prune_below = 0.0);

  static constexpr Basis basis() noexcept { return B; }
  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  std::span<const Term> terms() const noexcept { return terms_; }

  /// Coefficient of `set`, 0 when absent.
  double coef(const Mask& set) const;
  bool contains(const Mask& set) const { return index_.contains(set); }
  /// Largest cardinality in the support (0 for empty spectra).
  std::size_t degree() const noexcept;

  /// Value of the represented function at `mask`.
  double evaluate(const Mask& mask) const;
  std::vector<double> evaluate(std::span<const Mask> masks) const;

  /// Terms ordered by |coef| descending, then cardinality, then lexicographic.
  std::vector<Term> by_magnitude() const;

 private:
  void build(std::vector<Term> terms, double prune_below);

  std::size_t n_ = 0;
  std::vector<Term> terms_;
  std::unordered_map<Mask, std::size_t, MaskHash> index_;
};

using FourierSpectrum = Spectrum<Basis::fourier>;
using MobiusSpectrum = Spectrum<Basis::mobius>;

extern template class Spectrum<Basis::fourier>;
extern template class Spectrum<Basis::mobius>;

/// Largest universe accepted by the dense transforms.
inline constexpr std::size_t kMaxDenseN = 24;

/// Walsh-Hadamard transform of a complete table (index bit i = feature i):
/// F(T) = 2^{-n} Σ_S (-1)^{|S∩T|} f(S), computed by in-place butterflies.
FourierSpectrum exact_transform(std::size_t n, std::span<const double> table);
/// Same, reading the table from a value function.
FourierSpectrum exact_transform(const ValueFunction& vf);

/// Dense table of a spectrum over all 2^n masks (n <= kMaxDenseN).
template <Basis B>
std::vector<double> dense_table(const Spectrum<B>& spec);

/// I(T) = (-2)^{|T|} Σ_{S ⊇ T} F(S); support stays inside the down-closure.
MobiusSpectrum fourier_to_mobius(const FourierSpectrum& spec);

/// Keeps the k largest coefficients by magnitude. Ties go to smaller sets,
/// then to lexicographically smaller index lists.
FourierSpectrum sparsify(const FourierSpectrum& spec, std::size_t k);

struct RefineResult {
  FourierSpectrum spectrum;
  bool accepted = false;
  double cv_mse_before = 0.0;
  double cv_mse_after = 0.0;
};

/// Least-squares refit of the coefficients on a fixed support against the
/// parity design. The refit is kept only when its `folds`-fold CV error beats
/// the unrefined spectrum's; otherwise the input comes back unchanged.
/// Rank-deficient designs use the minimum-norm solution.
RefineResult refine(const FourierSpectrum& spec, const MaskDataset& data, std::size_t folds,
                    std::uint64_t seed = 0);

/// Minimum-norm OLS coefficients for the given support (one per support set).
std::vector<double> fit_support(std::span<const Mask> support, const MaskDataset& data);

/// Contiguous CV folds after a seeded shuffle; fold f holds the returned
/// rows[f]. Shared by every cross-validation routine.
std::vector<std::vector<std::size_t>> make_folds(std::size_t samples, std::size_t folds,
                                                 std::uint64_t seed);

}  // namespace spex
