#include "spex/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "spex/errors.hpp"
#include "spex/rng.hpp"

namespace spex {

template <Basis B>
Spectrum<B>::Spectrum(std::size_t n, std::vector<Term> terms, double prune_below) : n_(n) {
  build(std::move(terms), prune_below);
}

template <Basis B>
Spectrum<B>::Spectrum(std::size_t n, const std::unordered_map<Mask, double, MaskHash>& coeffs,
                      double prune_below)
    : n_(n) {
  std::vector<Term> terms;
  terms.reserve(coeffs.size());
  for (const auto& [m, c] : coeffs) terms.push_back({m, c});
  build(std::move(terms), prune_below);
}

template <Basis B>
void Spectrum<B>::build(std::vector<Term> terms, double prune_below) {
  std::erase_if(terms, [&](const Term& t) {
    return t.coef == 0.0 || std::abs(t.coef) < prune_below;
  });
  for (const auto& t : terms)
    if (t.set.width() != n_)
      throw InvalidArgument("spectrum key width " + std::to_string(t.set.width()) +
                            " does not match n=" + std::to_string(n_));
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return canonical_less(a.set, b.set); });
  for (std::size_t i = 1; i < terms.size(); ++i)
    if (terms[i].set == terms[i - 1].set)
      throw InvalidArgument("duplicate spectrum key " + terms[i].set.to_string());
  terms_ = std::move(terms);
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i].set, i);
}

template <Basis B>
double Spectrum<B>::coef(const Mask& set) const {
  auto it = index_.find(set);
  return it == index_.end() ? 0.0 : terms_[it->second].coef;
}

template <Basis B>
std::size_t Spectrum<B>::degree() const noexcept {
  return terms_.empty() ? 0 : terms_.back().set.count();
}

template <Basis B>
double Spectrum<B>::evaluate(const Mask& mask) const {
  if (mask.width() != n_)
    throw InvalidArgument("mask width " + std::to_string(mask.width()) +
                          " does not match spectrum n=" + std::to_string(n_));
  double acc = 0.0;
  if constexpr (B == Basis::fourier) {
    for (const auto& t : terms_) acc += t.set.odd_overlap(mask) ? -t.coef : t.coef;
  } else {
    for (const auto& t : terms_)
      if (t.set.is_subset_of(mask)) acc += t.coef;
  }
  return acc;
}

template <Basis B>
std::vector<double> Spectrum<B>::evaluate(std::span<const Mask> masks) const {
  std::vector<double> out;
  out.reserve(masks.size());
  for (const auto& m : masks) out.push_back(evaluate(m));
  return out;
}

namespace {

bool magnitude_before(const Term& a, const Term& b) {
  const double ma = std::abs(a.coef);
  const double mb = std::abs(b.coef);
  if (ma != mb) return ma > mb;
  return canonical_less(a.set, b.set);
}

}  // namespace

template <Basis B>
std::vector<Term> Spectrum<B>::by_magnitude() const {
  std::vector<Term> out(terms_.begin(), terms_.end());
  std::sort(out.begin(), out.end(), magnitude_before);
  return out;
}

template class Spectrum<Basis::fourier>;
template class Spectrum<Basis::mobius>;

// ---------------------------------------------------------------------------

FourierSpectrum exact_transform(std::size_t n, std::span<const double> table) {
  if (n > kMaxDenseN)
    throw CapacityError("exact_transform supports n <= " + std::to_string(kMaxDenseN));
  const std::size_t size = std::size_t{1} << n;
  if (table.size() != size)
    throw InvalidArgument("exact_transform needs a complete table of 2^n = " +
                          std::to_string(size) + " entries, got " + std::to_string(table.size()));
  std::vector<double> a(table.begin(), table.end());
  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t block = 0; block < size; block += 2 * half) {
      for (std::size_t j = block; j < block + half; ++j) {
        const double u = a[j];
        const double v = a[j + half];
        a[j] = u + v;
        a[j + half] = u - v;
      }
    }
  }
  const double scale = std::ldexp(1.0, -static_cast<int>(n));
  std::vector<Term> terms;
  for (std::size_t code = 0; code < size; ++code)
    if (a[code] != 0.0) terms.push_back({Mask::from_word(n, code), a[code] * scale});
  return FourierSpectrum(n, std::move(terms));
}

FourierSpectrum exact_transform(const ValueFunction& vf) {
  const std::size_t n = vf.n();
  if (n > kMaxDenseN)
    throw CapacityError("exact_transform supports n <= " + std::to_string(kMaxDenseN));
  std::vector<Mask> masks;
  masks.reserve(std::size_t{1} << n);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code)
    masks.push_back(Mask::from_word(n, code));
  const auto values = vf.query(masks);
  return exact_transform(n, values);
}

template <Basis B>
std::vector<double> dense_table(const Spectrum<B>& spec) {
  const std::size_t n = spec.n();
  if (n > kMaxDenseN) throw CapacityError("dense_table supports n <= " + std::to_string(kMaxDenseN));
  std::vector<double> out(std::size_t{1} << n);
  for (std::uint64_t code = 0; code < out.size(); ++code)
    out[code] = spec.evaluate(Mask::from_word(n, code));
  return out;
}

template std::vector<double> dense_table(const FourierSpectrum&);
template std::vector<double> dense_table(const MobiusSpectrum&);

MobiusSpectrum fourier_to_mobius(const FourierSpectrum& spec) {
  std::unordered_map<Mask, double, MaskHash> acc;
  for (const auto& t : spec.terms()) {
    if (t.set.count() > 30)
      throw CapacityError("Möbius conversion of a set with more than 30 elements");
    for_each_subset(t.set, [&](const Mask& sub) {
      acc[sub] += std::ldexp(sub.count() % 2 ? -t.coef : t.coef, static_cast<int>(sub.count()));
    });
  }
  return MobiusSpectrum(spec.n(), acc);
}

FourierSpectrum sparsify(const FourierSpectrum& spec, std::size_t k) {
  if (k == 0) throw InvalidArgument("sparsify: k must be >= 1");
  if (spec.size() <= k) return spec;
  auto ranked = spec.by_magnitude();
  ranked.resize(k);
  return FourierSpectrum(spec.n(), std::move(ranked));
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t samples, std::size_t folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  if (samples < folds)
    throw InvalidArgument("cross-validation needs at least as many samples (" +
                          std::to_string(samples) + ") as folds (" + std::to_string(folds) + ")");
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * samples / folds;
    const std::size_t hi = (f + 1) * samples / folds;
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(lo),
                  order.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return out;
}

std::vector<double> fit_support(std::span<const Mask> support, const MaskDataset& data) {
  const auto rows = static_cast<Eigen::Index>(data.size());
  const auto cols = static_cast<Eigen::Index>(support.size());
  if (cols == 0) return {};
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& s = data[static_cast<std::size_t>(r)];
    target(r) = s.value;
    for (Eigen::Index c = 0; c < cols; ++c)
      design(r, c) = support[static_cast<std::size_t>(c)].odd_overlap(s.mask) ? -1.0 : 1.0;
  }
  const Eigen::VectorXd x = design.completeOrthogonalDecomposition().solve(target);
  return {x.data(), x.data() + x.size()};
}

RefineResult refine(const FourierSpectrum& spec, const MaskDataset& data, std::size_t folds,
                    std::uint64_t seed) {
  if (data.n() != spec.n())
    throw InvalidArgument("refine: dataset n=" + std::to_string(data.n()) +
                          " does not match spectrum n=" + std::to_string(spec.n()));
  if (spec.size() > data.size())
    throw InvalidArgument("refine: support of " + std::to_string(spec.size()) +
                          " exceeds the " + std::to_string(data.size()) + " samples");
  RefineResult result{spec, false, 0.0, 0.0};
  if (spec.empty()) return result;

  std::vector<Mask> support;
  for (const auto& t : spec.terms()) support.push_back(t.set);

  const auto split = make_folds(data.size(), folds, seed);
  double sse_before = 0.0;
  double sse_after = 0.0;
  for (std::size_t f = 0; f < split.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < split.size(); ++g)
      if (g != f) train.insert(train.end(), split[g].begin(), split[g].end());
    const auto coefs = fit_support(support, data.subset(train));
    std::vector<Term> terms;
    for (std::size_t i = 0; i < support.size(); ++i) terms.push_back({support[i], coefs[i]});
    const FourierSpectrum fold_fit(spec.n(), std::move(terms));
    for (auto row : split[f]) {
      const auto& s = data[row];
      const double e0 = spec.evaluate(s.mask) - s.value;
      const double e1 = fold_fit.evaluate(s.mask) - s.value;
      sse_before += e0 * e0;
      sse_after += e1 * e1;
    }
  }
  result.cv_mse_before = sse_before / static_cast<double>(data.size());
  result.cv_mse_after = sse_after / static_cast<double>(data.size());
  if (result.cv_mse_after < result.cv_mse_before) {
    const auto coefs = fit_support(support, data);
    std::vector<Term> terms;
    for (std::size_t i = 0; i < support.size(); ++i) terms.push_back({support[i], coefs[i]});
    result.spectrum = FourierSpectrum(spec.n(), std::move(terms));
    result.accepted = true;
  }
  return result;
}

}  // namespace spex
