#include "spex/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "spex/errors.hpp"
#include "spex/rng.hpp"

namespace spex {

namespace {

// Centered parity design for the coordinate-descent solver.
struct LassoProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Eigen::MatrixXd x;         // centered, rows x cols
  Eigen::VectorXd y;         // centered
  Eigen::VectorXd x_mean;
  Eigen::VectorXd col_var;   // (1/N) ||x_i||²
  double y_mean = 0.0;

  LassoProblem(const MaskDataset& data, std::span<const std::size_t> row_ids) {
    rows = row_ids.size();
    cols = data.n();
    x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    y.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
      const auto& s = data[row_ids[r]];
      y(static_cast<Eigen::Index>(r)) = s.value;
      for (std::size_t c = 0; c < cols; ++c)
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s.mask.test(c) ? -1.0 : 1.0;
    }
    x_mean = x.colwise().mean().transpose();
    y_mean = y.mean();
    x.rowwise() -= x_mean.transpose();
    y.array() -= y_mean;
    col_var = x.colwise().squaredNorm().transpose() / static_cast<double>(rows);
  }

  double lambda_max() const {
    if (cols == 0) return 0.0;
    return (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(rows);
  }

  // Coordinate descent from `beta` (warm start) at penalty `lambda`.
  void solve(double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& resid) const {
    const double inv_n = 1.0 / static_cast<double>(rows);
    const double scale = std::max(y.squaredNorm() * inv_n, 1e-300);
    for (int pass = 0; pass < 100000; ++pass) {
      double max_change = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const auto j = static_cast<Eigen::Index>(c);
        if (col_var(j) <= 0.0) continue;
        const double old = beta(j);
        const double rho = x.col(j).dot(resid) * inv_n + col_var(j) * old;
        const double mag = std::abs(rho) - lambda;
        const double next = mag > 0.0 ? std::copysign(mag, rho) / col_var(j) : 0.0;
        if (next != old) {
          resid -= (next - old) * x.col(j);
          beta(j) = next;
          max_change = std::max(max_change, col_var(j) * (next - old) * (next - old));
        }
      }
      if (max_change <= 1e-20 * scale) break;
    }
  }

  FourierSpectrum to_spectrum(const Eigen::VectorXd& beta) const {
    std::vector<Term> terms;
    terms.push_back({Mask(cols), y_mean - x_mean.dot(beta)});
    for (std::size_t c = 0; c < cols; ++c)
      terms.push_back({Mask::from_indices(cols, {c}), beta(static_cast<Eigen::Index>(c))});
    return FourierSpectrum(cols, std::move(terms));
  }
};

std::vector<double> lambda_grid(double lmax, std::size_t count, double ratio) {
  std::vector<double> out;
  if (count == 1) return {lmax};
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(lmax * std::pow(ratio, static_cast<double>(i) / static_cast<double>(count - 1)));
  return out;
}

}  // namespace

FourierSpectrum lasso_at(const MaskDataset& data, double lambda) {
  if (data.empty()) throw InvalidArgument("lasso: empty dataset");
  if (lambda < 0.0) throw InvalidArgument("lasso: lambda must be >= 0");
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const LassoProblem p(data, rows);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.cols));
  Eigen::VectorXd resid = p.y;
  // Walk down from λ_max for a good warm start.
  const double lmax = p.lambda_max();
  if (lmax > lambda)
    for (double l : lambda_grid(lmax, 20, std::max(lambda / lmax, 1e-6))) p.solve(l, beta, resid);
  p.solve(lambda, beta, resid);
  return p.to_spectrum(beta);
}

LassoPath fit_lasso_path(const MaskDataset& data, std::size_t num_lambdas, double lambda_ratio,
                         std::size_t folds, std::uint64_t seed) {
  if (data.empty()) throw InvalidArgument("lasso: empty dataset");
  if (num_lambdas < 1) throw InvalidArgument("lasso: num_lambdas must be >= 1");
  if (!(lambda_ratio > 0.0) || lambda_ratio >= 1.0)
    throw InvalidArgument("lasso: lambda_ratio must lie in (0, 1)");

  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const LassoProblem full(data, rows);
  LassoPath path;
  const double lmax = full.lambda_max();
  if (lmax <= 0.0) {
    // Nothing correlates with the target: the intercept alone is optimal.
    path.lambdas = {0.0};
    path.cv_mse = {0.0};
    path.spectrum = full.to_spectrum(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(full.cols)));
    return path;
  }
  path.lambdas = lambda_grid(lmax, num_lambdas, lambda_ratio);
  path.cv_mse.assign(path.lambdas.size(), 0.0);

  const auto split = make_folds(data.size(), folds, seed);
  for (std::size_t f = 0; f < split.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < split.size(); ++g)
      if (g != f) train.insert(train.end(), split[g].begin(), split[g].end());
    const LassoProblem p(data, train);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.cols));
    Eigen::VectorXd resid = p.y;
    for (std::size_t l = 0; l < path.lambdas.size(); ++l) {
      p.solve(path.lambdas[l], beta, resid);
      const double intercept = p.y_mean - p.x_mean.dot(beta);
      double sse = 0.0;
      for (auto row : split[f]) {
        const auto& s = data[row];
        double pred = intercept;
        for (std::size_t c = 0; c < p.cols; ++c)
          pred += (s.mask.test(c) ? -1.0 : 1.0) * beta(static_cast<Eigen::Index>(c));
        sse += (pred - s.value) * (pred - s.value);
      }
      path.cv_mse[l] += sse / static_cast<double>(split[f].size()) / static_cast<double>(folds);
    }
  }
  for (std::size_t l = 1; l < path.cv_mse.size(); ++l)
    if (path.cv_mse[l] < path.cv_mse[path.best_index]) path.best_index = l;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(full.cols));
  Eigen::VectorXd resid = full.y;
  for (std::size_t l = 0; l <= path.best_index; ++l) full.solve(path.lambdas[l], beta, resid);
  path.spectrum = full.to_spectrum(beta);
  return path;
}

FourierSpectrum fit_lasso(const MaskDataset& data, std::size_t num_lambdas, double lambda_ratio,
                          std::size_t folds, std::uint64_t seed) {
  return fit_lasso_path(data, num_lambdas, lambda_ratio, folds, seed).spectrum;
}

// ---------------------------------------------------------------------------

namespace {

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

// Calls fn(mask) for every size-k subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_combination(std::size_t n, std::size_t k, F&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (;;) {
    fn(Mask::from_indices(n, std::span<const std::size_t>(idx)));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

KernelShapResult kernel_shap(const ValueFunction& vf, std::size_t budget, std::uint64_t seed) {
  const std::size_t n = vf.n();
  if (n < 2) throw InvalidArgument("kernel_shap needs n >= 2");
  if (budget < n + 2) throw InvalidArgument("kernel_shap needs a budget of at least n + 2");

  const Mask empty(n);
  const Mask full = Mask::full(n);
  const std::size_t num_sizes = (n - 1 + 1) / 2;  // ceil((n-1)/2)
  const std::size_t num_paired = (n - 1) / 2;

  std::vector<double> weight(num_sizes);
  for (std::size_t s = 1; s <= num_sizes; ++s)
    weight[s - 1] = static_cast<double>(n - 1) / static_cast<double>(s * (n - s));
  for (std::size_t s = 1; s <= num_paired; ++s) weight[s - 1] *= 2.0;
  const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);
  for (auto& w : weight) w /= wsum;

  std::vector<Mask> masks;
  std::vector<double> kernel;
  std::size_t samples_left = budget - 2;

  // Exhaustive layers while the remaining budget covers them.
  std::size_t full_sizes = 0;
  std::vector<double> remaining = weight;
  for (std::size_t s = 1; s <= num_sizes; ++s) {
    double nsubsets = binomial(n, s);
    if (s <= num_paired) nsubsets *= 2.0;
    if (static_cast<double>(samples_left) * remaining[s - 1] / nsubsets < 1.0 - 1e-8) break;
    ++full_sizes;
    samples_left -= static_cast<std::size_t>(nsubsets);
    if (const double used = remaining[s - 1]; used < 1.0)
      for (auto& r : remaining) r /= (1.0 - used);
    double w = weight[s - 1] / binomial(n, s);
    if (s <= num_paired) w /= 2.0;
    for_each_combination(n, s, [&](const Mask& m) {
      masks.push_back(m);
      kernel.push_back(w);
      if (s <= num_paired) {
        masks.push_back(m.complement());
        kernel.push_back(w);
      }
    });
  }

  // Kernel-weighted sampling for the remaining sizes.
  const std::size_t fixed = masks.size();
  if (full_sizes < num_sizes && samples_left > 0) {
    std::vector<double> rest(weight.begin() + static_cast<std::ptrdiff_t>(full_sizes), weight.end());
    for (std::size_t i = 0; i < rest.size(); ++i)
      if (full_sizes + i + 1 <= num_paired) rest[i] /= 2.0;
    const double rsum = std::accumulate(rest.begin(), rest.end(), 0.0);
    std::vector<double> cdf(rest.size());
    std::partial_sum(rest.begin(), rest.end(), cdf.begin());
    for (auto& c : cdf) c /= rsum;

    Rng rng(seed);
    std::unordered_map<Mask, std::size_t, MaskHash> seen;
    std::vector<std::size_t> perm(n);
    for (std::size_t draw = 0; samples_left > 0 && draw < 4 * (budget - 2); ++draw) {
      const double u = rng.uniform();
      const auto layer = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                   static_cast<std::ptrdiff_t>(cdf.size() - 1)));
      const std::size_t size = layer + full_sizes + 1;
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t i = 0; i < size; ++i)
        std::swap(perm[i], perm[i + static_cast<std::size_t>(rng.below(n - i))]);
      const Mask m = Mask::from_indices(n, std::span<const std::size_t>(perm.data(), size));
      const bool paired = size <= num_paired;
      auto it = seen.find(m);
      if (it == seen.end()) {
        seen.emplace(m, masks.size());
        masks.push_back(m);
        kernel.push_back(1.0);
        --samples_left;
        if (paired && samples_left > 0) {
          masks.push_back(m.complement());
          kernel.push_back(1.0);
          --samples_left;
        }
      } else {
        kernel[it->second] += 1.0;
        if (paired && it->second + 1 < masks.size() && masks[it->second + 1] == m.complement())
          kernel[it->second + 1] += 1.0;
      }
    }
    const double weight_left =
        std::accumulate(weight.begin() + static_cast<std::ptrdiff_t>(full_sizes), weight.end(), 0.0);
    const double sampled = std::accumulate(kernel.begin() + static_cast<std::ptrdiff_t>(fixed),
                                           kernel.end(), 0.0);
    if (sampled > 0.0)
      for (std::size_t i = fixed; i < kernel.size(); ++i) kernel[i] *= weight_left / sampled;
  }

  std::vector<Mask> queries{empty, full};
  queries.insert(queries.end(), masks.begin(), masks.end());
  const auto values = vf.query(queries);
  const double f_empty = values[0];
  const double f_full = values[1];
  const double total = f_full - f_empty;

  KernelShapResult result;
  result.queries = queries.size();
  result.full_subset_sizes = full_sizes + std::min(full_sizes, num_paired);
  result.values.assign(n, 0.0);

  // Eliminate the last feature through the efficiency constraint.
  const auto rows = static_cast<Eigen::Index>(masks.size());
  const auto cols = static_cast<Eigen::Index>(n - 1);
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd target(rows);
  Eigen::VectorXd w(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& m = masks[static_cast<std::size_t>(r)];
    const double last = m.test(n - 1) ? 1.0 : 0.0;
    for (Eigen::Index c = 0; c < cols; ++c)
      design(r, c) = (m.test(static_cast<std::size_t>(c)) ? 1.0 : 0.0) - last;
    target(r) = values[static_cast<std::size_t>(r) + 2] - f_empty - last * total;
    w(r) = kernel[static_cast<std::size_t>(r)];
  }
  const Eigen::MatrixXd gram = design.transpose() * w.asDiagonal() * design;
  const Eigen::VectorXd rhs = design.transpose() * w.asDiagonal() * target;
  const Eigen::VectorXd phi = gram.completeOrthogonalDecomposition().solve(rhs);
  double acc = 0.0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    result.values[static_cast<std::size_t>(c)] = phi(c);
    acc += phi(c);
  }
  result.values[n - 1] = total - acc;
  return result;
}

}  // namespace spex
