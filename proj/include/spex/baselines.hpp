#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spex/setfn.hpp"
#include "spex/spectrum.hpp"

namespace spex {

struct LassoPath {
  std::vector<double> lambdas;  // descending
  std::vector<double> cv_mse;   // one per lambda
  std::size_t best_index = 0;
  FourierSpectrum spectrum;     // refit on all data at lambdas[best_index]
};

/// L1-regularized regression on an unpenalized intercept plus one parity
/// column (-1)^{[i∈S]} per feature, minimizing
///   (1/2N) ||y - b - Xβ||² + λ ||β||₁
/// by cyclic coordinate descent. Returns a spectrum of degree <= 1.
FourierSpectrum lasso_at(const MaskDataset& data, double lambda);

/// λ path of `num_lambdas` geometric steps from λ_max (smallest λ zeroing all
/// slopes) to lambda_ratio * λ_max, chosen by `folds`-fold CV MSE.
LassoPath fit_lasso_path(const MaskDataset& data, std::size_t num_lambdas = 100,
                         double lambda_ratio = 1e-3, std::size_t folds = 5,
                         std::uint64_t seed = 0);

FourierSpectrum fit_lasso(const MaskDataset& data, std::size_t num_lambdas = 100,
                          double lambda_ratio = 1e-3, std::size_t folds = 5,
                          std::uint64_t seed = 0);

struct KernelShapResult {
  std::vector<double> values;
  std::size_t queries = 0;        // distinct masks evaluated, anchors included
  std::size_t full_subset_sizes = 0;  // coalition sizes enumerated exhaustively
};

/// KernelSHAP: anchors f(∅) and f([n]) plus coalitions weighted by the
/// Shapley kernel. Coalition sizes whose complete enumeration fits the
/// remaining budget are enumerated (paired with their complements), the rest
/// are sampled; the weighted least squares is solved under the constraint
/// Σφ = f([n]) - f(∅). `budget` caps the number of value-function queries.
KernelShapResult kernel_shap(const ValueFunction& vf, std::size_t budget, std::uint64_t seed);

}  // namespace spex
