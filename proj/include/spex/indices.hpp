#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spex/spectrum.hpp"

namespace spex {

enum class IndexKind {
  banzhaf,
  shapley,
  influence,
  mobius,
  or_,
  banzhaf_interaction,
  shapley_interaction,
  shapley_taylor,
  faith_banzhaf,
  faith_shapley,
};

IndexKind parse_index_kind(std::string_view name);
std::string_view to_string(IndexKind kind);
bool is_per_feature(IndexKind kind);
bool is_order_bounded(IndexKind kind);

/// Attribution or interaction values keyed by feature set. Per-feature kinds
/// hold exactly n singletons; order-bounded kinds only sets with |T| <= order.
struct IndexReport {
  IndexKind kind = IndexKind::shapley;
  std::optional<std::size_t> order;
  std::vector<Term> values;  // canonical order

  double at(const Mask& set) const;
};

/// φ_i = -2 Σ_{S ∋ i, |S| odd} F(S) / |S|.
std::vector<double> shapley(const FourierSpectrum& spec);

/// banzhaf: ψ_i = -2 F({i}); influence: ξ_i = Σ_{S ∋ i} F(S)².
std::vector<double> feature_index(const FourierSpectrum& spec, IndexKind kind);

/// Interaction index over the down-closure of the support. Superset sums run
/// over stored terms only, which is exact since absent coefficients are zero.
IndexReport interaction_index(const FourierSpectrum& spec, IndexKind kind,
                              std::optional<std::size_t> order = std::nullopt);

/// Either a per-feature vector (as singletons) or an interaction report.
IndexReport compute_index(const FourierSpectrum& spec, IndexKind kind,
                          std::optional<std::size_t> order = std::nullopt);

/// Right-hand side of Shapley efficiency under this normalization:
/// Σ_i φ_i = f([n]) - f(∅).
double shapley_efficiency_total(const FourierSpectrum& spec);

}  // namespace spex
