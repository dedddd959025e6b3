#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spex/setfn.hpp"
#include "spex/spectrum.hpp"

namespace spex {

/// A metric value, or an explicit undefined flag when a denominator vanishes.
struct MetricValue {
  std::optional<double> value;
  std::string note;  // reason when undefined, or e.g. "k clamped to 12"

  bool defined() const { return value.has_value(); }
};

struct MetricReport {
  std::string name;
  MetricValue value;
  std::map<std::string, double> params;
  std::size_t samples = 0;
};

/// 1 - Σ(ŷ-y)² / Σ(y-ȳ)². With constant truths the result is 1 for a perfect
/// fit and undefined otherwise.
MetricValue r2(std::span<const double> predictions, std::span<const double> truths);

/// Faithfulness of a spectrum on a dataset.
MetricValue r2(const FourierSpectrum& spec, const MaskDataset& data);

/// Top-k support under the sparsify ordering; k is clamped to the support size.
std::vector<Mask> top_k_sets(const FourierSpectrum& spec, std::size_t k);

enum class HierarchyKind { dsr, scr, shr };

/// Direct subset rate: mean over S in F_k of the fraction of i in S with
/// S\{i} in F_k; the empty set counts 1.
MetricValue dsr(const FourierSpectrum& spec, std::size_t k);
/// scr: share of S in F_k reachable from ∅ by a chain of one-element steps
/// inside F_k. shr: share of S in F_k whose every subset is in F_k.
MetricValue hierarchy_rate(const FourierSpectrum& spec, std::size_t k, HierarchyKind kind);

/// Set-family versions used by the spectrum overloads.
double dsr(std::span<const Mask> family);
double hierarchy_rate(std::span<const Mask> family, HierarchyKind kind);

HierarchyKind parse_hierarchy_kind(const std::string& s);
std::string to_string(HierarchyKind kind);

/// |f([n]) - f(S*)| / |f([n])| from true value-function queries.
MetricValue delta_output(const ValueFunction& vf, const Mask& solution);

struct ShapleyComparison {
  double recall_at_k = 0.0;
  double mse = 0.0;
};

/// Recall of the top-k features by |value| (ties to lower index) and the mean
/// squared difference.
ShapleyComparison compare_shapley(std::span<const double> estimate, std::span<const double> truth,
                                  std::size_t k);

}  // namespace spex
