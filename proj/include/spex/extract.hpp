#pragma once

#include <cstddef>

#include "spex/gbt.hpp"
#include "spex/spectrum.hpp"

namespace spex {

/// Deepest tree that extraction accepts; support grows as O(T 4^depth).
inline constexpr std::size_t kMaxExtractDepth = 10;

/// Exact Fourier spectrum of one tree. The bit-clear child plays the role of
/// the left branch: a leaf yields {∅: value}, and a split on j with child
/// spectra L (clear) and R (set) yields S -> (L[S]+R[S])/2 and
/// S∪{j} -> (L[S]-R[S])/2.
FourierSpectrum extract_tree(const RegressionTree& tree, std::size_t n);

/// Spectrum of the whole ensemble: learning_rate * Σ per-tree spectra, with
/// base_score added to the empty-set coefficient. Sums below 1e-15 in
/// magnitude are pruned.
FourierSpectrum extract_model(const GbtModel& model);

}  // namespace spex
