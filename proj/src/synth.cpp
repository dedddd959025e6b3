#include "spex/synth.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "spex/errors.hpp"
#include "spex/rng.hpp"

namespace spex {

SyntheticFamily parse_family(const std::string& s) {
  if (s == "peak") return SyntheticFamily::peak;
  if (s == "complete_hierarchy") return SyntheticFamily::complete_hierarchy;
  if (s == "staircase") return SyntheticFamily::staircase;
  throw InvalidArgument("unknown synthetic family '" + s + "'");
}

std::string to_string(SyntheticFamily f) {
  switch (f) {
    case SyntheticFamily::peak: return "peak";
    case SyntheticFamily::complete_hierarchy: return "complete_hierarchy";
    case SyntheticFamily::staircase: return "staircase";
  }
  return "unknown";
}

void SyntheticSpec::validate() const {
  if (n == 0) throw InvalidArgument("synthetic: n must be >= 1");
  if (cardinality > n)
    throw InvalidArgument("synthetic: cardinality " + std::to_string(cardinality) + " exceeds n=" +
                          std::to_string(n));
  if (num_sets < 1) throw InvalidArgument("synthetic: num_sets must be >= 1");
  if (family == SyntheticFamily::complete_hierarchy && cardinality > 20)
    throw CapacityError("complete_hierarchy supports cardinality <= 20");
}

std::vector<double> SpectrumValueFunction::query(std::span<const Mask> masks) const {
  check_widths(masks);
  return spec_.evaluate(masks);
}

namespace {

// Distinct size-k subsets of {0..n-1} by rejection.
std::vector<Mask> sample_distinct_sets(std::size_t n, std::size_t k, std::size_t count, Rng& rng) {
  // There may be fewer than `count` distinct subsets of that size.
  double available = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    available = available * static_cast<double>(n - k + i) / static_cast<double>(i);
  if (static_cast<double>(count) > available)
    throw InvalidArgument("cannot draw " + std::to_string(count) + " distinct sets of size " +
                          std::to_string(k) + " from n=" + std::to_string(n));
  std::vector<Mask> out;
  std::unordered_set<Mask, MaskHash> seen;
  std::vector<std::size_t> perm(n);
  while (out.size() < count) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i)
      std::swap(perm[i], perm[i + static_cast<std::size_t>(rng.below(n - i))]);
    Mask m = Mask::from_indices(n, std::span<const std::size_t>(perm.data(), k));
    if (seen.insert(m).second) out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

FourierSpectrum synthetic_truth(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<Term> terms;
  switch (spec.family) {
    case SyntheticFamily::staircase: {
      Mask chain(spec.n);
      for (std::size_t i = 0; i < spec.cardinality; ++i) {
        chain.set(i);
        terms.push_back({chain, 1.0});
      }
      break;
    }
    case SyntheticFamily::peak: {
      for (auto& set : sample_distinct_sets(spec.n, spec.cardinality, spec.num_sets, rng))
        terms.push_back({std::move(set), 0.0});
      for (auto& t : terms) t.coef = rng.uniform(-1.0, 1.0);
      break;
    }
    case SyntheticFamily::complete_hierarchy: {
      const auto top = sample_distinct_sets(spec.n, spec.cardinality, spec.num_sets, rng);
      std::unordered_set<Mask, MaskHash> closure;
      for (const auto& t : top) for_each_subset(t, [&](const Mask& sub) { closure.insert(sub); });
      std::vector<Mask> members(closure.begin(), closure.end());
      // Draw coefficients in canonical order so they do not depend on hashing.
      std::sort(members.begin(), members.end(), canonical_less);
      for (auto& m : members) terms.push_back({std::move(m), rng.uniform(-1.0, 1.0)});
      break;
    }
  }
  return FourierSpectrum(spec.n, std::move(terms));
}

Synthetic make_synthetic(const SyntheticSpec& spec) {
  auto truth = synthetic_truth(spec);
  return {std::make_shared<SpectrumValueFunction>(truth), std::move(truth)};
}

}  // namespace spex
