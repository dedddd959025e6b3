#include "spex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "spex/errors.hpp"

namespace spex {

MetricValue r2(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size())
    throw InvalidArgument("r2: " + std::to_string(predictions.size()) + " predictions vs " +
                          std::to_string(truths.size()) + " truths");
  if (truths.empty()) throw InvalidArgument("r2: empty input");
  const double mean = std::accumulate(truths.begin(), truths.end(), 0.0) / static_cast<double>(truths.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    sse += (predictions[i] - truths[i]) * (predictions[i] - truths[i]);
    sst += (truths[i] - mean) * (truths[i] - mean);
  }
  if (sst == 0.0) {
    if (sse == 0.0) return {1.0, ""};
    return {std::nullopt, "truths are constant and residuals are nonzero"};
  }
  return {1.0 - sse / sst, ""};
}

MetricValue r2(const FourierSpectrum& spec, const MaskDataset& data) {
  std::vector<double> pred;
  pred.reserve(data.size());
  for (const auto& s : data.samples()) pred.push_back(spec.evaluate(s.mask));
  const auto truth = data.values();
  return r2(pred, truth);
}

std::vector<Mask> top_k_sets(const FourierSpectrum& spec, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  auto ranked = spec.by_magnitude();
  if (ranked.size() > k) ranked.resize(k);
  std::vector<Mask> out;
  out.reserve(ranked.size());
  for (auto& t : ranked) out.push_back(std::move(t.set));
  return out;
}

double dsr(std::span<const Mask> family) {
  if (family.empty()) return 0.0;
  const std::unordered_set<Mask, MaskHash> members(family.begin(), family.end());
  double total = 0.0;
  for (const auto& s : family) {
    const auto size = s.count();
    if (size == 0) {
      total += 1.0;
      continue;
    }
    std::size_t hits = 0;
    s.for_each([&](std::size_t i) { hits += members.contains(s.without(i)) ? 1 : 0; });
    total += static_cast<double>(hits) / static_cast<double>(size);
  }
  return total / static_cast<double>(family.size());
}

double hierarchy_rate(std::span<const Mask> family, HierarchyKind kind) {
  if (kind == HierarchyKind::dsr) return dsr(family);
  if (family.empty()) return 0.0;
  const std::unordered_set<Mask, MaskHash> members(family.begin(), family.end());
  std::size_t hits = 0;
  for (const auto& s : family) {
    const auto idx = s.indices();
    if (idx.size() > 24) throw CapacityError("hierarchy rates support sets of at most 24 elements");
    const std::size_t states = std::size_t{1} << idx.size();
    auto mask_of = [&](std::size_t code) {
      Mask m(s.width());
      for (std::size_t b = 0; b < idx.size(); ++b)
        if ((code >> b) & 1U) m.set(idx[b]);
      return m;
    };
    bool ok = true;
    if (kind == HierarchyKind::shr) {
      for (std::size_t code = 0; code < states && ok; ++code) ok = members.contains(mask_of(code));
    } else {
      // reach[code]: some ordering builds this subset with every prefix in F_k.
      std::vector<char> reach(states, 0);
      reach[0] = members.contains(Mask(s.width()));
      for (std::size_t code = 1; code < states; ++code) {
        if (!members.contains(mask_of(code))) continue;
        for (std::size_t b = 0; b < idx.size(); ++b)
          if (((code >> b) & 1U) && reach[code & ~(std::size_t{1} << b)]) {
            reach[code] = 1;
            break;
          }
      }
      ok = reach[states - 1] != 0;
    }
    hits += ok ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(family.size());
}

namespace {

MetricValue family_metric(const FourierSpectrum& spec, std::size_t k, HierarchyKind kind) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  const auto family = top_k_sets(spec, k);
  if (family.empty()) return {std::nullopt, "spectrum has no coefficients"};
  MetricValue v{hierarchy_rate(family, kind), ""};
  if (family.size() < k) v.note = "k clamped to " + std::to_string(family.size());
  return v;
}

}  // namespace

MetricValue dsr(const FourierSpectrum& spec, std::size_t k) {
  return family_metric(spec, k, HierarchyKind::dsr);
}

MetricValue hierarchy_rate(const FourierSpectrum& spec, std::size_t k, HierarchyKind kind) {
  return family_metric(spec, k, kind);
}

HierarchyKind parse_hierarchy_kind(const std::string& s) {
  if (s == "dsr") return HierarchyKind::dsr;
  if (s == "scr") return HierarchyKind::scr;
  if (s == "shr") return HierarchyKind::shr;
  throw InvalidArgument("unknown hierarchy metric '" + s + "'");
}

std::string to_string(HierarchyKind kind) {
  switch (kind) {
    case HierarchyKind::dsr: return "dsr";
    case HierarchyKind::scr: return "scr";
    case HierarchyKind::shr: return "shr";
  }
  return "unknown";
}

MetricValue delta_output(const ValueFunction& vf, const Mask& solution) {
  if (solution.width() != vf.n())
    throw InvalidArgument("delta_output: mask width does not match n");
  const std::vector<Mask> q{Mask::full(vf.n()), solution};
  const auto v = vf.query(q);
  if (v[0] == 0.0) return {std::nullopt, "f([n]) is zero"};
  return {std::abs(v[0] - v[1]) / std::abs(v[0]), ""};
}

ShapleyComparison compare_shapley(std::span<const double> estimate, std::span<const double> truth,
                                  std::size_t k) {
  if (estimate.size() != truth.size())
    throw InvalidArgument("compare_shapley: length mismatch");
  if (k == 0 || k > truth.size()) throw InvalidArgument("compare_shapley: need 1 <= k <= n");
  auto top = [k](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto a = top(estimate);
  const auto b = top(truth);
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  ShapleyComparison out;
  out.recall_at_k = static_cast<double>(common.size()) / static_cast<double>(k);
  double sse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sse += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  out.mse = truth.empty() ? 0.0 : sse / static_cast<double>(truth.size());
  return out;
}

}  // namespace spex
