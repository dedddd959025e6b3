#include "spex/indices.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "spex/errors.hpp"

namespace spex {

namespace {

// Neumaier-compensated running sum.
struct Compensated {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

using Accumulator = std::unordered_map<Mask, Compensated, MaskHash>;

double pow_m2(std::size_t k) { return std::ldexp(k % 2 ? -1.0 : 1.0, static_cast<int>(k)); }

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

std::vector<Term> finish(std::size_t n, const Accumulator& acc) {
  std::vector<Term> terms;
  terms.reserve(acc.size());
  for (const auto& [key, c] : acc) {
    const double v = c.value();
    if (v != 0.0) terms.push_back({key, v});
  }
  // Reuse the spectrum constructor for validation and canonical ordering.
  auto sorted = MobiusSpectrum(n, std::move(terms));
  return {sorted.terms().begin(), sorted.terms().end()};
}

std::size_t require_order(IndexKind kind, std::optional<std::size_t> order) {
  if (!order || *order < 1)
    throw InvalidArgument(std::string(to_string(kind)) + " needs an order >= 1");
  return *order;
}

// γ(S,T,ℓ) depends on |S| and |T| only: Σ over sizes r of the C(s-t, r-t)
// sets R with T ⊂ R ⊆ S, |R| = r > ℓ.
double faith_shapley_gamma(std::size_t s, std::size_t t, std::size_t l) {
  Compensated g;
  for (std::size_t r = std::max(l + 1, t + 1); r <= s; ++r)
    g.add(binomial(s - t, r - t) * binomial(r - 1, l) / binomial(r + l - 1, l + t) * pow_m2(r));
  return g.value();
}

}  // namespace

IndexKind parse_index_kind(std::string_view name) {
  static const std::map<std::string_view, IndexKind> kinds{
      {"banzhaf", IndexKind::banzhaf},
      {"shapley", IndexKind::shapley},
      {"influence", IndexKind::influence},
      {"mobius", IndexKind::mobius},
      {"or", IndexKind::or_},
      {"banzhaf_interaction", IndexKind::banzhaf_interaction},
      {"shapley_interaction", IndexKind::shapley_interaction},
      {"shapley_taylor", IndexKind::shapley_taylor},
      {"faith_banzhaf", IndexKind::faith_banzhaf},
      {"faith_shapley", IndexKind::faith_shapley},
  };
  auto it = kinds.find(name);
  if (it == kinds.end()) throw InvalidArgument("unknown index kind '" + std::string(name) + "'");
  return it->second;
}

std::string_view to_string(IndexKind kind) {
  switch (kind) {
    case IndexKind::banzhaf: return "banzhaf";
    case IndexKind::shapley: return "shapley";
    case IndexKind::influence: return "influence";
    case IndexKind::mobius: return "mobius";
    case IndexKind::or_: return "or";
    case IndexKind::banzhaf_interaction: return "banzhaf_interaction";
    case IndexKind::shapley_interaction: return "shapley_interaction";
    case IndexKind::shapley_taylor: return "shapley_taylor";
    case IndexKind::faith_banzhaf: return "faith_banzhaf";
    case IndexKind::faith_shapley: return "faith_shapley";
  }
  return "unknown";
}

bool is_per_feature(IndexKind kind) {
  return kind == IndexKind::banzhaf || kind == IndexKind::shapley || kind == IndexKind::influence;
}

bool is_order_bounded(IndexKind kind) {
  return kind == IndexKind::shapley_taylor || kind == IndexKind::faith_banzhaf ||
         kind == IndexKind::faith_shapley;
}

double IndexReport::at(const Mask& set) const {
  for (const auto& t : values)
    if (t.set == set) return t.coef;
  return 0.0;
}

std::vector<double> shapley(const FourierSpectrum& spec) {
  std::vector<Compensated> acc(spec.n());
  for (const auto& t : spec.terms()) {
    const auto size = t.set.count();
    if (size % 2 == 0) continue;
    const double share = -2.0 * t.coef / static_cast<double>(size);
    t.set.for_each([&](std::size_t i) { acc[i].add(share); });
  }
  std::vector<double> out;
  out.reserve(acc.size());
  for (const auto& a : acc) out.push_back(a.value());
  return out;
}

std::vector<double> feature_index(const FourierSpectrum& spec, IndexKind kind) {
  std::vector<double> out(spec.n(), 0.0);
  switch (kind) {
    case IndexKind::banzhaf:
      for (const auto& t : spec.terms())
        if (t.set.count() == 1) out[t.set.indices().front()] = -2.0 * t.coef;
      return out;
    case IndexKind::influence: {
      std::vector<Compensated> acc(spec.n());
      for (const auto& t : spec.terms()) t.set.for_each([&](std::size_t i) { acc[i].add(t.coef * t.coef); });
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].value();
      return out;
    }
    case IndexKind::shapley:
      return shapley(spec);
    default:
      throw InvalidArgument("feature_index: '" + std::string(to_string(kind)) +
                            "' is not a per-feature index");
  }
}

IndexReport interaction_index(const FourierSpectrum& spec, IndexKind kind,
                              std::optional<std::size_t> order) {
  const std::size_t n = spec.n();
  IndexReport report;
  report.kind = kind;
  Accumulator acc;

  switch (kind) {
    case IndexKind::mobius: {
      const auto m = fourier_to_mobius(spec);
      report.values.assign(m.terms().begin(), m.terms().end());
      return report;
    }
    case IndexKind::or_: {
      // T = ∅ takes Σ_S F(S); otherwise -(-2)^{|T|} Σ_{S ⊇ T} (-1)^{|S|} F(S).
      for (const auto& t : spec.terms()) {
        acc[Mask(n)].add(t.coef);
        const double signed_coef = t.set.count() % 2 ? -t.coef : t.coef;
        for_each_subset(t.set, [&](const Mask& sub) {
          if (!sub.empty()) acc[sub].add(-pow_m2(sub.count()) * signed_coef);
        });
      }
      break;
    }
    case IndexKind::banzhaf_interaction:
      // Average of the discrete derivative over the complement; only T itself survives.
      for (const auto& t : spec.terms()) acc[t.set].add(pow_m2(t.set.count()) * t.coef);
      break;
    case IndexKind::shapley_interaction:
      for (const auto& t : spec.terms()) {
        const auto s = t.set.count();
        for_each_subset(t.set, [&](const Mask& sub) {
          const auto k = sub.count();
          if ((s - k) % 2 == 0)
            acc[sub].add(pow_m2(k) * t.coef / static_cast<double>(s - k + 1));
        });
      }
      break;
    case IndexKind::shapley_taylor: {
      const auto l = require_order(kind, order);
      report.order = l;
      const auto m = fourier_to_mobius(spec);
      for (const auto& t : m.terms()) {
        const auto s = t.set.count();
        if (s < l) {
          acc[t.set].add(t.coef);
          continue;
        }
        const double share = t.coef / binomial(s, l);
        for_each_subset(t.set, [&](const Mask& sub) {
          if (sub.count() == l) acc[sub].add(share);
        });
      }
      break;
    }
    case IndexKind::faith_banzhaf: {
      const auto l = require_order(kind, order);
      report.order = l;
      for (const auto& t : spec.terms()) {
        if (t.set.count() > l) continue;
        for_each_subset(t.set, [&](const Mask& sub) { acc[sub].add(pow_m2(sub.count()) * t.coef); });
      }
      break;
    }
    case IndexKind::faith_shapley: {
      const auto l = require_order(kind, order);
      report.order = l;
      const auto m = fourier_to_mobius(spec);
      for (const auto& t : m.terms())
        if (t.set.count() <= l) acc[t.set].add(t.coef);
      std::map<std::pair<std::size_t, std::size_t>, double> gamma;
      for (const auto& t : spec.terms()) {
        const auto s = t.set.count();
        if (s <= l) continue;
        for_each_subset(t.set, [&](const Mask& sub) {
          const auto k = sub.count();
          if (k == 0 || k > l) return;
          auto [it, fresh] = gamma.try_emplace({s, k}, 0.0);
          if (fresh) it->second = faith_shapley_gamma(s, k, l);
          const double lead = ((l - k) % 2 ? -1.0 : 1.0) * static_cast<double>(k) /
                              static_cast<double>(l + k) * binomial(l, k);
          acc[sub].add(lead * t.coef * it->second);
        });
      }
      break;
    }
    default:
      throw InvalidArgument("interaction_index: '" + std::string(to_string(kind)) +
                            "' is a per-feature index");
  }
  report.values = finish(n, acc);
  return report;
}

IndexReport compute_index(const FourierSpectrum& spec, IndexKind kind,
                          std::optional<std::size_t> order) {
  if (!is_per_feature(kind)) return interaction_index(spec, kind, order);
  IndexReport report;
  report.kind = kind;
  const auto values = feature_index(spec, kind);
  for (std::size_t i = 0; i < values.size(); ++i)
    report.values.push_back({Mask::from_indices(spec.n(), {i}), values[i]});
  return report;
}

double shapley_efficiency_total(const FourierSpectrum& spec) {
  return spec.evaluate(Mask::full(spec.n())) - spec.evaluate(Mask(spec.n()));
}

}  // namespace spex
