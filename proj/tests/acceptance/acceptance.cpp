// One PASS/FAIL line per acceptance criterion. Usage: acceptance [N ...]
// (no arguments runs all ten). Exit status is 1 if any selected one fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spex/baselines.hpp"
#include "spex/extract.hpp"
#include "spex/gbt.hpp"
#include "spex/identify.hpp"
#include "spex/indices.hpp"
#include "spex/metrics.hpp"
#include "spex/pipeline.hpp"
#include "spex/spectrum.hpp"
#include "spex/synth.hpp"

using namespace spex;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Extraction exactness on trained ensembles.
Verdict extraction_exactness() {
  const std::size_t n = 10;
  std::mt19937_64 gen(101);
  double worst = 0.0;
  for (int m = 0; m < 20; ++m) {
    const auto F = oracle::random_sparse(gen, static_cast<int>(n), 20, 4);
    const auto target = oracle::to_spectrum(static_cast<int>(n), F);
    std::normal_distribution<double> noise(0.0, 0.05);
    MaskDataset data(n);
    for (const auto& mask : sample_masks(n, 400, 200 + m)) data.push_back({mask, target.evaluate(mask) + noise(gen)});
    FitConfig cfg;
    cfg.max_depth = 1 + m % 4;
    cfg.num_trees = 1 + static_cast<std::size_t>(gen() % 50);
    cfg.learning_rate = 0.05 + 0.05 * (m % 5);
    const auto model = fit_gbt(data, cfg);
    const auto spec = extract_model(model);
    for (std::uint64_t b = 0; b < (1U << n); ++b) {
      const auto mask = Mask::from_word(n, b);
      worst = std::max(worst, std::abs(spec.evaluate(mask) - model.predict(mask)));
    }
  }
  return {worst <= 1e-9, "max |spectrum - model| = " + fmt("%.3g", worst) + " (tol 1e-9)"};
}

// 2. Transform round trip and Parseval.
Verdict transform_round_trip() {
  const std::size_t n = 12;
  std::mt19937_64 gen(102);
  std::normal_distribution<double> val(0.0, 1.0);
  double worst_inv = 0.0, worst_energy = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> table(std::size_t{1} << n);
    for (auto& v : table) v = val(gen);
    const auto spec = exact_transform(n, table);
    const auto back = dense_table(spec);
    double e_table = 0.0, e_spec = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
      worst_inv = std::max(worst_inv, std::abs(back[i] - table[i]));
      e_table += table[i] * table[i];
    }
    e_table /= static_cast<double>(table.size());
    for (const auto& t : spec.terms()) e_spec += t.coef * t.coef;
    worst_energy = std::max(worst_energy, std::abs(e_table - e_spec) / e_table);
  }
  return {worst_inv <= 1e-12 && worst_energy <= 1e-9,
          "inverse err " + fmt("%.3g", worst_inv) + " (tol 1e-12), energy rel err " + fmt("%.3g", worst_energy) +
              " (tol 1e-9)"};
}

// 3. DSR of the worked example {∅, {1}, {2}, {1,3}}.
Verdict dsr_example() {
  const std::vector<Mask> family{Mask(4), Mask::from_indices(4, {1}), Mask::from_indices(4, {2}),
                                 Mask::from_indices(4, {1, 3})};
  const double v = dsr(family);
  return {v == 7.0 / 8.0, "DSR = " + fmt("%.17g", v) + " (expected 7/8)"};
}

// 4. Shapley from Fourier coefficients against enumeration, plus efficiency.
Verdict shapley_correctness() {
  const int n = 8;
  std::mt19937_64 gen(104);
  double worst = 0.0, worst_eff = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto F = oracle::random_sparse(gen, n, 1 + static_cast<int>(gen() % 30), 4);
    const auto spec = oracle::to_spectrum(n, F);
    const auto f = oracle::table_from_fourier(n, F);
    const auto truth = oracle::shapley(n, f);
    const auto phi = shapley(spec);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(phi[i] - truth[i]));
      sum += phi[i];
    }
    worst_eff = std::max(worst_eff, std::abs(sum - shapley_efficiency_total(spec)));
    worst_eff = std::max(worst_eff, std::abs(sum - (f.back() - f.front())));
  }
  return {worst <= 1e-9 && worst_eff <= 1e-9,
          "max |phi - enumeration| = " + fmt("%.3g", worst) + ", efficiency err " + fmt("%.3g", worst_eff) +
              " (tol 1e-9)"};
}

// 5. Möbius and every interaction index against brute-force definitions.
Verdict interaction_oracles() {
  const int n = 6;
  const double tol = 1e-8;
  std::mt19937_64 gen(105);
  double worst = 0.0;
  std::string worst_row = "none";
  auto compare = [&](const IndexReport& r, const oracle::Table& expected, int max_order, const std::string& row) {
    for (std::uint32_t T = 0; T < (1U << n); ++T) {
      if (oracle::pc(T) > max_order) continue;
      const double err = std::abs(r.at(oracle::to_mask(n, T)) - expected[T]);
      if (err > worst) {
        worst = err;
        worst_row = row;
      }
    }
    for (const auto& v : r.values)
      if (static_cast<int>(v.set.count()) > max_order) {
        worst = INFINITY;
        worst_row = row + " (order exceeded)";
      }
  };
  auto per_feature = [&](const std::vector<double>& got, const std::vector<double>& expected, const std::string& row) {
    for (int i = 0; i < n; ++i) {
      const double err = std::abs(got[i] - expected[i]);
      if (err > worst) {
        worst = err;
        worst_row = row;
      }
    }
  };
  for (int rep = 0; rep < 5; ++rep) {
    const auto F = oracle::random_sparse(gen, n, 20, n);
    const auto spec = oracle::to_spectrum(n, F);
    const auto f = oracle::table_from_fourier(n, F);

    const auto mob = fourier_to_mobius(spec);
    const auto omob = oracle::mobius(n, f);
    for (std::uint32_t T = 0; T < (1U << n); ++T) {
      const double err = std::abs(mob.coef(oracle::to_mask(n, T)) - omob[T]);
      if (err > worst) {
        worst = err;
        worst_row = "fourier_to_mobius";
      }
    }
    per_feature(feature_index(spec, IndexKind::shapley), oracle::shapley(n, f), "shapley");
    per_feature(feature_index(spec, IndexKind::banzhaf), oracle::banzhaf(n, f), "banzhaf");
    per_feature(feature_index(spec, IndexKind::influence), oracle::influence(n, f), "influence");
    compare(interaction_index(spec, IndexKind::mobius), omob, n, "mobius");
    compare(interaction_index(spec, IndexKind::or_), oracle::or_index(n, f), n, "or");
    compare(interaction_index(spec, IndexKind::banzhaf_interaction), oracle::banzhaf_interaction(n, f), n,
            "banzhaf_interaction");
    compare(interaction_index(spec, IndexKind::shapley_interaction), oracle::shapley_interaction(n, f), n,
            "shapley_interaction");
    for (int l = 1; l <= 4; ++l) {
      compare(interaction_index(spec, IndexKind::shapley_taylor, l), oracle::shapley_taylor(n, f, l), l,
              "shapley_taylor");
      compare(interaction_index(spec, IndexKind::faith_banzhaf, l), oracle::faith_banzhaf(n, f, l), l,
              "faith_banzhaf");
      compare(interaction_index(spec, IndexKind::faith_shapley, l), oracle::faith_shapley(n, f, l), l,
              "faith_shapley");
    }
  }
  return {worst <= tol, "max err " + fmt("%.3g", worst) + " in " + worst_row + " (tol 1e-8)"};
}

// 6. Branch-and-bound against exhaustive search.
Verdict identification_optimality() {
  const int n = 14;
  std::mt19937_64 gen(106);
  int agree = 0, proven = 0, feasible = 0;
  const std::size_t removals[] = {2, 5, 8};
  for (int rep = 0; rep < 50; ++rep) {
    const auto spec = oracle::to_spectrum(n, oracle::random_sparse(gen, n, 25, 4));
    const std::size_t r = removals[rep % 3];
    const auto dir = rep % 2 ? Direction::min : Direction::max;
    const auto prog = build_program(spec, r, dir);
    const auto bnb = solve(prog, SolveMethod::bnb);
    const auto brute = solve(prog, SolveMethod::brute);
    const double scale = std::max(1.0, std::abs(brute.objective));
    agree += std::abs(bnb.objective - brute.objective) <= 1e-9 * scale;
    proven += bnb.optimality == Optimality::proven;
    const auto mob = fourier_to_mobius(spec);
    feasible += bnb.mask.count() == n - r && std::abs(mob.evaluate(bnb.mask) - bnb.objective) <= 1e-9 * scale;
  }
  return {agree == 50 && proven == 50 && feasible == 50,
          std::to_string(agree) + "/50 objectives match, " + std::to_string(proven) + "/50 proven, " +
              std::to_string(feasible) + "/50 feasible"};
}

// Finite-depth entries of the full grid.
std::vector<FitConfig> hierarchy_grid() {
  std::vector<FitConfig> grid;
  for (const auto& c : full_grid())
    if (c.max_depth) grid.push_back(c);
  return grid;
}

RunConfig synthetic_run(const std::string& family, std::uint64_t seed) {
  RunConfig c;
  c.value_function = {{"kind", "synthetic"}, {"family", family}, {"n", 64}, {"num_sets", 10},
                      {"cardinality", 5},     {"seed", seed}};
  c.alpha = 8.0;
  c.seed = seed;
  c.grid = hierarchy_grid();
  c.refine = false;
  return c;
}

// 7. GBT beats LASSO on the hierarchy, and does worse on the peak family.
Verdict hierarchy_benefit() {
  std::ostringstream detail;
  int beats_lasso = 0, peak_lower = 0;
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto hc = synthetic_run("complete_hierarchy", seed);
    hc.lasso = true;
    const auto h = run(hc).body;
    const auto p = run(synthetic_run("peak", seed)).body;
    const double gbt = h.at("r2").at("gbt").at("test").at("value").get<double>();
    const double lasso = h.at("lasso").at("r2_test").at("value").get<double>();
    const double peak = p.at("r2").at("gbt").at("test").at("value").get<double>();
    beats_lasso += gbt > lasso;
    peak_lower += peak < gbt;
    mean += gbt / 5.0;
    detail << " s" << seed << "{gbt " << fmt("%.3f", gbt) << ", lasso " << fmt("%.3f", lasso) << ", peak "
           << fmt("%.3f", peak) << "}";
  }
  return {beats_lasso == 5 && mean >= 0.7 && peak_lower >= 4,
          "mean R2(GBT) " + fmt("%.4f", mean) + " (need >= 0.7), GBT > LASSO on " + std::to_string(beats_lasso) +
              "/5, peak < hierarchy on " + std::to_string(peak_lower) + "/5;" + detail.str()};
}

// 8. Hierarchy rates of ground-truth spectra.
Verdict truth_hierarchy_metrics() {
  const auto hier = synthetic_truth({SyntheticFamily::complete_hierarchy, 64, 10, 5, 1});
  const std::size_t k = hier.size();
  const double d = *dsr(hier, k).value;
  const double c = *hierarchy_rate(hier, k, HierarchyKind::scr).value;
  const double s = *hierarchy_rate(hier, k, HierarchyKind::shr).value;
  const auto peak = synthetic_truth({SyntheticFamily::peak, 64, 10, 5, 1});
  const double pd = *dsr(peak, 10).value;
  return {d == 1.0 && c == 1.0 && s == 1.0 && pd == 0.0 && !peak.contains(Mask(64)),
          "hierarchy DSR/SCR/SHR " + fmt("%g", d) + "/" + fmt("%g", c) + "/" + fmt("%g", s) + " at k=" +
              std::to_string(k) + ", peak DSR " + fmt("%g", pd) + " at k=10"};
}

// 9. KernelSHAP with a 10000-query budget against enumerated Shapley values.
Verdict kernel_shap_convergence() {
  const int n = 10;
  double mse = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 gen(900 + seed);
    const auto F = oracle::random_sparse(gen, n, 30, 4);
    const auto truth = oracle::shapley(n, oracle::table_from_fourier(n, F));
    const SpectrumValueFunction vf(oracle::to_spectrum(n, F));
    const auto est = kernel_shap(vf, 10000, seed);
    mse += compare_shapley(est.values, truth, 10).mse / 10.0;
  }
  return {mse <= 1e-4, "mean MSE " + fmt("%.3g", mse) + " (tol 1e-4)"};
}

// 10. Identical reports from identical configurations.
Verdict pipeline_determinism() {
  RunConfig c;
  c.value_function = {{"kind", "synthetic"}, {"family", "complete_hierarchy"}, {"n", 20},
                      {"num_sets", 4},       {"cardinality", 3},              {"seed", 7}};
  c.seed = 42;
  c.lasso = true;
  c.kernel_shap_budget = 500;
  c.hierarchy_k = {10, 50};
  c.indices = {{IndexKind::shapley, std::nullopt}, {IndexKind::faith_shapley, 2}};
  c.identify_remove = {3};
  const auto a = run(c).body.dump();
  const auto b = run(c).body.dump();
  return {a == b, a == b ? "reports identical (" + std::to_string(a.size()) + " bytes)" : "reports differ"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "extraction exactness", 30, extraction_exactness},
      {2, "transform round trip and Parseval", 30, transform_round_trip},
      {3, "DSR worked example", 1, dsr_example},
      {4, "Shapley correctness", 60, shapley_correctness},
      {5, "Mobius and interaction oracles", 120, interaction_oracles},
      {6, "identification optimality", 120, identification_optimality},
      {7, "hierarchy benefit", 600, hierarchy_benefit},
      {8, "hierarchy metrics on truth spectra", 1, truth_hierarchy_metrics},
      {9, "KernelSHAP convergence", 120, kernel_shap_convergence},
      {10, "pipeline determinism", 60, pipeline_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool ok = v.pass && in_time;
    failures += !ok;
    std::printf("[%s] %2d %s: %s; %.2fs (limit %.0fs%s)\n", ok ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                secs, c.limit_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
