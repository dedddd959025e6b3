#include "spex/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spex/baselines.hpp"
#include "spex/errors.hpp"
#include "spex/extract.hpp"
#include "spex/io.hpp"
#include "spex/metrics.hpp"
#include "spex/rng.hpp"

namespace spex {

using nlohmann::json;

namespace {

// Seed streams for the independent random stages.
enum Stream : std::uint64_t { kTrainMasks = 1, kTestMasks = 2, kCvFolds = 3, kRefineFolds = 4,
                              kLassoFolds = 5, kKernelShap = 6 };

json fit_config_to_json(const FitConfig& c) {
  json j{{"num_trees", c.num_trees}, {"learning_rate", c.learning_rate}, {"min_leaf", c.min_leaf}};
  j["max_depth"] = c.max_depth ? json(*c.max_depth) : json(nullptr);
  return j;
}

FitConfig fit_config_from_json(const json& j, std::size_t folds) {
  FitConfig c;
  if (j.contains("max_depth") && !j.at("max_depth").is_null())
    c.max_depth = j.at("max_depth").get<std::size_t>();
  else if (j.contains("max_depth"))
    c.max_depth.reset();
  c.num_trees = j.value("num_trees", c.num_trees);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.min_leaf = j.value("min_leaf", c.min_leaf);
  c.folds = folds;
  return c;
}

class CountingValueFunction final : public ValueFunction {
 public:
  explicit CountingValueFunction(std::shared_ptr<const ValueFunction> inner) : inner_(std::move(inner)) {}
  std::size_t n() const override { return inner_->n(); }
  std::vector<double> query(std::span<const Mask> masks) const override {
    count_ += masks.size();
    return inner_->query(masks);
  }
  std::size_t take() const { return count_.exchange(0); }

 private:
  std::shared_ptr<const ValueFunction> inner_;
  mutable std::atomic<std::size_t> count_{0};
};

[[noreturn]] void rethrow_in_stage(const std::string& stage, const Error& e) {
  const std::string msg = "[" + stage + "] " + e.what();
  if (dynamic_cast<const InvalidArgument*>(&e)) throw InvalidArgument(msg);
  if (dynamic_cast<const CapacityError*>(&e)) throw CapacityError(msg);
  if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
  if (const auto* p = dynamic_cast<const ProviderError*>(&e)) throw ProviderError(msg, p->batch_index());
  throw InvalidArgument(msg);
}

class StageClock {
 public:
  explicit StageClock(json& timings) : timings_(timings) {}

  template <class F>
  auto operator()(const std::string& stage, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, t0);
      } else {
        auto out = fn();
        record(stage, t0);
        return out;
      }
    } catch (const Error& e) {
      rethrow_in_stage(stage, e);
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    timings_[stage] = dt.count();
  }
  json& timings_;
};

json metric_row(const std::string& name, const MetricValue& v, json params = json::object()) {
  json row{{"name", name}, {"params", std::move(params)}};
  row["value"] = v.value ? json(*v.value) : json(nullptr);
  if (!v.note.empty()) row["note"] = v.note;
  return row;
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

}  // namespace

std::size_t train_budget(double alpha, std::size_t n) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (n < 2) throw ConfigError("the pipeline needs n >= 2");
  const double nn = static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(alpha * nn * std::log2(nn)));
}

RunConfig RunConfig::from_json(const json& j) {
  try {
    RunConfig c;
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    if (j.contains("value_function")) c.value_function = j.at("value_function");
    c.alpha = j.value("alpha", c.alpha);
    c.test_masks = j.value("test_masks", c.test_masks);
    c.folds = j.value("folds", c.folds);
    c.k = j.value("k", c.k);
    c.refine = j.value("refine", c.refine);
    c.seed = j.value("seed", c.seed);
    c.batch = j.value("batch", c.batch);
    c.lasso = j.value("lasso", c.lasso);
    c.kernel_shap_budget = j.value("kernel_shap_budget", c.kernel_shap_budget);
    c.hierarchy_k = j.value("hierarchy_k", c.hierarchy_k);
    c.identify_remove = j.value("identify_remove", c.identify_remove);
    c.identify_method = parse_method(j.value("identify_method", std::string("bnb")));
    c.artifacts_dir = j.value("artifacts_dir", c.artifacts_dir);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.is_string()) {
        const auto name = g.get<std::string>();
        if (name == "desk")
          c.grid = desk_grid();
        else if (name == "full")
          c.grid = full_grid();
        else
          throw ConfigError("unknown grid '" + name + "' (expected desk, full or a list)");
      } else {
        c.grid.clear();
        for (const auto& e : g) c.grid.push_back(fit_config_from_json(e, c.folds));
      }
    }
    for (auto& f : c.grid) f.folds = c.folds;
    if (j.contains("indices"))
      for (const auto& e : j.at("indices")) {
        IndexRequest r;
        r.kind = parse_index_kind(e.at("kind").get<std::string>());
        if (e.contains("order") && !e.at("order").is_null()) r.order = e.at("order").get<std::size_t>();
        c.indices.push_back(r);
      }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
}

json RunConfig::to_json() const {
  json grid_json = json::array();
  for (const auto& g : grid) grid_json.push_back(fit_config_to_json(g));
  json idx = json::array();
  for (const auto& r : indices) {
    json e{{"kind", std::string(to_string(r.kind))}};
    e["order"] = r.order ? json(*r.order) : json(nullptr);
    idx.push_back(e);
  }
  return json{{"value_function", value_function},
              {"alpha", alpha},
              {"test_masks", test_masks},
              {"grid", grid_json},
              {"folds", folds},
              {"k", k},
              {"refine", refine},
              {"seed", seed},
              {"batch", batch},
              {"lasso", lasso},
              {"kernel_shap_budget", kernel_shap_budget},
              {"hierarchy_k", hierarchy_k},
              {"indices", idx},
              {"identify_remove", identify_remove},
              {"identify_method", identify_method == SolveMethod::bnb ? "bnb" : "brute"},
              {"artifacts_dir", artifacts_dir}};
}

json RunReport::to_json() const {
  json j = body;
  j["timings"] = timings;
  return j;
}

RunReport run(const RunConfig& config) {
  std::shared_ptr<const ValueFunction> vf;
  try {
    vf = make_value_function(config.value_function);
  } catch (const Error& e) {
    rethrow_in_stage("provider", e);
  }
  return run(config, std::move(vf));
}

RunReport run(const RunConfig& config, std::shared_ptr<const ValueFunction> base_vf) {
  if (!base_vf) throw ConfigError("no value function");
  if (config.grid.empty()) throw ConfigError("empty GBT grid");
  if (config.k < 1) throw ConfigError("k must be >= 1");
  if (config.test_masks < 1) throw ConfigError("test_masks must be >= 1");

  RunReport report;
  json& body = report.body;
  StageClock clock(report.timings);
  const auto vf = std::make_shared<CountingValueFunction>(base_vf);
  const std::size_t n = vf->n();
  const std::size_t train_count = train_budget(config.alpha, n);

  // Unbounded depth is fitted up to the extraction cap; explicit deeper
  // trees cannot be extracted and are refused.
  std::vector<FitConfig> grid = config.grid;
  bool depth_capped = false;
  for (auto& g : grid) {
    g.folds = config.folds;
    if (!g.max_depth) {
      g.max_depth = kMaxExtractDepth;
      depth_capped = true;
    } else if (*g.max_depth > kMaxExtractDepth) {
      throw ConfigError("max_depth " + std::to_string(*g.max_depth) + " exceeds the extraction cap of " +
                        std::to_string(kMaxExtractDepth));
    }
  }

  body["config"] = config.to_json();
  body["n"] = n;
  body["rng"] = Rng::kName;
  body["seeds"] = {{"run", config.seed},
                   {"train_masks", Rng::derive(config.seed, kTrainMasks)},
                   {"test_masks", Rng::derive(config.seed, kTestMasks)},
                   {"cv_folds", Rng::derive(config.seed, kCvFolds)},
                   {"refine_folds", Rng::derive(config.seed, kRefineFolds)}};
  json metrics = json::array();

  const auto train = clock("sample_query_train", [&] {
    const auto masks = sample_masks(n, train_count, Rng::derive(config.seed, kTrainMasks));
    return evaluate_dataset(*vf, masks, config.batch);
  });
  const std::size_t train_queries = vf->take();
  const auto test = clock("sample_query_test", [&] {
    const auto masks = sample_masks(n, config.test_masks, Rng::derive(config.seed, kTestMasks));
    return evaluate_dataset(*vf, masks, config.batch);
  });
  const std::size_t test_queries = vf->take();
  {
    const auto values = train.values();
    const double mu = mean_of(values);
    double var = 0.0;
    for (double v : values) var += (v - mu) * (v - mu);
    var /= static_cast<double>(values.size());
    body["data"] = {{"train_masks", train.size()}, {"test_masks", test.size()},
                    {"train_mean", mu}, {"train_variance", var}};
  }

  const auto cv = clock("fit", [&] { return cross_validate(train, grid, Rng::derive(config.seed, kCvFolds)); });
  report.model = cv.model;
  {
    json cv_rows = json::array();
    for (std::size_t g = 0; g < grid.size(); ++g)
      cv_rows.push_back({{"config", fit_config_to_json(grid[g])}, {"cv_mse", cv.cv_mse[g]}});
    body["fit"] = {{"chosen", fit_config_to_json(cv.best)},
                   {"chosen_index", cv.best_index},
                   {"grid", cv_rows},
                   {"depth_cap_applied", depth_capped},
                   {"depth_cap", kMaxExtractDepth},
                   {"trees", cv.model.trees().size()},
                   {"max_tree_depth", cv.model.max_depth()}};
  }

  const auto extracted = clock("extract", [&] { return extract_model(cv.model); });
  const auto sparse = clock("sparsify", [&] { return sparsify(extracted, config.k); });
  RefineResult refined{sparse, false, 0.0, 0.0};
  if (config.refine)
    refined = clock("refine", [&] {
      return refine(sparse, train, config.folds, Rng::derive(config.seed, kRefineFolds));
    });
  report.spectrum = refined.spectrum;
  body["spectrum"] = {{"support_extracted", extracted.size()},
                      {"support_sparsified", sparse.size()},
                      {"k", config.k},
                      {"refine_enabled", config.refine},
                      {"refine_accepted", refined.accepted},
                      {"refine_cv_mse_before", refined.cv_mse_before},
                      {"refine_cv_mse_after", refined.cv_mse_after},
                      {"degree", report.spectrum.degree()}};

  clock("faithfulness", [&] {
    auto add = [&](const std::string& name, const FourierSpectrum& s) {
      const auto tr = r2(s, train);
      const auto te = r2(s, test);
      metrics.push_back(metric_row("r2_train_" + name, tr));
      metrics.push_back(metric_row("r2_test_" + name, te));
      body["r2"][name] = {{"train", io::metric_to_json(tr)}, {"test", io::metric_to_json(te)}};
    };
    add("gbt", extracted);
    add("sparsified", sparse);
    add("final", report.spectrum);
  });

  if (!config.hierarchy_k.empty())
    clock("hierarchy", [&] {
      for (auto k : config.hierarchy_k)
        for (auto kind : {HierarchyKind::dsr, HierarchyKind::scr, HierarchyKind::shr}) {
          const auto v = hierarchy_rate(extracted, k, kind);
          metrics.push_back(metric_row(to_string(kind), v, {{"k", k}}));
          body["hierarchy"].push_back({{"metric", to_string(kind)}, {"k", k}, {"value", io::metric_to_json(v)}});
        }
    });

  std::size_t baseline_queries = 0;
  if (config.lasso)
    clock("lasso", [&] {
      const auto path = fit_lasso_path(train, 100, 1e-3, config.folds, Rng::derive(config.seed, kLassoFolds));
      const auto tr = r2(path.spectrum, train);
      const auto te = r2(path.spectrum, test);
      metrics.push_back(metric_row("r2_train_lasso", tr));
      metrics.push_back(metric_row("r2_test_lasso", te));
      body["lasso"] = {{"lambda", path.lambdas[path.best_index]},
                       {"r2_train", io::metric_to_json(tr)},
                       {"r2_test", io::metric_to_json(te)}};
    });

  if (config.kernel_shap_budget > 0)
    clock("kernel_shap", [&] {
      const auto ks = kernel_shap(*vf, config.kernel_shap_budget, Rng::derive(config.seed, kKernelShap));
      baseline_queries += vf->take();
      const auto surrogate = shapley(report.spectrum);
      const std::size_t topk = std::min<std::size_t>(10, n);
      const auto cmp = compare_shapley(surrogate, ks.values, topk);
      metrics.push_back(metric_row("shapley_recall", {cmp.recall_at_k, ""}, {{"k", topk}}));
      metrics.push_back(metric_row("shapley_mse", {cmp.mse, ""}));
      body["kernel_shap"] = {{"budget", config.kernel_shap_budget}, {"queries", ks.queries},
                             {"values", ks.values}, {"surrogate_recall_at_k", cmp.recall_at_k},
                             {"surrogate_mse", cmp.mse}, {"k", topk}};
    });

  if (!config.indices.empty())
    clock("indices", [&] {
      for (const auto& r : config.indices)
        body["indices"].push_back(io::index_report_to_json(compute_index(report.spectrum, r.kind, r.order)));
    });

  std::size_t identify_queries = 0;
  if (!config.identify_remove.empty())
    clock("identify", [&] {
      for (auto r : config.identify_remove) {
        const auto res = identify_removal(report.spectrum, r, config.identify_method);
        const auto delta = delta_output(*vf, res.best.mask);
        metrics.push_back(metric_row("delta_output", delta, {{"r", r}}));
        body["identify"].push_back({{"remove", r},
                                    {"solution", io::solution_to_json(res.best)},
                                    {"surrogate_gap", res.gap},
                                    {"delta_output", io::metric_to_json(delta)}});
      }
      identify_queries += vf->take();
    });

  body["queries"] = {{"train", train_queries},
                     {"test", test_queries},
                     {"baseline", baseline_queries},
                     {"identify", identify_queries},
                     {"total", train_queries + test_queries + baseline_queries + identify_queries}};
  body["metrics"] = metrics;

  if (!config.artifacts_dir.empty())
    clock("persist", [&] {
      namespace fs = std::filesystem;
      const fs::path dir(config.artifacts_dir);
      fs::create_directories(dir);
      std::ofstream(dir / "train.jsonl") << [&] { std::ostringstream s; io::write_dataset(s, train); return s.str(); }();
      std::ofstream(dir / "test.jsonl") << [&] { std::ostringstream s; io::write_dataset(s, test); return s.str(); }();
      std::ofstream(dir / "model.json") << io::model_to_json(report.model).dump() << '\n';
      std::ofstream(dir / "extracted.jsonl") << [&] { std::ostringstream s; io::write_spectrum(s, extracted); return s.str(); }();
      std::ofstream(dir / "spectrum.jsonl") << [&] { std::ostringstream s; io::write_spectrum(s, report.spectrum); return s.str(); }();
    });
  return report;
}

std::string report_csv(const RunReport& report) {
  std::ostringstream os;
  os << "name,value,params\n";
  for (const auto& row : report.body.value("metrics", json::array())) {
    os << row.at("name").get<std::string>() << ',';
    if (!row.at("value").is_null()) os << row.at("value").dump();
    std::string params;
    for (const auto& [key, v] : row.at("params").items())
      params += (params.empty() ? "" : ";") + key + "=" + v.dump();
    os << ',' << params << '\n';
  }
  return os.str();
}

}  // namespace spex
