#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spex/gbt.hpp"
#include "spex/identify.hpp"
#include "spex/indices.hpp"
#include "spex/setfn.hpp"
#include "spex/spectrum.hpp"

namespace spex {

struct IndexRequest {
  IndexKind kind = IndexKind::shapley;
  std::optional<std::size_t> order;
};

/// Everything a run needs; see README for the JSON layout.
struct RunConfig {
  nlohmann::json value_function;          // provider description
  double alpha = 8.0;                     // train masks = ceil(alpha * n * log2 n)
  std::size_t test_masks = 1000;
  std::vector<FitConfig> grid = desk_grid();
  std::size_t folds = 5;
  std::size_t k = 200;
  bool refine = true;
  std::uint64_t seed = 0;
  std::size_t batch = 256;

  bool lasso = false;
  std::size_t kernel_shap_budget = 0;     // 0 disables
  std::vector<std::size_t> hierarchy_k;   // DSR/SCR/SHR of the extracted spectrum
  std::vector<IndexRequest> indices;
  std::vector<std::size_t> identify_remove;
  SolveMethod identify_method = SolveMethod::bnb;

  std::string artifacts_dir;              // empty: nothing persisted

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Training-set budget for n features: ceil(alpha * n * log2 n).
std::size_t train_budget(double alpha, std::size_t n);

struct RunReport {
  nlohmann::json body;     // reproducible from config + seed
  nlohmann::json timings;  // wall-clock seconds per stage

  FourierSpectrum spectrum;  // final (sparsified, possibly refined)
  GbtModel model;

  /// Report as written to disk: body plus a "timings" member.
  nlohmann::json to_json() const;
};

/// Sample -> query -> cross-validated GBT fit -> extraction -> top-k ->
/// optional refit, then the requested metrics, indices and identification.
/// Errors carry the failing stage in their message.
RunReport run(const RunConfig& config);

/// Same, with a caller-supplied value function (config.value_function is
/// then only echoed into the report).
RunReport run(const RunConfig& config, std::shared_ptr<const ValueFunction> vf);

/// Metric rows of a report as CSV (name,value,params).
std::string report_csv(const RunReport& report);

}  // namespace spex
