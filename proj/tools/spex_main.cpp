// spex: command-line front end. Every subcommand reads files, calls one
// library operation and writes the result; no numerics live here.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spex/errors.hpp"
#include "spex/extract.hpp"
#include "spex/gbt.hpp"
#include "spex/identify.hpp"
#include "spex/indices.hpp"
#include "spex/io.hpp"
#include "spex/metrics.hpp"
#include "spex/parallel.hpp"
#include "spex/pipeline.hpp"
#include "spex/setfn.hpp"
#include "spex/spectrum.hpp"
#include "spex/synth.hpp"

namespace {

using nlohmann::json;
using namespace spex;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Writes to the path, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    io::write_text_file(path, text);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

MaskDataset load_dataset(const std::string& path) {
  auto in = open_in(path);
  return io::read_dataset(in);
}

FourierSpectrum load_fourier(const std::string& path) {
  auto in = open_in(path);
  return io::read_fourier(in);
}

template <Basis B>
std::string spectrum_text(const Spectrum<B>& s) {
  std::ostringstream os;
  io::write_spectrum(os, s);
  return os.str();
}

std::string metrics_text(const std::vector<json>& rows, const std::string& format) {
  if (format == "json") {
    json arr = rows;
    return arr.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "name,value,params\n";
  for (const auto& row : rows) {
    os << row.at("name").get<std::string>() << ',';
    if (!row.at("value").is_null()) os << row.at("value").dump();
    std::string params;
    for (const auto& [key, v] : row.at("params").items())
      params += (params.empty() ? "" : ";") + key + "=" + v.dump();
    os << ',' << params << '\n';
  }
  return os.str();
}

json metric_row(const std::string& name, const MetricValue& v, json params = json::object()) {
  json row{{"name", name}, {"params", std::move(params)}};
  row["value"] = v.value ? json(*v.value) : json(nullptr);
  if (!v.note.empty()) row["note"] = v.note;
  return row;
}

std::optional<std::size_t> parse_depth(const std::string& s) {
  if (s == "none" || s == "None" || s == "unbounded") return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto v = std::stoul(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("max depth must be a non-negative integer or 'none', got '" + s + "'");
}

void print_error(const std::string& kind, const std::string& message,
                 std::optional<std::size_t> batch = std::nullopt) {
  json diag{{"error", kind}, {"message", message}};
  if (batch) diag["batch"] = *batch;
  std::cerr << diag.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spex: spectral explanations of black-box set functions via boosted trees"};
  app.require_subcommand(1);
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "Worker thread cap (falls back to SPEX_THREADS)");

  // Shared option storage; each subcommand binds only what it uses.
  std::string vf_path, masks_path, data_path, model_path, spectrum_path, out_path, config_path;
  std::string report_path, csv_path, artifacts_dir, format = "csv", truth_path;
  std::uint64_t seed = 0;
  std::size_t n = 0, count = 0, k = 0, folds = 5, batch = 256, remove = 0;

  // sample
  auto* sample = app.add_subcommand("sample", "Draw uniform random masks");
  sample->add_option("--n", n, "Feature count")->required();
  sample->add_option("--count", count, "Number of masks")->required();
  sample->add_option("--seed", seed, "RNG seed");
  sample->add_option("--out", out_path, "Output mask file (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Query a value function on a mask file");
  eval->add_option("--vf", vf_path, "Provider description (JSON)")->required();
  eval->add_option("--masks", masks_path, "Mask or dataset file")->required();
  eval->add_option("--batch", batch, "Masks per provider batch");
  eval->add_option("--out", out_path, "Output dataset (default stdout)");

  // fit
  std::string grid_name = "desk", depth_text;
  std::optional<std::size_t> trees, min_leaf;
  std::optional<double> lr;
  std::string cv_path;
  auto* fit = app.add_subcommand("fit", "Fit a boosted-tree proxy (grid search or a single config)");
  fit->add_option("--data", data_path, "Training dataset")->required();
  fit->add_option("--grid", grid_name, "Named grid for cross-validation")->check(CLI::IsMember({"desk", "full"}));
  fit->add_option("--max-depth", depth_text, "Single config: tree depth or 'none'");
  fit->add_option("--trees", trees, "Single config: number of trees");
  fit->add_option("--lr", lr, "Single config: learning rate");
  fit->add_option("--min-leaf", min_leaf, "Minimum samples per leaf");
  fit->add_option("--folds", folds, "Cross-validation folds");
  fit->add_option("--seed", seed, "Fold shuffle seed");
  fit->add_option("--cv-report", cv_path, "Write per-config CV errors (JSON)");
  fit->add_option("--out", out_path, "Model file (default stdout)");

  // extract
  auto* extract = app.add_subcommand("extract", "Exact Fourier spectrum of a model");
  extract->add_option("--model", model_path, "Model file")->required();
  extract->add_option("--out", out_path, "Spectrum file (default stdout)");

  // sparsify
  auto* sparsify_cmd = app.add_subcommand("sparsify", "Keep the k largest coefficients");
  sparsify_cmd->add_option("--spectrum", spectrum_path, "Fourier spectrum file")->required();
  sparsify_cmd->add_option("--k", k, "Coefficients to keep")->required();
  sparsify_cmd->add_option("--out", out_path, "Spectrum file (default stdout)");

  // refine
  auto* refine_cmd = app.add_subcommand("refine", "Least-squares refit on a fixed support, kept if CV improves");
  refine_cmd->add_option("--spectrum", spectrum_path, "Fourier spectrum file")->required();
  refine_cmd->add_option("--data", data_path, "Dataset")->required();
  refine_cmd->add_option("--folds", folds, "Cross-validation folds");
  refine_cmd->add_option("--seed", seed, "Fold shuffle seed");
  refine_cmd->add_option("--out", out_path, "Spectrum file (default stdout)");

  // convert
  std::string index_name, to_basis;
  std::optional<std::size_t> order;
  auto* convert = app.add_subcommand("convert", "Möbius spectrum or an attribution/interaction index");
  convert->add_option("--spectrum", spectrum_path, "Fourier spectrum file")->required();
  auto* idx_opt = convert->add_option("--index", index_name, "Index kind (shapley, banzhaf, influence, mobius, or, "
                                                              "banzhaf_interaction, shapley_interaction, "
                                                              "shapley_taylor, faith_banzhaf, faith_shapley)");
  auto* to_opt = convert->add_option("--to", to_basis, "Write the spectrum in another basis")
                     ->check(CLI::IsMember({"mobius"}));
  idx_opt->excludes(to_opt);
  convert->add_option("--order", order, "Order for order-bounded indices");
  convert->add_option("--out", out_path, "Output (default stdout)");

  // identify
  std::string method_name = "bnb", direction_name = "auto";
  std::size_t max_nodes = 1'000'000;
  double max_seconds = 0.0;
  auto* identify = app.add_subcommand("identify", "Features whose removal moves the surrogate most");
  identify->add_option("--spectrum", spectrum_path, "Fourier spectrum file")->required();
  identify->add_option("--remove", remove, "Number of features to remove")->required();
  identify->add_option("--method", method_name, "Solver")->check(CLI::IsMember({"bnb", "brute"}));
  identify->add_option("--direction", direction_name, "max, min, or auto (farther from the full-set value)")
      ->check(CLI::IsMember({"auto", "max", "min"}));
  identify->add_option("--max-nodes", max_nodes, "Branch-and-bound node limit");
  identify->add_option("--max-seconds", max_seconds, "Branch-and-bound time limit (0: none)");
  identify->add_option("--vf", vf_path, "Provider to measure the true output change");
  identify->add_option("--out", out_path, "Solution JSON (default stdout)");

  // metrics
  std::vector<std::size_t> ks;
  std::string kinds_text = "dsr,scr,shr";
  auto* metrics_cmd = app.add_subcommand("metrics", "Faithfulness and hierarchy metrics of a spectrum");
  metrics_cmd->add_option("--spectrum", spectrum_path, "Fourier spectrum file")->required();
  metrics_cmd->add_option("--data", data_path, "Dataset for R²");
  metrics_cmd->add_option("--k", ks, "Top-k sizes for hierarchy rates")->delimiter(',');
  metrics_cmd->add_option("--kinds", kinds_text, "Comma-separated hierarchy rates");
  metrics_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  metrics_cmd->add_option("--out", out_path, "Output (default stdout)");

  // synth
  std::string family = "complete_hierarchy";
  std::size_t num_sets = 10, cardinality = 5;
  std::size_t synth_n = 64;
  auto* synth = app.add_subcommand("synth", "Describe a synthetic value function");
  synth->add_option("--family", family, "peak, complete_hierarchy or staircase");
  synth->add_option("--n", synth_n, "Feature count");
  synth->add_option("--num-sets", num_sets, "Number of top-level sets");
  synth->add_option("--cardinality", cardinality, "Size of each top-level set");
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--out", out_path, "Provider description (default stdout)");
  synth->add_option("--truth", truth_path, "Also write the ground-truth spectrum");

  // run
  std::optional<double> alpha;
  std::optional<std::size_t> run_k, test_masks, run_folds, ks_budget;
  std::optional<std::uint64_t> run_seed;
  std::string run_grid;
  bool no_refine = false, lasso = false;
  auto* run_cmd = app.add_subcommand("run", "End-to-end pipeline");
  run_cmd->add_option("--config", config_path, "Run config (JSON); flags override its fields");
  run_cmd->add_option("--vf", vf_path, "Provider description (JSON)");
  run_cmd->add_option("--alpha", alpha, "Training budget factor");
  run_cmd->add_option("--k", run_k, "Coefficients kept after extraction");
  run_cmd->add_option("--test-masks", test_masks, "Held-out masks");
  run_cmd->add_option("--folds", run_folds, "Cross-validation folds");
  run_cmd->add_option("--grid", run_grid, "Named GBT grid")->check(CLI::IsMember({"desk", "full"}));
  run_cmd->add_option("--seed", run_seed, "Run seed");
  run_cmd->add_flag("--no-refine", no_refine, "Skip the least-squares refit");
  run_cmd->add_flag("--lasso", lasso, "Also fit the LASSO baseline");
  run_cmd->add_option("--kernel-shap-budget", ks_budget, "Also run KernelSHAP with this budget");
  run_cmd->add_option("--report", report_path, "Report JSON (default stdout)");
  run_cmd->add_option("--csv", csv_path, "Metric table CSV");
  run_cmd->add_option("--artifacts", artifacts_dir, "Persist intermediate artifacts here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage-error", e.what());
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (threads) set_max_threads(*threads);

    if (*sample) {
      const auto masks = sample_masks(n, count, seed);
      std::ostringstream os;
      io::write_masks(os, n, masks);
      emit(out_path, os.str());
    } else if (*eval) {
      const auto provider = io::read_json_file(vf_path);
      const auto vf = make_value_function(provider);
      auto in = open_in(masks_path);
      std::size_t mn = 0;
      const auto masks = io::read_masks(in, &mn);
      if (mn != vf->n())
        throw InvalidArgument("mask file has n=" + std::to_string(mn) + " but the provider has n=" +
                              std::to_string(vf->n()));
      const auto data = evaluate_dataset(*vf, masks, eval->count("--batch") ? batch : provider_batch_size(provider));
      std::ostringstream os;
      io::write_dataset(os, data);
      emit(out_path, os.str());
    } else if (*fit) {
      const auto data = load_dataset(data_path);
      const bool single = !depth_text.empty() || trees || lr;
      GbtModel model;
      if (single) {
        FitConfig cfg;
        if (!depth_text.empty()) cfg.max_depth = parse_depth(depth_text);
        if (trees) cfg.num_trees = *trees;
        if (lr) cfg.learning_rate = *lr;
        if (min_leaf) cfg.min_leaf = *min_leaf;
        cfg.folds = folds;
        model = fit_gbt(data, cfg);
      } else {
        auto grid = grid_name == "full" ? full_grid() : desk_grid();
        for (auto& g : grid) {
          g.folds = folds;
          if (min_leaf) g.min_leaf = *min_leaf;
        }
        const auto cv = cross_validate(data, grid, seed);
        model = cv.model;
        if (!cv_path.empty()) {
          json rows = json::array();
          for (std::size_t i = 0; i < grid.size(); ++i)
            rows.push_back({{"config", grid[i].describe()}, {"cv_mse", cv.cv_mse[i]}});
          io::write_text_file(cv_path, json{{"best_index", cv.best_index}, {"grid", rows}}.dump(2) + "\n");
        }
      }
      emit(out_path, io::model_to_json(model).dump() + "\n");
    } else if (*extract) {
      const auto model = io::model_from_json(io::read_json_file(model_path));
      emit(out_path, spectrum_text(extract_model(model)));
    } else if (*sparsify_cmd) {
      emit(out_path, spectrum_text(sparsify(load_fourier(spectrum_path), k)));
    } else if (*refine_cmd) {
      const auto res = refine(load_fourier(spectrum_path), load_dataset(data_path), folds, seed);
      std::cerr << json{{"accepted", res.accepted},
                        {"cv_mse_before", res.cv_mse_before},
                        {"cv_mse_after", res.cv_mse_after}}
                       .dump()
                << '\n';
      emit(out_path, spectrum_text(res.spectrum));
    } else if (*convert) {
      const auto spec = load_fourier(spectrum_path);
      if (!to_basis.empty()) {
        emit(out_path, spectrum_text(fourier_to_mobius(spec)));
      } else {
        if (index_name.empty()) throw ConfigError("convert needs --index or --to");
        const auto report = compute_index(spec, parse_index_kind(index_name), order);
        emit(out_path, io::index_report_to_json(report).dump(2) + "\n");
      }
    } else if (*identify) {
      const auto spec = load_fourier(spectrum_path);
      const auto method = parse_method(method_name);
      const SolveLimits limits{max_nodes, max_seconds};
      json out;
      IdentSolution chosen;
      if (direction_name == "auto") {
        const auto res = identify_removal(spec, remove, method, limits);
        chosen = res.best;
        out = io::solution_to_json(res.best);
        out["full_value"] = res.full_value;
        out["gap"] = res.gap;
      } else {
        chosen = solve(build_program(spec, remove, parse_direction(direction_name)), method, limits);
        out = io::solution_to_json(chosen);
      }
      out["method"] = method_name;
      out["remove"] = remove;
      if (!vf_path.empty()) {
        const auto vf = make_value_function(io::read_json_file(vf_path));
        out["delta_output"] = io::metric_to_json(delta_output(*vf, chosen.mask));
      }
      emit(out_path, out.dump(2) + "\n");
    } else if (*metrics_cmd) {
      const auto spec = load_fourier(spectrum_path);
      std::vector<json> rows;
      if (!data_path.empty()) rows.push_back(metric_row("r2", r2(spec, load_dataset(data_path))));
      std::vector<HierarchyKind> kinds;
      std::stringstream ss(kinds_text);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) kinds.push_back(parse_hierarchy_kind(item));
      for (auto kk : ks)
        for (auto kind : kinds) rows.push_back(metric_row(to_string(kind), hierarchy_rate(spec, kk, kind), {{"k", kk}}));
      emit(out_path, metrics_text(rows, format));
    } else if (*synth) {
      SyntheticSpec s;
      s.family = parse_family(family);
      s.n = synth_n;
      s.num_sets = num_sets;
      s.cardinality = cardinality;
      s.seed = seed;
      s.validate();
      const json provider{{"kind", "synthetic"}, {"family", to_string(s.family)}, {"n", s.n},
                          {"num_sets", s.num_sets}, {"cardinality", s.cardinality}, {"seed", s.seed}};
      if (!truth_path.empty()) io::write_text_file(truth_path, spectrum_text(synthetic_truth(s)));
      emit(out_path, provider.dump(2) + "\n");
    } else if (*run_cmd) {
      json cfg_json = config_path.empty() ? json::object() : io::read_json_file(config_path);
      if (!vf_path.empty()) cfg_json["value_function"] = io::read_json_file(vf_path);
      if (!cfg_json.contains("value_function")) throw ConfigError("run needs --vf or a config with value_function");
      if (alpha) cfg_json["alpha"] = *alpha;
      if (run_k) cfg_json["k"] = *run_k;
      if (test_masks) cfg_json["test_masks"] = *test_masks;
      if (run_folds) cfg_json["folds"] = *run_folds;
      if (!run_grid.empty()) cfg_json["grid"] = run_grid;
      if (run_seed) cfg_json["seed"] = *run_seed;
      if (no_refine) cfg_json["refine"] = false;
      if (lasso) cfg_json["lasso"] = true;
      if (ks_budget) cfg_json["kernel_shap_budget"] = *ks_budget;
      if (!artifacts_dir.empty()) cfg_json["artifacts_dir"] = artifacts_dir;
      if (!cfg_json.contains("batch") && cfg_json.at("value_function").is_object())
        cfg_json["batch"] = provider_batch_size(cfg_json.at("value_function"));
      const auto report = run(RunConfig::from_json(cfg_json));
      emit(report_path, report.to_json().dump(2) + "\n");
      if (!csv_path.empty()) io::write_text_file(csv_path, report_csv(report));
    }
  } catch (const ProviderError& e) {
    print_error(e.kind(), e.what(),
                e.batch_index() == ProviderError::kNoBatch ? std::nullopt : std::optional(e.batch_index()));
    return kExitRuntime;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return kExitRuntime;
  } catch (const nlohmann::json::exception& e) {
    print_error("config-error", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    print_error("runtime-error", e.what());
    return kExitRuntime;
  }
  return EXIT_SUCCESS;
}
