#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spex/baselines.hpp"
#include "spex/errors.hpp"
#include "spex/extract.hpp"
#include "spex/gbt.hpp"
#include "spex/identify.hpp"
#include "spex/indices.hpp"
#include "spex/io.hpp"
#include "spex/metrics.hpp"
#include "spex/pipeline.hpp"
#include "spex/synth.hpp"

namespace py = pybind11;
using namespace spex;

namespace {

using Indices = std::vector<std::size_t>;
using SetMap = std::map<std::vector<std::size_t>, double>;

Indices indices_of(const Mask& m) {
  Indices out;
  m.for_each([&](std::size_t i) { out.push_back(i); });
  return out;
}

Mask mask_of(std::size_t n, const Indices& idx) {
  for (auto i : idx)
    if (i >= n) throw InvalidArgument("feature index " + std::to_string(i) + " out of range for n=" + std::to_string(n));
  return Mask::from_indices(n, idx);
}

py::dict to_dict(std::span<const Term> terms) {
  py::dict out;
  for (const auto& t : terms) out[py::tuple(py::cast(indices_of(t.set)))] = t.coef;
  return out;
}

template <Basis B>
py::dict to_map(const Spectrum<B>& s) {
  return to_dict(s.terms());
}

FourierSpectrum from_map(std::size_t n, const SetMap& coeffs) {
  std::vector<Term> terms;
  for (const auto& [idx, c] : coeffs) terms.push_back({mask_of(n, idx), c});
  return FourierSpectrum(n, std::move(terms));
}

// Python callable taking a list of index lists and returning one float each.
class PyValueFunction final : public ValueFunction {
 public:
  PyValueFunction(std::size_t n, py::function fn) : n_(n), fn_(std::move(fn)) {}
  ~PyValueFunction() override {
    py::gil_scoped_acquire gil;
    fn_ = py::function();
  }
  std::size_t n() const override { return n_; }
  std::vector<double> query(std::span<const Mask> masks) const override {
    check_widths(masks);
    std::vector<Indices> batch;
    batch.reserve(masks.size());
    for (const auto& m : masks) batch.push_back(indices_of(m));
    py::gil_scoped_acquire gil;
    auto values = fn_(batch).cast<std::vector<double>>();
    if (values.size() != masks.size())
      throw ProviderError("value function returned " + std::to_string(values.size()) + " values for " +
                          std::to_string(masks.size()) + " masks");
    return values;
  }

 private:
  std::size_t n_;
  py::function fn_;
};

py::dict solution_dict(const IdentSolution& s) {
  py::dict d;
  d["retained"] = indices_of(s.mask);
  d["objective"] = s.objective;
  d["optimality"] = to_string(s.optimality);
  d["nodes_explored"] = s.nodes_explored;
  d["direction"] = to_string(s.direction);
  return d;
}

MaskDataset dataset_of(std::size_t n, const std::vector<Indices>& masks, const std::vector<double>& values) {
  if (masks.size() != values.size()) throw InvalidArgument("masks and values differ in length");
  MaskDataset d(n);
  for (std::size_t i = 0; i < masks.size(); ++i) d.push_back({mask_of(n, masks[i]), values[i]});
  return d;
}

}  // namespace

PYBIND11_MODULE(_spex, m) {
  m.doc() = "Sparse spectral explanations of set functions";

  auto base = py::register_exception<Error>(m, "SpexError");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ProviderError>(m, "ProviderError", base.ptr());

  py::class_<FourierSpectrum>(m, "Spectrum")
      .def(py::init(&from_map), py::arg("n"), py::arg("coefficients"))
      .def_property_readonly("n", &FourierSpectrum::n)
      .def("__len__", &FourierSpectrum::size)
      .def("degree", &FourierSpectrum::degree)
      .def("coefficients", &to_map<Basis::fourier>)
      .def("coef", [](const FourierSpectrum& s, const Indices& idx) { return s.coef(mask_of(s.n(), idx)); })
      .def("evaluate", [](const FourierSpectrum& s, const Indices& idx) { return s.evaluate(mask_of(s.n(), idx)); })
      .def("__repr__", [](const FourierSpectrum& s) {
        return "Spectrum(n=" + std::to_string(s.n()) + ", terms=" + std::to_string(s.size()) + ")";
      });

  py::class_<GbtModel>(m, "Model")
      .def_property_readonly("n", &GbtModel::n)
      .def_property_readonly("num_trees", [](const GbtModel& g) { return g.trees().size(); })
      .def("max_depth", &GbtModel::max_depth)
      .def("predict", [](const GbtModel& g, const Indices& idx) { return g.predict(mask_of(g.n(), idx)); })
      .def("to_json", [](const GbtModel& g) { return io::model_to_json(g).dump(); })
      .def_static("from_json", [](const std::string& s) { return io::model_from_json(nlohmann::json::parse(s)); });

  m.def("sample_masks", [](std::size_t n, std::size_t count, std::uint64_t seed) {
    std::vector<Indices> out;
    for (const auto& mask : sample_masks(n, count, seed)) out.push_back(indices_of(mask));
    return out;
  }, py::arg("n"), py::arg("count"), py::arg("seed") = 0);

  m.def("exact_transform", [](std::size_t n, const std::vector<double>& table) { return exact_transform(n, table); },
        py::arg("n"), py::arg("table"), "Fourier spectrum of a complete table (index bit i = feature i).");
  m.def("to_mobius", [](const FourierSpectrum& s) { return to_map(fourier_to_mobius(s)); });
  m.def("sparsify", &sparsify, py::arg("spectrum"), py::arg("k"));

  m.def("fit_gbt",
        [](std::size_t n, const std::vector<Indices>& masks, const std::vector<double>& values,
           std::optional<std::size_t> max_depth, std::size_t num_trees, double learning_rate, std::size_t min_leaf) {
          FitConfig cfg;
          cfg.max_depth = max_depth;
          cfg.num_trees = num_trees;
          cfg.learning_rate = learning_rate;
          cfg.min_leaf = min_leaf;
          const auto data = dataset_of(n, masks, values);
          py::gil_scoped_release release;
          return fit_gbt(data, cfg);
        },
        py::arg("n"), py::arg("masks"), py::arg("values"), py::arg("max_depth") = 3, py::arg("num_trees") = 100,
        py::arg("learning_rate") = 0.1, py::arg("min_leaf") = 1);
  m.def("extract", [](const GbtModel& g) {
    py::gil_scoped_release release;
    return extract_model(g);
  }, py::arg("model"));

  m.def("shapley", &spex::shapley, py::arg("spectrum"));
  m.def("compute_index",
        [](const FourierSpectrum& s, const std::string& kind, std::optional<std::size_t> order) {
          const auto k = parse_index_kind(kind);
          if (is_per_feature(k)) return py::object(py::cast(feature_index(s, k)));
          return py::object(to_dict(compute_index(s, k, order).values));
        },
        py::arg("spectrum"), py::arg("kind"), py::arg("order") = py::none(),
        "Per-feature kinds return a list; interaction kinds a dict keyed by index tuples.");

  m.def("identify",
        [](const FourierSpectrum& s, std::size_t remove, const std::string& direction, const std::string& method,
           std::size_t max_nodes) {
          const SolveLimits limits{max_nodes, 0.0};
          const auto how = parse_method(method);
          if (direction == "auto") {
            const auto r = identify_removal(s, remove, how, limits);
            auto d = solution_dict(r.best);
            d["full_value"] = r.full_value;
            d["gap"] = r.gap;
            return d;
          }
          return solution_dict(solve(build_program(s, remove, parse_direction(direction)), how, limits));
        },
        py::arg("spectrum"), py::arg("remove"), py::arg("direction") = "auto", py::arg("method") = "bnb",
        py::arg("max_nodes") = SolveLimits{}.max_nodes);

  m.def("hierarchy_rate",
        [](const FourierSpectrum& s, std::size_t k, const std::string& kind) -> std::optional<double> {
          return hierarchy_rate(s, k, parse_hierarchy_kind(kind)).value;
        },
        py::arg("spectrum"), py::arg("k"), py::arg("kind") = "dsr");
  m.def("r2",
        [](const FourierSpectrum& s, const std::vector<Indices>& masks,
           const std::vector<double>& values) -> std::optional<double> {
          return spex::r2(s, dataset_of(s.n(), masks, values)).value;
        },
        py::arg("spectrum"), py::arg("masks"), py::arg("values"));

  m.def("synthetic_truth",
        [](const std::string& family, std::size_t n, std::size_t num_sets, std::size_t cardinality,
           std::uint64_t seed) { return synthetic_truth({parse_family(family), n, num_sets, cardinality, seed}); },
        py::arg("family"), py::arg("n") = 64, py::arg("num_sets") = 10, py::arg("cardinality") = 5,
        py::arg("seed") = 0);

  m.def("kernel_shap",
        [](std::size_t n, py::function fn, std::size_t budget, std::uint64_t seed) {
          const PyValueFunction vf(n, std::move(fn));
          py::gil_scoped_release release;
          return kernel_shap(vf, budget, seed).values;
        },
        py::arg("n"), py::arg("value_fn"), py::arg("budget"), py::arg("seed") = 0);

  m.def("run_json",
        [](const std::string& config, std::optional<py::function> fn) {
          const auto cfg = RunConfig::from_json(nlohmann::json::parse(config));
          RunReport report;
          if (fn) {
            const auto n = cfg.value_function.at("n").get<std::size_t>();
            auto vf = std::make_shared<PyValueFunction>(n, std::move(*fn));
            py::gil_scoped_release release;
            report = run(cfg, std::move(vf));
          } else {
            py::gil_scoped_release release;
            report = run(cfg);
          }
          return report.to_json().dump();
        },
        py::arg("config"), py::arg("value_fn") = py::none());
}
