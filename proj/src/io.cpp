#include "spex/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "spex/errors.hpp"

namespace spex::io {

json mask_to_json(const Mask& m) {
  json arr = json::array();
  m.for_each([&](std::size_t i) { arr.push_back(i); });
  return arr;
}

Mask mask_from_json(const json& j, std::size_t n) {
  if (!j.is_array()) throw InvalidArgument("mask must be a JSON array of indices");
  Mask m(n);
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw InvalidArgument("mask index must be a non-negative integer");
    const auto i = v.get<std::size_t>();
    if (i >= n) throw InvalidArgument("mask index " + std::to_string(i) + " out of range for n=" + std::to_string(n));
    if (m.test(i)) throw InvalidArgument("mask index " + std::to_string(i) + " repeated");
    m.set(i);
  }
  return m;
}

namespace {

json parse_line(const std::string& line, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw InvalidArgument("line " + std::to_string(lineno) + ": " + e.what());
  }
}

// Header object plus one JSON object per non-blank line.
struct JsonLines {
  json header;
  std::vector<json> rows;
};

JsonLines read_lines(std::istream& is) {
  JsonLines out;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = parse_line(line, lineno);
    if (!have_header) {
      out.header = std::move(j);
      have_header = true;
    } else {
      out.rows.push_back(std::move(j));
    }
  }
  if (!have_header || !out.header.contains("n"))
    throw InvalidArgument("missing {\"n\":N} header line");
  return out;
}

}  // namespace

void write_dataset(std::ostream& os, const MaskDataset& data) {
  os << json{{"n", data.n()}}.dump() << '\n';
  for (const auto& s : data.samples())
    os << json{{"mask", mask_to_json(s.mask)}, {"value", s.value}}.dump() << '\n';
}

MaskDataset read_dataset(std::istream& is) {
  const auto lines = read_lines(is);
  const auto n = lines.header.at("n").get<std::size_t>();
  MaskDataset data(n);
  for (const auto& row : lines.rows) {
    if (!row.contains("value")) throw InvalidArgument("dataset row without a value");
    data.push_back({mask_from_json(row.at("mask"), n), row.at("value").get<double>()});
  }
  return data;
}

void write_masks(std::ostream& os, std::size_t n, std::span<const Mask> masks) {
  os << json{{"n", n}}.dump() << '\n';
  for (const auto& m : masks) os << json{{"mask", mask_to_json(m)}}.dump() << '\n';
}

std::vector<Mask> read_masks(std::istream& is, std::size_t* n_out) {
  const auto lines = read_lines(is);
  const auto n = lines.header.at("n").get<std::size_t>();
  if (n_out) *n_out = n;
  std::vector<Mask> out;
  out.reserve(lines.rows.size());
  for (const auto& row : lines.rows) out.push_back(mask_from_json(row.at("mask"), n));
  return out;
}

template <Basis B>
void write_spectrum(std::ostream& os, const Spectrum<B>& spec) {
  os << json{{"n", spec.n()}, {"basis", B == Basis::fourier ? "fourier" : "mobius"}}.dump() << '\n';
  for (const auto& t : spec.by_magnitude())
    os << json{{"set", mask_to_json(t.set)}, {"coef", t.coef}}.dump() << '\n';
}

template void write_spectrum(std::ostream&, const FourierSpectrum&);
template void write_spectrum(std::ostream&, const MobiusSpectrum&);

namespace {

template <Basis B>
Spectrum<B> read_spectrum(std::istream& is) {
  const auto lines = read_lines(is);
  const auto n = lines.header.at("n").get<std::size_t>();
  const std::string expected = B == Basis::fourier ? "fourier" : "mobius";
  const auto basis = lines.header.value("basis", std::string("fourier"));
  if (basis != expected)
    throw InvalidArgument("spectrum file has basis '" + basis + "', expected '" + expected + "'");
  std::vector<Term> terms;
  terms.reserve(lines.rows.size());
  for (const auto& row : lines.rows)
    terms.push_back({mask_from_json(row.at("set"), n), row.at("coef").get<double>()});
  return Spectrum<B>(n, std::move(terms));
}

json node_to_json(const RegressionTree& tree, std::uint32_t i) {
  const auto& node = tree.nodes()[i];
  if (node.is_leaf()) return json{{"value", node.value}};
  return json{{"feat", node.feature},
              {"left", node_to_json(tree, node.left)},
              {"right", node_to_json(tree, node.right)}};
}

std::uint32_t node_from_json(const json& j, std::vector<RegressionTree::Node>& nodes) {
  const auto id = static_cast<std::uint32_t>(nodes.size());
  nodes.push_back({});
  if (j.contains("value")) {
    nodes[id].value = j.at("value").get<double>();
    return id;
  }
  const int feat = j.at("feat").get<int>();
  if (feat < 0) throw InvalidArgument("tree split feature must be non-negative");
  const auto left = node_from_json(j.at("left"), nodes);
  const auto right = node_from_json(j.at("right"), nodes);
  nodes[id].feature = feat;
  nodes[id].left = left;
  nodes[id].right = right;
  return id;
}

}  // namespace

FourierSpectrum read_fourier(std::istream& is) { return read_spectrum<Basis::fourier>(is); }
MobiusSpectrum read_mobius(std::istream& is) { return read_spectrum<Basis::mobius>(is); }

json model_to_json(const GbtModel& model) {
  json trees = json::array();
  for (const auto& t : model.trees()) trees.push_back(node_to_json(t, 0));
  return json{{"n", model.n()},
              {"base_score", model.base_score()},
              {"learning_rate", model.learning_rate()},
              {"trees", std::move(trees)}};
}

GbtModel model_from_json(const json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    GbtModel model(n, j.at("base_score").get<double>(), j.at("learning_rate").get<double>());
    for (const auto& t : j.at("trees")) {
      std::vector<RegressionTree::Node> nodes;
      node_from_json(t, nodes);
      RegressionTree tree(std::move(nodes));
      tree.validate(n);
      model.add_tree(std::move(tree));
    }
    return model;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed model file: ") + e.what());
  }
}

json index_report_to_json(const IndexReport& report) {
  json entries = json::array();
  for (const auto& t : report.values)
    entries.push_back(json{{"set", mask_to_json(t.set)}, {"value", t.coef}});
  json j{{"kind", std::string(to_string(report.kind))}, {"entries", std::move(entries)}};
  j["order"] = report.order ? json(*report.order) : json(nullptr);
  return j;
}

json solution_to_json(const IdentSolution& sol) {
  return json{{"mask", mask_to_json(sol.mask)},
              {"objective", sol.objective},
              {"optimality", to_string(sol.optimality)},
              {"nodes_explored", sol.nodes_explored},
              {"direction", to_string(sol.direction)}};
}

json metric_to_json(const MetricValue& v) {
  json j;
  j["value"] = v.value ? json(*v.value) : json(nullptr);
  j["defined"] = v.defined();
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

}  // namespace spex::io
