#include "spex/extract.hpp"

#include <cmath>
#include <unordered_map>

#include "spex/errors.hpp"

namespace spex {

namespace {

using Accumulator = std::unordered_map<Mask, double, MaskHash>;

Accumulator extract_node(const RegressionTree& tree, std::uint32_t index, std::size_t n) {
  const auto& node = tree.nodes()[index];
  if (node.is_leaf()) {
    Accumulator leaf;
    leaf.emplace(Mask(n), node.value);
    return leaf;
  }
  const auto feature = static_cast<std::size_t>(node.feature);
  const Accumulator clear = extract_node(tree, node.left, n);
  const Accumulator set = extract_node(tree, node.right, n);

  Accumulator out;
  out.reserve(2 * (clear.size() + set.size()));
  auto combine = [&](const Mask& key, double vl, double vr) {
    out[key] += (vl + vr) / 2;
    out[key.with(feature)] += (vl - vr) / 2;
  };
  for (const auto& [key, vl] : clear) {
    auto it = set.find(key);
    combine(key, vl, it == set.end() ? 0.0 : it->second);
  }
  for (const auto& [key, vr] : set)
    if (!clear.contains(key)) combine(key, 0.0, vr);
  return out;
}

}  // namespace

FourierSpectrum extract_tree(const RegressionTree& tree, std::size_t n) {
  tree.validate(n);
  return FourierSpectrum(n, extract_node(tree, 0, n));
}

FourierSpectrum extract_model(const GbtModel& model) {
  const std::size_t n = model.n();
  Accumulator acc;
  acc[Mask(n)] += model.base_score();
  for (const auto& tree : model.trees()) {
    const auto depth = tree.depth();
    if (depth > kMaxExtractDepth)
      throw CapacityError("tree depth " + std::to_string(depth) + " exceeds the extraction cap of " +
                          std::to_string(kMaxExtractDepth));
    tree.validate(n);
    for (const auto& [key, v] : extract_node(tree, 0, n)) acc[key] += model.learning_rate() * v;
  }
  return FourierSpectrum(n, acc, 1e-15);
}

}  // namespace spex
