#include "spex/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "spex/errors.hpp"
#include "spex/parallel.hpp"
#include "spex/spectrum.hpp"

namespace spex {

RegressionTree RegressionTree::stump(std::size_t feature, double clear_value, double set_value) {
  return RegressionTree({Node{static_cast<int>(feature), 1, 2, 0.0}, Node{-1, 0, 0, clear_value},
                         Node{-1, 0, 0, set_value}});
}

double RegressionTree::predict(const Mask& mask) const {
  std::uint32_t i = 0;
  while (!nodes_[i].is_leaf())
    i = mask.test(static_cast<std::size_t>(nodes_[i].feature)) ? nodes_[i].right : nodes_[i].left;
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    const auto& node = nodes_[i];
    if (node.is_leaf()) {
      best = std::max(best, d);
    } else {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return best;
}

void RegressionTree::validate(std::size_t n) const {
  if (nodes_.empty()) throw InvalidArgument("tree has no nodes");
  struct Frame {
    std::uint32_t node;
    std::vector<int> path;
  };
  std::vector<Frame> stack{{0, {}}};
  std::size_t visited = 0;
  while (!stack.empty()) {
    auto frame = std::move(stack.back());
    stack.pop_back();
    if (frame.node >= nodes_.size()) throw InvalidArgument("tree child index out of range");
    if (++visited > nodes_.size()) throw InvalidArgument("tree nodes form a cycle");
    const auto& node = nodes_[frame.node];
    if (node.is_leaf()) continue;
    if (static_cast<std::size_t>(node.feature) >= n)
      throw InvalidArgument("tree splits on feature " + std::to_string(node.feature) +
                            " outside n=" + std::to_string(n));
    if (std::find(frame.path.begin(), frame.path.end(), node.feature) != frame.path.end())
      throw InvalidArgument("feature " + std::to_string(node.feature) +
                            " is tested twice on one root-to-leaf path");
    frame.path.push_back(node.feature);
    stack.push_back({node.left, frame.path});
    stack.push_back({node.right, std::move(frame.path)});
  }
}

void FitConfig::validate() const {
  if (num_trees < 1) throw InvalidArgument("num_trees must be >= 1");
  if (folds < 2) throw InvalidArgument("folds must be >= 2");
  if (!(learning_rate > 0.0) || learning_rate > 1.0)
    throw InvalidArgument("learning_rate must lie in (0, 1]");
  if (min_leaf < 1) throw InvalidArgument("min_leaf must be >= 1");
  if (max_depth && *max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
}

std::string FitConfig::describe() const {
  std::ostringstream os;
  os << "depth=" << (max_depth ? std::to_string(*max_depth) : "none") << " trees=" << num_trees
     << " lr=" << learning_rate << " min_leaf=" << min_leaf;
  return os.str();
}

GbtModel::GbtModel(std::size_t n, double base_score, double learning_rate,
                   std::vector<RegressionTree> trees)
    : n_(n), base_score_(base_score), learning_rate_(learning_rate), trees_(std::move(trees)) {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
}

std::size_t GbtModel::max_depth() const {
  std::size_t d = 0;
  for (const auto& t : trees_) d = std::max(d, t.depth());
  return d;
}

void GbtModel::truncate(std::size_t count) {
  if (count < trees_.size()) trees_.resize(count);
}

double GbtModel::predict(const Mask& mask) const {
  if (mask.width() != n_)
    throw InvalidArgument("mask width " + std::to_string(mask.width()) +
                          " does not match model n=" + std::to_string(n_));
  double acc = 0.0;
  for (const auto& t : trees_) acc += t.predict(mask);
  return base_score_ + learning_rate_ * acc;
}

std::vector<double> GbtModel::predict(std::span<const Mask> masks) const {
  std::vector<double> out;
  out.reserve(masks.size());
  for (const auto& m : masks) out.push_back(predict(m));
  return out;
}

double predict(const GbtModel& model, const Mask& mask) { return model.predict(mask); }

namespace {

// Mean with one correction pass; exact for constant inputs.
double accurate_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  double m = s / static_cast<double>(xs.size());
  double c = 0.0;
  for (double x : xs) c += x - m;
  return m + c / static_cast<double>(xs.size());
}

// Per-node split statistics: residual sums and counts of the rows having
// each feature set, plus totals over the node.
struct NodeStats {
  std::vector<double> sum1;
  std::vector<std::uint32_t> cnt1;
  double total = 0.0;
  double sumsq = 0.0;
  std::size_t rows = 0;
};

// Incremental booster over a fixed set of training rows.
class Booster {
 public:
  Booster(const MaskDataset& data, std::span<const std::size_t> rows, const FitConfig& cfg)
      : cfg_(cfg), n_(data.n()) {
    std::vector<double> y;
    y.reserve(rows.size());
    offsets_.reserve(rows.size() + 1);
    offsets_.push_back(0);
    for (auto r : rows) {
      const auto& s = data[r];
      s.mask.for_each([&](std::size_t i) { on_.push_back(static_cast<std::uint32_t>(i)); });
      offsets_.push_back(static_cast<std::uint32_t>(on_.size()));
      masks_.push_back(&s.mask);
      y.push_back(s.value);
    }
    base_ = accurate_mean(y);
    residual_.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) residual_[i] = y[i] - base_;
    used_.assign(n_, 0);
  }

  double base() const { return base_; }

  double train_mse() const {
    double sse = 0.0;
    for (double r : residual_) sse += r * r;
    return residual_.empty() ? 0.0 : sse / static_cast<double>(residual_.size());
  }

  RegressionTree step() {
    nodes_.clear();
    leaf_of_.assign(residual_.size(), 0.0);
    std::vector<std::size_t> all(residual_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    grow(all, 0, nullptr);
    const double lr = cfg_.learning_rate;
    for (std::size_t i = 0; i < residual_.size(); ++i) residual_[i] -= lr * leaf_of_[i];
    return RegressionTree(std::move(nodes_));
  }

 private:
  bool may_split(std::size_t rows, std::size_t depth) const {
    const bool depth_ok = !cfg_.max_depth || depth < *cfg_.max_depth;
    return depth_ok && rows >= 2 * cfg_.min_leaf;
  }

  NodeStats collect(std::span<const std::size_t> members) const {
    NodeStats st;
    st.sum1.assign(n_, 0.0);
    st.cnt1.assign(n_, 0);
    st.rows = members.size();
    for (auto m : members) {
      const double r = residual_[m];
      st.total += r;
      st.sumsq += r * r;
      for (auto k = offsets_[m]; k < offsets_[m + 1]; ++k) {
        st.sum1[on_[k]] += r;
        ++st.cnt1[on_[k]];
      }
    }
    return st;
  }

  static NodeStats difference(const NodeStats& parent, const NodeStats& child) {
    NodeStats st;
    st.sum1.resize(parent.sum1.size());
    st.cnt1.resize(parent.cnt1.size());
    for (std::size_t f = 0; f < st.sum1.size(); ++f) {
      st.sum1[f] = parent.sum1[f] - child.sum1[f];
      st.cnt1[f] = parent.cnt1[f] - child.cnt1[f];
    }
    st.total = parent.total - child.total;
    st.sumsq = std::max(0.0, parent.sumsq - child.sumsq);
    st.rows = parent.rows - child.rows;
    return st;
  }

  // `given` carries precomputed statistics for this node, or null.
  std::uint32_t grow(std::span<const std::size_t> members, std::size_t depth, NodeStats* given) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});

    int feature = -1;
    NodeStats own;
    NodeStats* st = given;
    if (may_split(members.size(), depth)) {
      if (!st) {
        own = collect(members);
        st = &own;
      }
      feature = best_split(*st);
    }
    if (feature < 0) {
      std::vector<double> r;
      r.reserve(members.size());
      for (auto m : members) r.push_back(residual_[m]);
      const double leaf_value = accurate_mean(r);
      nodes_[id].value = leaf_value;
      for (auto m : members) leaf_of_[m] = leaf_value;
      return id;
    }

    std::vector<std::size_t> clear;
    std::vector<std::size_t> set;
    for (auto m : members)
      (masks_[m]->test(static_cast<std::size_t>(feature)) ? set : clear).push_back(m);

    // Scan the smaller child; the larger one's statistics follow by subtraction.
    NodeStats clear_stats, set_stats;
    NodeStats* clear_ptr = nullptr;
    NodeStats* set_ptr = nullptr;
    const bool split_clear = may_split(clear.size(), depth + 1);
    const bool split_set = may_split(set.size(), depth + 1);
    if (split_clear || split_set) {
      if (set.size() <= clear.size()) {
        set_stats = collect(set);
        clear_stats = difference(*st, set_stats);
      } else {
        clear_stats = collect(clear);
        set_stats = difference(*st, clear_stats);
      }
      clear_ptr = &clear_stats;
      set_ptr = &set_stats;
    }
    own = NodeStats{};

    used_[static_cast<std::size_t>(feature)] = 1;
    const auto left = grow(clear, depth + 1, clear_ptr);
    const auto right = grow(set, depth + 1, set_ptr);
    used_[static_cast<std::size_t>(feature)] = 0;
    nodes_[id].feature = feature;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  // Feature with maximal variance reduction, lowest index on ties; -1 when no
  // split has positive gain or every candidate violates min_leaf.
  int best_split(const NodeStats& st) const {
    const double count = static_cast<double>(st.rows);
    const double parent = st.total * st.total / count;
    // Gains at rounding level of the node's energy are treated as zero.
    const double tol = 1e-12 * st.sumsq;
    double best_gain = 0.0;
    int best = -1;
    for (std::size_t f = 0; f < n_; ++f) {
      if (used_[f]) continue;
      const std::size_t n1 = st.cnt1[f];
      const std::size_t n0 = st.rows - n1;
      if (n1 < cfg_.min_leaf || n0 < cfg_.min_leaf) continue;
      const double s1 = st.sum1[f];
      const double s0 = st.total - s1;
      const double gain = s1 * s1 / static_cast<double>(n1) + s0 * s0 / static_cast<double>(n0) - parent;
      if (gain > best_gain && gain > tol) {
        best_gain = gain;
        best = static_cast<int>(f);
      }
    }
    return best;
  }

  FitConfig cfg_;
  std::size_t n_;
  std::vector<std::uint32_t> on_;       // set features of every row, concatenated
  std::vector<std::uint32_t> offsets_;  // row m owns on_[offsets_[m], offsets_[m+1])
  std::vector<const Mask*> masks_;
  double base_ = 0.0;
  std::vector<double> residual_;
  std::vector<double> leaf_of_;
  std::vector<RegressionTree::Node> nodes_;
  std::vector<char> used_;
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

}  // namespace

GbtModel fit_gbt(const MaskDataset& data, const FitConfig& cfg, std::vector<double>* train_mse) {
  if (data.empty()) throw InvalidArgument("fit_gbt: empty dataset");
  cfg.validate();
  const auto rows = all_rows(data.size());
  Booster booster(data, rows, cfg);
  GbtModel model(data.n(), booster.base(), cfg.learning_rate);
  if (train_mse) train_mse->assign(1, booster.train_mse());
  for (std::size_t t = 0; t < cfg.num_trees; ++t) {
    model.add_tree(booster.step());
    if (train_mse) train_mse->push_back(booster.train_mse());
  }
  return model;
}

GbtModel fit_gbt(const MaskDataset& data, const FitConfig& cfg) { return fit_gbt(data, cfg, nullptr); }

CvResult cross_validate(const MaskDataset& data, std::span<const FitConfig> grid,
                        std::uint64_t seed) {
  if (grid.empty()) throw InvalidArgument("cross_validate: empty grid");
  if (data.empty()) throw InvalidArgument("cross_validate: empty dataset");
  for (const auto& c : grid) c.validate();
  const std::size_t folds = grid.front().folds;
  const auto split = make_folds(data.size(), folds, seed);

  // Configs that differ only in num_trees share one boosting run; the
  // ensemble after t rounds is identical whatever the final count.
  using Key = std::tuple<std::size_t, double, std::size_t>;
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& c = grid[g];
    const std::size_t depth = c.max_depth ? *c.max_depth : std::numeric_limits<std::size_t>::max();
    groups[{depth, c.learning_rate, c.min_leaf}].push_back(g);
  }
  std::vector<std::vector<std::size_t>> group_list;
  for (auto& [k, members] : groups) group_list.push_back(members);

  // fold_mse[g][f]
  std::vector<std::vector<double>> fold_mse(grid.size(), std::vector<double>(folds, 0.0));
  parallel_for(group_list.size() * folds, [&](std::size_t job) {
    const auto& members = group_list[job / folds];
    const std::size_t f = job % folds;
    std::size_t rounds = 0;
    for (auto g : members) rounds = std::max(rounds, grid[g].num_trees);
    FitConfig cfg = grid[members.front()];
    cfg.num_trees = rounds;

    std::vector<std::size_t> train;
    for (std::size_t h = 0; h < folds; ++h)
      if (h != f) train.insert(train.end(), split[h].begin(), split[h].end());
    const auto& held = split[f];

    Booster booster(data, train, cfg);
    std::vector<double> pred(held.size(), booster.base());
    auto held_mse = [&] {
      double sse = 0.0;
      for (std::size_t i = 0; i < held.size(); ++i) {
        const double e = pred[i] - data[held[i]].value;
        sse += e * e;
      }
      return sse / static_cast<double>(held.size());
    };
    for (std::size_t t = 1; t <= rounds; ++t) {
      const auto tree = booster.step();
      for (std::size_t i = 0; i < held.size(); ++i)
        pred[i] += cfg.learning_rate * tree.predict(data[held[i]].mask);
      for (auto g : members)
        if (grid[g].num_trees == t) fold_mse[g][f] = held_mse();
    }
  });

  CvResult result;
  result.cv_mse.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double v : fold_mse[g]) s += v;
    result.cv_mse[g] = s / static_cast<double>(folds);
  }
  // Errors within 1e-9 of the target variance count as ties; the earlier
  // grid entry keeps them.
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) mean += data[i].value;
  mean /= static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) var += (data[i].value - mean) * (data[i].value - mean);
  const double tie = 1e-9 * var / static_cast<double>(data.size());
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (result.cv_mse[g] < result.cv_mse[result.best_index] - tie) result.best_index = g;
  result.best = grid[result.best_index];
  result.model = fit_gbt(data, result.best);
  return result;
}

std::vector<FitConfig> desk_grid() {
  std::vector<FitConfig> grid;
  for (std::size_t depth : {3, 5})
    for (std::size_t trees : {100, 300}) grid.push_back({depth, trees, 0.1, 1, 5});
  return grid;
}

std::vector<FitConfig> full_grid() {
  std::vector<FitConfig> grid;
  for (std::optional<std::size_t> depth : {std::optional<std::size_t>(3), std::optional<std::size_t>(5),
                                            std::optional<std::size_t>()})
    for (std::size_t trees : {500, 1000, 5000})
      for (double lr : {0.01, 0.1}) grid.push_back({depth, trees, lr, 1, 5});
  return grid;
}

}  // namespace spex
