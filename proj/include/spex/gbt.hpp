#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spex/mask.hpp"
#include "spex/setfn.hpp"

namespace spex {

/// Binary regression tree over feature bits. Node 0 is the root; an internal
/// node sends masks with the split bit clear to `left` and set to `right`.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  static RegressionTree leaf(double value) { return RegressionTree({Node{-1, 0, 0, value}}); }
  /// Single split on `feature`: `clear_value` for masks without it, `set_value` with it.
  static RegressionTree stump(std::size_t feature, double clear_value, double set_value);

  std::span<const Node> nodes() const noexcept { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  bool empty() const noexcept { return nodes_.empty(); }

  double predict(const Mask& mask) const;
  /// Number of edges on the longest root-to-leaf path.
  std::size_t depth() const;
  /// Throws InvalidArgument if a path tests a feature twice or an index dangles.
  void validate(std::size_t n) const;

 private:
  std::vector<Node> nodes_;
};

struct FitConfig {
  std::optional<std::size_t> max_depth = 3;  // nullopt: unbounded
  std::size_t num_trees = 100;
  double learning_rate = 0.1;
  std::size_t min_leaf = 1;
  std::size_t folds = 5;

  void validate() const;
  std::string describe() const;
};

/// base_score + learning_rate * Σ_t tree_t(S).
class GbtModel {
 public:
  GbtModel() = default;
  GbtModel(std::size_t n, double base_score, double learning_rate,
           std::vector<RegressionTree> trees = {});

  std::size_t n() const noexcept { return n_; }
  double base_score() const noexcept { return base_score_; }
  double learning_rate() const noexcept { return learning_rate_; }
  std::span<const RegressionTree> trees() const noexcept { return trees_; }
  std::size_t max_depth() const;

  void add_tree(RegressionTree tree) { trees_.push_back(std::move(tree)); }
  /// Keeps only the first `count` trees.
  void truncate(std::size_t count);

  double predict(const Mask& mask) const;
  std::vector<double> predict(std::span<const Mask> masks) const;

 private:
  std::size_t n_ = 0;
  double base_score_ = 0.0;
  double learning_rate_ = 1.0;
  std::vector<RegressionTree> trees_;
};

/// Squared-loss gradient boosting with exhaustive, deterministic split search.
GbtModel fit_gbt(const MaskDataset& data, const FitConfig& cfg);

/// Same as fit_gbt but reports training MSE after every boosting round
/// (index 0 is the base score alone).
GbtModel fit_gbt(const MaskDataset& data, const FitConfig& cfg, std::vector<double>* train_mse);

struct CvResult {
  FitConfig best;
  std::size_t best_index = 0;
  std::vector<double> cv_mse;  // one per grid entry
  GbtModel model;              // refit on all data with `best`
};

/// Grid search by mean held-out MSE over `folds` contiguous folds of a seeded
/// shuffle. Ties go to the earlier grid entry. The fold count comes from the
/// first config.
CvResult cross_validate(const MaskDataset& data, std::span<const FitConfig> grid,
                        std::uint64_t seed = 0);

/// Depth {3,5} x trees {100,300} x lr {0.1}.
std::vector<FitConfig> desk_grid();
/// Depth {3,5,unbounded} x trees {500,1000,5000} x lr {0.01,0.1}.
std::vector<FitConfig> full_grid();

double predict(const GbtModel& model, const Mask& mask);

}  // namespace spex
