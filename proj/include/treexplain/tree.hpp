#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "treexplain/data.hpp"

namespace treexplain {

enum class Criterion { Gini, Entropy };

std::string_view to_string(Criterion criterion);
Criterion criterion_from_string(std::string_view name);

// Resolved at fit time: `sqrt` becomes max(1, floor(sqrt(d))).
struct MaxFeatures {
  enum class Kind { All, Sqrt, Count };
  Kind kind = Kind::All;
  std::size_t count = 0;

  static MaxFeatures all() { return {}; }
  static MaxFeatures sqrt() { return {Kind::Sqrt, 0}; }
  static MaxFeatures of(std::size_t n) { return {Kind::Count, n}; }

  std::size_t resolve(std::size_t n_features) const;
  friend bool operator==(const MaxFeatures&, const MaxFeatures&) = default;
};

struct CartConfig {
  std::optional<std::size_t> max_depth;  // nullopt = unlimited
  std::size_t min_samples_leaf = 1;
  Criterion criterion = Criterion::Gini;
  MaxFeatures max_features;
  std::uint64_t feature_subsample_seed = 0;
  bool random_thresholds = false;  // extra-trees mode

  friend bool operator==(const CartConfig&, const CartConfig&) = default;
};

// Flat node storage; children are indices into Tree::nodes(). A node is a leaf
// iff feature < 0. Every node keeps its value vector (class distribution for
// classification, a single mean for regression) and its training weight.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;
  std::vector<double> value;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Views into the owning Tree; valid while the tree lives.
struct PathStep {
  std::size_t feature;
  std::span<const double> parent_value;
  std::span<const double> child_value;
};

struct DecisionPath {
  std::vector<PathStep> steps;
  std::span<const double> root_value;
  std::span<const double> leaf_value;
};

class Tree {
 public:
  Tree() = default;
  Tree(std::vector<TreeNode> nodes, std::size_t n_features, std::size_t n_outputs);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_outputs() const noexcept { return n_outputs_; }
  std::size_t depth() const;

  // Index of the leaf reached by x. Routing: x[feature] <= threshold goes left.
  std::size_t leaf_index(std::span<const double> x) const;
  std::span<const double> predict_value(std::span<const double> x) const;
  DecisionPath decision_path(std::span<const double> x) const;

  // Sorted, distinct feature indices of internal nodes.
  std::vector<std::size_t> used_features() const;

  // Overwrites leaf values (indexed by node id; entries of internal nodes are
  // ignored) and recomputes each internal value as the weight-averaged mean of
  // its children. Single-output trees only.
  void set_leaf_values(std::span<const double> leaf_values);

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  void check_input(std::span<const double> x) const;

  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
  std::size_t n_outputs_ = 0;
};

// Greedy CART. Classification by default (value = weighted class
// distribution); with `targets` (indexed by row id) fits a variance-reducing
// regression tree instead. `sample_weights`, when given, is indexed by row id.
// `indices` may contain duplicates; each occurrence counts as a sample.
Tree fit_cart(const Dataset& ds, std::span<const std::size_t> indices, const CartConfig& cfg,
              std::span<const double> sample_weights = {},
              std::span<const double> targets = {});

nlohmann::json tree_to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& doc);

nlohmann::json cart_config_to_json(const CartConfig& cfg);
CartConfig cart_config_from_json(const nlohmann::json& doc);

}  // namespace treexplain
