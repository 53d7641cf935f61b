#include "treexplain/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "treexplain/error.hpp"
#include "treexplain/kernels.hpp"
#include "treexplain/rng.hpp"

namespace treexplain {

std::string_view to_string(Criterion criterion) {
  return criterion == Criterion::Gini ? "gini" : "entropy";
}

Criterion criterion_from_string(std::string_view name) {
  if (name == "gini") return Criterion::Gini;
  if (name == "entropy") return Criterion::Entropy;
  throw Error(ErrorKind::InvalidSpec, "unknown criterion '" + std::string(name) + "'");
}

std::size_t MaxFeatures::resolve(std::size_t n_features) const {
  switch (kind) {
    case Kind::All:
      return n_features;
    case Kind::Sqrt:
      return std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features)))));
    case Kind::Count:
      if (count < 1 || count > n_features) {
        throw Error(ErrorKind::InvalidSpec,
                    "max_features = " + std::to_string(count) + " outside [1, " +
                        std::to_string(n_features) + "]");
      }
      return count;
  }
  return n_features;
}

// ---------------------------------------------------------------------------
// Tree

Tree::Tree(std::vector<TreeNode> nodes, std::size_t n_features, std::size_t n_outputs)
    : nodes_(std::move(nodes)), n_features_(n_features), n_outputs_(n_outputs) {
  if (nodes_.empty()) throw Error(ErrorKind::Parse, "tree has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& node = nodes_[i];
    if (node.value.size() != n_outputs_) {
      throw Error(ErrorKind::Parse, "node value has the wrong length");
    }
    if (node.is_leaf()) continue;
    const auto in_range = [&](int child) {
      return child > static_cast<int>(i) && child < static_cast<int>(nodes_.size());
    };
    if (static_cast<std::size_t>(node.feature) >= n_features_ || !in_range(node.left) ||
        !in_range(node.right)) {
      throw Error(ErrorKind::Parse, "malformed internal node");
    }
  }
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> depth_of(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth_of[i]);
    if (nodes_[i].is_leaf()) continue;
    depth_of[static_cast<std::size_t>(nodes_[i].left)] = depth_of[i] + 1;
    depth_of[static_cast<std::size_t>(nodes_[i].right)] = depth_of[i] + 1;
  }
  return deepest;
}

void Tree::check_input(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw Error(ErrorKind::DimensionMismatch,
                "expected " + std::to_string(n_features_) + " features, got " +
                    std::to_string(x.size()));
  }
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
  check_input(x);
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const TreeNode& node = nodes_[id];
    id = static_cast<std::size_t>(
        x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return id;
}

std::span<const double> Tree::predict_value(std::span<const double> x) const {
  return nodes_[leaf_index(x)].value;
}

DecisionPath Tree::decision_path(std::span<const double> x) const {
  check_input(x);
  DecisionPath path;
  path.root_value = nodes_.front().value;
  std::size_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const TreeNode& node = nodes_[id];
    const auto feature = static_cast<std::size_t>(node.feature);
    const auto next =
        static_cast<std::size_t>(x[feature] <= node.threshold ? node.left : node.right);
    path.steps.push_back({feature, node.value, nodes_[next].value});
    id = next;
  }
  path.leaf_value = nodes_[id].value;
  return path;
}

std::vector<std::size_t> Tree::used_features() const {
  std::vector<std::size_t> out;
  for (const TreeNode& node : nodes_) {
    if (!node.is_leaf()) out.push_back(static_cast<std::size_t>(node.feature));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void Tree::set_leaf_values(std::span<const double> leaf_values) {
  if (n_outputs_ != 1 || leaf_values.size() != nodes_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "set_leaf_values needs one value per node");
  }
  // Children always follow their parent, so a reverse sweep sees children first.
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    TreeNode& node = nodes_[i];
    if (node.is_leaf()) {
      node.value[0] = leaf_values[i];
      continue;
    }
    const TreeNode& left = nodes_[static_cast<std::size_t>(node.left)];
    const TreeNode& right = nodes_[static_cast<std::size_t>(node.right)];
    node.value[0] =
        (left.weight * left.value[0] + right.weight * right.value[0]) / node.weight;
  }
}

// ---------------------------------------------------------------------------
// CART builder

namespace {

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t n_left = 0;
};

class CartBuilder {
 public:
  CartBuilder(const Dataset& ds, std::span<const std::size_t> indices, const CartConfig& cfg,
              std::span<const double> sample_weights, std::span<const double> targets)
      : ds_(ds),
        cfg_(cfg),
        regression_(!targets.empty()),
        n_outputs_(regression_ ? 1 : ds.n_classes()),
        n_features_(ds.n_features()),
        n_candidates_(cfg.max_features.resolve(ds.n_features())),
        rng_(derive_seed(cfg.feature_subsample_seed, Stream::Features)) {
    const std::size_t m = indices.size();
    rows_.assign(indices.begin(), indices.end());
    weights_.resize(m, 1.0);
    if (!sample_weights.empty()) {
      if (sample_weights.size() != ds.n_rows()) {
        throw Error(ErrorKind::DimensionMismatch, "sample_weights must have one entry per row");
      }
      for (std::size_t s = 0; s < m; ++s) weights_[s] = sample_weights[rows_[s]];
    }
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw Error(ErrorKind::InvalidSpec, "sample weights must be finite and >= 0");
      }
    }
    if (regression_) {
      if (targets.size() != ds.n_rows()) {
        throw Error(ErrorKind::DimensionMismatch, "targets must have one entry per row");
      }
      targets_.resize(m);
      for (std::size_t s = 0; s < m; ++s) targets_[s] = targets[rows_[s]];
    } else {
      classes_.resize(m);
      for (std::size_t s = 0; s < m; ++s) {
        classes_[s] = static_cast<std::size_t>(ds.label(rows_[s]));
      }
    }

    sorted_.resize(n_features_);
    for (std::size_t f = 0; f < n_features_; ++f) {
      auto& order = sorted_[f];
      order.resize(m);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds_.at(rows_[a], f) < ds_.at(rows_[b], f);
      });
    }
    goes_left_.resize(m);
    scratch_.resize(m);
  }

  Tree build() {
    grow(0, rows_.size(), 0);
    return Tree(std::move(nodes_), n_features_, n_outputs_);
  }

 private:
  double x(std::size_t slot, std::size_t feature) const {
    return ds_.at(rows_[slot], feature);
  }

  // Fills value/weight of a fresh node and reports whether it is pure.
  bool summarize(std::size_t begin, std::size_t end, TreeNode& node) const {
    const auto& slots = sorted_[0];
    node.value.assign(n_outputs_, 0.0);
    double total = 0.0;
    bool pure = true;
    if (regression_) {
      double sum = 0.0;
      const double first = targets_[slots[begin]];
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t s = slots[i];
        total += weights_[s];
        sum += weights_[s] * targets_[s];
        pure = pure && targets_[s] == first;
      }
      node.value[0] = sum / total;
    } else {
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t s = slots[i];
        total += weights_[s];
        node.value[classes_[s]] += weights_[s];
      }
      std::size_t present = 0;
      for (double& v : node.value) {
        present += v > 0.0 ? 1 : 0;
        v /= total;
      }
      pure = present <= 1;
    }
    node.weight = total;
    return pure;
  }

  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const bool pure = summarize(begin, end, nodes_.back());
    const std::size_t m = end - begin;

    const bool depth_ok = !cfg_.max_depth || depth < *cfg_.max_depth;
    if (pure || !depth_ok || m < 2 * cfg_.min_samples_leaf || nodes_.back().weight <= 0.0) {
      return id;
    }
    const auto split = best_split(begin, end);
    if (!split) return id;

    partition(begin, end, *split);
    const int left = grow(begin, begin + split->n_left, depth + 1);
    const int right = grow(begin + split->n_left, end, depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(split->feature);
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> features(n_features_);
    std::iota(features.begin(), features.end(), std::size_t{0});
    if (n_candidates_ < n_features_) {
      for (std::size_t i = 0; i < n_candidates_; ++i) {
        const std::size_t j = i + uniform_below(rng_, n_features_ - i);
        std::swap(features[i], features[j]);
      }
      features.resize(n_candidates_);
      std::sort(features.begin(), features.end());
    }
    return features;
  }

  // Node totals shared by all candidate features.
  struct Totals {
    std::vector<double> class_weight;
    double weight = 0.0;
    double sum = 0.0;
    double parent_score = 0.0;
  };

  Totals totals(std::size_t begin, std::size_t end) const {
    Totals t;
    const auto& slots = sorted_[0];
    t.class_weight.assign(regression_ ? 0 : n_outputs_, 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t s = slots[i];
      t.weight += weights_[s];
      if (regression_) {
        t.sum += weights_[s] * targets_[s];
      } else {
        t.class_weight[classes_[s]] += weights_[s];
      }
    }
    if (regression_) {
      t.parent_score = t.sum * t.sum / t.weight;
    } else if (cfg_.criterion == Criterion::Gini) {
      for (double c : t.class_weight) t.parent_score += c * c;
      t.parent_score /= t.weight;
    } else {
      t.parent_score = neg_entropy_mass(t.class_weight, t.weight);
    }
    return t;
  }

  // sum_c c * log(c / w): minus the weight-scaled entropy.
  static double neg_entropy_mass(std::span<const double> counts, double w) {
    double out = 0.0;
    for (double c : counts) {
      if (c > 0.0) out += c * std::log(c / w);
    }
    return out;
  }

  // Scores for splitting after each of the first `positions` entries of the
  // feature-sorted segment, written to score_. Larger is better.
  void score_positions(const std::vector<std::size_t>& order, std::size_t begin,
                       std::size_t positions, const Totals& t) {
    score_.resize(positions);
    left_weight_.resize(positions);
    if (regression_) {
      left_sum_.resize(positions);
      double wl = 0.0;
      double sl = 0.0;
      for (std::size_t p = 0; p < positions; ++p) {
        const std::size_t s = order[begin + p];
        wl += weights_[s];
        sl += weights_[s] * targets_[s];
        left_weight_[p] = wl;
        left_sum_[p] = sl;
      }
      kernels::variance_scores(left_sum_, left_weight_, t.sum, t.weight, score_);
      return;
    }

    const std::size_t n_classes = n_outputs_;
    left_counts_.resize(n_classes * positions);
    cumulative_.assign(n_classes, 0.0);
    double wl = 0.0;
    for (std::size_t p = 0; p < positions; ++p) {
      const std::size_t s = order[begin + p];
      wl += weights_[s];
      cumulative_[classes_[s]] += weights_[s];
      left_weight_[p] = wl;
      for (std::size_t c = 0; c < n_classes; ++c) {
        left_counts_[c * positions + p] = cumulative_[c];
      }
    }
    if (cfg_.criterion == Criterion::Gini) {
      kernels::gini_scores(left_counts_, n_classes, left_weight_, t.class_weight, t.weight,
                           score_);
      return;
    }
    std::vector<double> left(n_classes);
    std::vector<double> right(n_classes);
    for (std::size_t p = 0; p < positions; ++p) {
      for (std::size_t c = 0; c < n_classes; ++c) {
        left[c] = left_counts_[c * positions + p];
        right[c] = t.class_weight[c] - left[c];
      }
      score_[p] = neg_entropy_mass(left, left_weight_[p]) +
                  neg_entropy_mass(right, t.weight - left_weight_[p]);
    }
  }

  std::optional<SplitCandidate> best_split(std::size_t begin, std::size_t end) {
    const Totals t = totals(begin, end);
    const std::size_t m = end - begin;
    const std::size_t min_leaf = cfg_.min_samples_leaf;
    const double tolerance = 1e-12 * (std::abs(t.parent_score) + t.weight);

    std::optional<SplitCandidate> best;
    for (std::size_t f : candidate_features()) {
      const auto& order = sorted_[f];
      const double lo = x(order[begin], f);
      const double hi = x(order[end - 1], f);

      if (cfg_.random_thresholds) {
        const double u = uniform_unit(rng_);
        if (lo == hi) continue;
        double threshold = lo + u * (hi - lo);
        if (threshold >= hi) threshold = lo;
        std::size_t n_left = 0;
        while (x(order[begin + n_left], f) <= threshold) ++n_left;
        if (n_left < min_leaf || m - n_left < min_leaf) continue;
        score_positions(order, begin, n_left, t);
        const double gain = score_[n_left - 1] - t.parent_score;
        if (gain > tolerance && (!best || gain > best->gain)) {
          best = SplitCandidate{f, threshold, gain, n_left};
        }
        continue;
      }

      if (lo == hi) continue;
      score_positions(order, begin, m - 1, t);
      for (std::size_t p = min_leaf - 1; p + min_leaf < m; ++p) {
        const double here = x(order[begin + p], f);
        const double next = x(order[begin + p + 1], f);
        if (!(here < next)) continue;
        const double gain = score_[p] - t.parent_score;
        if (gain > tolerance && (!best || gain > best->gain)) {
          double threshold = here + (next - here) / 2.0;
          if (!(threshold < next)) threshold = here;
          best = SplitCandidate{f, threshold, gain, p + 1};
        }
      }
    }
    return best;
  }

  void partition(std::size_t begin, std::size_t end, const SplitCandidate& split) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t s = sorted_[0][i];
      goes_left_[s] = x(s, split.feature) <= split.threshold ? 1 : 0;
    }
    for (auto& order : sorted_) {
      std::size_t left = begin;
      std::size_t right = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t s = order[i];
        if (goes_left_[s]) {
          order[left++] = s;
        } else {
          scratch_[right++] = s;
        }
      }
      std::copy_n(scratch_.begin(), right, order.begin() + static_cast<std::ptrdiff_t>(left));
    }
  }

  const Dataset& ds_;
  const CartConfig& cfg_;
  const bool regression_;
  const std::size_t n_outputs_;
  const std::size_t n_features_;
  const std::size_t n_candidates_;
  Rng rng_;

  std::vector<std::size_t> rows_;  // slot -> dataset row
  std::vector<double> weights_;    // slot -> weight
  std::vector<std::size_t> classes_;
  std::vector<double> targets_;
  std::vector<std::vector<std::size_t>> sorted_;  // feature -> slots by value
  std::vector<char> goes_left_;
  std::vector<std::size_t> scratch_;

  std::vector<double> score_;
  std::vector<double> left_weight_;
  std::vector<double> left_sum_;
  std::vector<double> left_counts_;
  std::vector<double> cumulative_;

  std::vector<TreeNode> nodes_;
};

}  // namespace

Tree fit_cart(const Dataset& ds, std::span<const std::size_t> indices, const CartConfig& cfg,
              std::span<const double> sample_weights, std::span<const double> targets) {
  if (indices.empty()) throw Error(ErrorKind::EmptyIndexSet, "fit_cart: empty index set");
  if (cfg.min_samples_leaf < 1) {
    throw Error(ErrorKind::InvalidSpec, "min_samples_leaf must be >= 1");
  }
  if (cfg.max_depth && *cfg.max_depth < 1) {
    throw Error(ErrorKind::InvalidSpec, "max_depth must be >= 1");
  }
  for (std::size_t i : indices) {
    if (i >= ds.n_rows()) throw Error(ErrorKind::DimensionMismatch, "row index out of range");
  }
  return CartBuilder(ds, indices, cfg, sample_weights, targets).build();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json node_to_json(const Tree& tree, std::size_t id) {
  const TreeNode& node = tree.nodes()[id];
  nlohmann::json out;
  out["kind"] = node.is_leaf() ? "leaf" : "internal";
  out["value"] = node.value;
  out["weight"] = node.weight;
  if (!node.is_leaf()) {
    out["feature"] = node.feature;
    out["threshold"] = node.threshold;
    out["left"] = node_to_json(tree, static_cast<std::size_t>(node.left));
    out["right"] = node_to_json(tree, static_cast<std::size_t>(node.right));
  }
  return out;
}

int node_from_json(const nlohmann::json& doc, std::vector<TreeNode>& nodes) {
  const auto id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  {
    TreeNode& node = nodes.back();
    node.value = doc.at("value").get<std::vector<double>>();
    node.weight = doc.at("weight").get<double>();
  }
  const auto kind = doc.at("kind").get<std::string>();
  if (kind == "leaf") return id;
  if (kind != "internal") throw Error(ErrorKind::Parse, "unknown node kind '" + kind + "'");
  const int feature = doc.at("feature").get<int>();
  const double threshold = doc.at("threshold").get<double>();
  const int left = node_from_json(doc.at("left"), nodes);
  const int right = node_from_json(doc.at("right"), nodes);
  TreeNode& node = nodes[static_cast<std::size_t>(id)];
  node.feature = feature;
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return id;
}

}  // namespace

nlohmann::json tree_to_json(const Tree& tree) {
  return {
      {"n_features", tree.n_features()},
      {"n_outputs", tree.n_outputs()},
      {"root", node_to_json(tree, 0)},
  };
}

Tree tree_from_json(const nlohmann::json& doc) {
  try {
    std::vector<TreeNode> nodes;
    node_from_json(doc.at("root"), nodes);
    return Tree(std::move(nodes), doc.at("n_features").get<std::size_t>(),
                doc.at("n_outputs").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("tree JSON: ") + e.what());
  }
}

nlohmann::json cart_config_to_json(const CartConfig& cfg) {
  nlohmann::json out;
  out["max_depth"] = cfg.max_depth ? nlohmann::json(*cfg.max_depth) : nlohmann::json(nullptr);
  out["min_samples_leaf"] = cfg.min_samples_leaf;
  out["criterion"] = to_string(cfg.criterion);
  switch (cfg.max_features.kind) {
    case MaxFeatures::Kind::All: out["max_features"] = "all"; break;
    case MaxFeatures::Kind::Sqrt: out["max_features"] = "sqrt"; break;
    case MaxFeatures::Kind::Count: out["max_features"] = cfg.max_features.count; break;
  }
  out["feature_subsample_seed"] = cfg.feature_subsample_seed;
  out["random_thresholds"] = cfg.random_thresholds;
  return out;
}

CartConfig cart_config_from_json(const nlohmann::json& doc) {
  try {
    CartConfig cfg;
    if (doc.contains("max_depth") && !doc.at("max_depth").is_null()) {
      cfg.max_depth = doc.at("max_depth").get<std::size_t>();
    }
    cfg.min_samples_leaf = doc.value("min_samples_leaf", std::size_t{1});
    cfg.criterion = criterion_from_string(doc.value("criterion", std::string("gini")));
    if (doc.contains("max_features")) {
      const auto& mf = doc.at("max_features");
      if (mf.is_string()) {
        const auto name = mf.get<std::string>();
        if (name == "all") {
          cfg.max_features = MaxFeatures::all();
        } else if (name == "sqrt") {
          cfg.max_features = MaxFeatures::sqrt();
        } else {
          throw Error(ErrorKind::InvalidSpec, "unknown max_features '" + name + "'");
        }
      } else {
        cfg.max_features = MaxFeatures::of(mf.get<std::size_t>());
      }
    }
    cfg.feature_subsample_seed = doc.value("feature_subsample_seed", std::uint64_t{0});
    cfg.random_thresholds = doc.value("random_thresholds", false);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("cart config JSON: ") + e.what());
  }
}

}  // namespace treexplain
