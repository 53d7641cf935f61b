#include "treexplain/explain.hpp"

#include <cmath>
#include <string>

#include "treexplain/error.hpp"
#include "treexplain/kernels.hpp"

namespace treexplain {

std::string_view to_string(WeightMode mode) {
  return mode == WeightMode::Literal ? "literal" : "normalized";
}

WeightMode weight_mode_from_string(std::string_view name) {
  if (name == "literal") return WeightMode::Literal;
  if (name == "normalized") return WeightMode::Normalized;
  throw Error(ErrorKind::InvalidSpec, "unknown weight mode '" + std::string(name) + "'");
}

namespace {

struct PathSums {
  double root = 0.0;
  double leaf = 0.0;
};

// Adds scale * (child - parent)[output] to contrib[feature] for every step.
PathSums accumulate_path(const Tree& tree, std::span<const double> x, std::size_t output,
                         double scale, std::map<std::size_t, double>& contrib) {
  const DecisionPath path = tree.decision_path(x);
  for (const PathStep& step : path.steps) {
    contrib[step.feature] += scale * (step.child_value[output] - step.parent_value[output]);
  }
  return {path.root_value[output], path.leaf_value[output]};
}

}  // namespace

ContributionBreakdown contributions(const FittedModel& model, std::span<const double> x,
                                    std::size_t instance_id) {
  ContributionBreakdown out;
  out.instance_id = instance_id;
  out.target_class = predict_class(model, x);
  const std::size_t c = out.target_class;

  if (const auto* single = std::get_if<SingleTreeModel>(&model.body())) {
    const PathSums sums = accumulate_path(single->tree, x, c, 1.0, out.contrib);
    out.c_full = sums.root;
    out.f_x = sums.leaf;
  } else if (const auto* forest = std::get_if<ForestModel>(&model.body())) {
    for (const Tree& tree : forest->trees) {
      const PathSums sums = accumulate_path(tree, x, c, 1.0, out.contrib);
      out.c_full += sums.root;
      out.f_x += sums.leaf;
    }
    const auto n_trees = static_cast<double>(forest->trees.size());
    out.c_full /= n_trees;
    out.f_x /= n_trees;
    for (auto& [feature, value] : out.contrib) value /= n_trees;
  } else {
    const auto& boosted = std::get<BoostedModel>(model.body());
    const double lr = boosted.learning_rate;
    double roots = 0.0;
    double leaves = 0.0;
    for (const auto& stage : boosted.stages) {
      const PathSums sums = accumulate_path(stage[c], x, 0, lr, out.contrib);
      roots += sums.root;
      leaves += sums.leaf;
    }
    out.c_full = boosted.base_scores[c] + lr * roots;
    out.f_x = boosted.base_scores[c] + lr * leaves;
  }
  return out;
}

ContributionBreakdown contributions(const FittedModel& model, const Dataset& ds,
                                    std::size_t instance) {
  if (instance >= ds.n_rows()) {
    throw Error(ErrorKind::DimensionMismatch, "instance " + std::to_string(instance) +
                                                  " out of range");
  }
  return contributions(model, ds.row(instance), instance);
}

WeightVector feature_weights(const ContributionBreakdown& b,
                             std::span<const std::size_t> used_features, WeightMode mode) {
  if (used_features.empty()) {
    throw Error(ErrorKind::NoFeaturesUsed, "model has no splits to attribute");
  }
  WeightVector out;
  out.mode = mode;
  double specific_sum = 0.0;
  for (std::size_t k : used_features) {
    const auto it = b.contrib.find(k);
    const double specific = b.c_full + (it == b.contrib.end() ? 0.0 : it->second);
    out.weights[k] = specific;
    specific_sum += specific;
  }

  const double denominator = mode == WeightMode::Literal ? b.f_x : specific_sum;
  if (!(std::abs(denominator) >= kDenominatorEpsilon)) {
    throw Error(ErrorKind::NearZeroDenominator,
                "instance " + std::to_string(b.instance_id) + ": weight denominator " +
                    std::to_string(denominator) + " is near zero");
  }
  double total = 0.0;
  for (auto& [k, w] : out.weights) {
    w /= denominator;
    total += w;
  }
  out.mean_weight = total / static_cast<double>(out.weights.size());
  return out;
}

double explain_cv_instance(const WeightVector& w, std::size_t K) {
  if (K < 1 || w.weights.size() != K) {
    throw Error(ErrorKind::DimensionMismatch, "weight vector must cover exactly K >= 1 features");
  }
  std::vector<double> values;
  values.reserve(K);
  for (const auto& [k, weight] : w.weights) values.push_back(weight);
  const double k = static_cast<double>(K);
  if (w.mode == WeightMode::Literal) {
    return kernels::sum_squared_deviation(values, 1.0 / k);
  }
  return kernels::sum_squared_deviation(values, w.mean_weight) / (k * w.mean_weight);
}

ExplainScore explain_cv_model(const FittedModel& model, const Dataset& ds,
                              std::span<const std::size_t> indices, WeightMode mode) {
  if (indices.empty()) throw Error(ErrorKind::EmptyIndexSet, "explain_cv_model: no instances");
  const std::vector<std::size_t> used = model.used_features();
  if (used.empty()) throw Error(ErrorKind::NoFeaturesUsed, "model has no splits to attribute");

  ExplainScore out;
  out.K = used.size();
  out.mode = mode;
  out.per_instance.reserve(indices.size());
  double total = 0.0;
  for (std::size_t idx : indices) {
    const ContributionBreakdown b = contributions(model, ds, idx);
    try {
      const double value = explain_cv_instance(feature_weights(b, used, mode), out.K);
      out.per_instance.emplace_back(idx, value);
      total += value;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NearZeroDenominator) throw;
      ++out.skipped;
    }
  }
  if (2 * out.skipped > indices.size()) {
    throw Error(ErrorKind::AllInstancesSkipped,
                std::to_string(out.skipped) + " of " + std::to_string(indices.size()) +
                    " instances have a near-zero weight denominator");
  }
  out.aggregate = total / static_cast<double>(out.per_instance.size());
  return out;
}

}  // namespace treexplain
