#pragma once

// Decision-path attribution and the coefficient-of-variation feature
// explanation score.
//
// For an instance x the attribution scalar f(x) (predicted-class probability
// for trees and forests, predicted-class margin for boosting) decomposes as
//
//   f(x) = c_full + sum_k contrib(x, k)
//
// where c_full is the model's value before any split and contrib(x, k) sums
// the value changes along x's decision path(s) at nodes splitting on k. Each
// used feature then gets f(x, k) = c_full + contrib(x, k) and a weight
// f(x, k) / f(x); the explanation score is the dispersion of those weights
// around 1/K.

#include <cstddef>
#include <map>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "treexplain/data.hpp"
#include "treexplain/ensemble.hpp"

namespace treexplain {

// literal:    weight_k = f(x,k) / f(x); score = sum_k (weight_k - 1/K)^2
// normalized: weight_k = f(x,k) / sum_j f(x,j); score = sum_k (w_k - mean)^2 / (K * mean)
//
// The two agree when sum_j f(x,j) = f(x), e.g. when c_full = 0 or K = 1.
enum class WeightMode { Literal, Normalized };

std::string_view to_string(WeightMode mode);
WeightMode weight_mode_from_string(std::string_view name);

inline constexpr double kDenominatorEpsilon = 1e-12;

struct ContributionBreakdown {
  std::size_t instance_id = 0;
  std::size_t target_class = 0;
  double c_full = 0.0;
  double f_x = 0.0;
  std::map<std::size_t, double> contrib;  // features met on the decision path(s)
};

struct WeightVector {
  std::map<std::size_t, double> weights;
  WeightMode mode = WeightMode::Literal;
  double mean_weight = 0.0;
};

struct ExplainScore {
  std::vector<std::pair<std::size_t, double>> per_instance;
  double aggregate = 0.0;
  std::size_t K = 0;
  WeightMode mode = WeightMode::Literal;
  std::size_t skipped = 0;
};

// Single tree: c_full is the root's target-class value. Forest: mean of the
// member breakdowns. Boosting: c_full = base_score + lr * (sum of the stage
// roots), contrib = lr * (sum of stage path deltas).
ContributionBreakdown contributions(const FittedModel& model, std::span<const double> x,
                                    std::size_t instance_id = 0);
ContributionBreakdown contributions(const FittedModel& model, const Dataset& ds,
                                    std::size_t instance);

// Used features missing from b.contrib count as contrib = 0.
// Throws NearZeroDenominator or NoFeaturesUsed.
WeightVector feature_weights(const ContributionBreakdown& b,
                             std::span<const std::size_t> used_features, WeightMode mode);

double explain_cv_instance(const WeightVector& w, std::size_t K);

// Per-instance scores over `indices`, summed in index order. Instances with a
// near-zero denominator are skipped and counted; more than half skipped
// throws AllInstancesSkipped.
ExplainScore explain_cv_model(const FittedModel& model, const Dataset& ds,
                              std::span<const std::size_t> indices, WeightMode mode);

}  // namespace treexplain
