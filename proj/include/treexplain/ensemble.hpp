#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "treexplain/data.hpp"
#include "treexplain/tree.hpp"

namespace treexplain {

enum class Family { DecisionTree, RandomForest, ExtraTrees, GradientBoosting };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

struct ModelSpec {
  Family family = Family::DecisionTree;
  CartConfig cart;
  std::optional<std::size_t> n_trees;    // bagged families only
  std::optional<double> learning_rate;   // boosting only
  std::optional<std::size_t> n_rounds;   // boosting only
  bool bootstrap = false;
  std::uint64_t seed = 0;

  // Family defaults: forests bootstrap with sqrt features, extra-trees use
  // random thresholds without bootstrap, boosting uses depth-3 stages.
  static ModelSpec defaults(Family family);

  // Throws InvalidSpec when the optional fields do not match the family.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& doc);

struct SingleTreeModel {
  Tree tree;
  friend bool operator==(const SingleTreeModel&, const SingleTreeModel&) = default;
};

// Scores are the mean of the member trees' class distributions.
struct ForestModel {
  std::vector<Tree> trees;
  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

// Raw multiclass margins: base_scores[c] + learning_rate * sum_r stages[r][c](x).
struct BoostedModel {
  std::vector<double> base_scores;         // class log-priors
  std::vector<std::vector<Tree>> stages;   // n_rounds x n_classes regression trees
  double learning_rate = 0.1;
  friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

class FittedModel {
 public:
  using Body = std::variant<SingleTreeModel, ForestModel, BoostedModel>;

  FittedModel(ModelSpec spec, std::size_t n_features, std::size_t n_classes, Body body);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t n_classes() const noexcept { return n_classes_; }
  const Body& body() const noexcept { return body_; }

  // Union of split features over all member trees, ascending.
  std::vector<std::size_t> used_features() const;

  // One additive score per class: probabilities for trees and forests, raw
  // margins for boosting.
  std::vector<double> class_scores(std::span<const double> x) const;

  friend bool operator==(const FittedModel&, const FittedModel&) = default;

 private:
  ModelSpec spec_;
  std::size_t n_features_;
  std::size_t n_classes_;
  Body body_;
};

FittedModel fit_model(const Dataset& ds, std::span<const std::size_t> indices,
                      const ModelSpec& spec);

double class_score(const FittedModel& model, std::span<const double> x,
                   std::size_t class_index);

// Argmax of class_scores; ties go to the lowest class index.
std::size_t predict_class(const FittedModel& model, std::span<const double> x);

double accuracy(const FittedModel& model, const Dataset& ds,
                std::span<const std::size_t> indices);

inline constexpr std::string_view kModelFormat = "treexplain-model/1";

nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& doc);

}  // namespace treexplain
