#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "treexplain/ensemble.hpp"

using namespace treexplain;
using testing::error_kind_of;

namespace {

ModelSpec tree_spec(std::size_t depth) {
  ModelSpec spec = ModelSpec::defaults(Family::DecisionTree);
  spec.cart.max_depth = depth;
  return spec;
}

Tree leaf_tree(std::vector<double> value, std::size_t d) {
  std::vector<TreeNode> nodes(1);
  nodes[0].weight = 1.0;
  const std::size_t outputs = value.size();
  nodes[0].value = std::move(value);
  return Tree(nodes, d, outputs);
}

Tree stump(std::size_t feature, double threshold, std::vector<double> left,
           std::vector<double> right, std::size_t d) {
  std::vector<double> root(left.size());
  for (std::size_t c = 0; c < root.size(); ++c) root[c] = 0.5 * (left[c] + right[c]);
  const std::size_t outputs = root.size();
  std::vector<TreeNode> nodes(3);
  nodes[0] = TreeNode{static_cast<int>(feature), threshold, 1, 2, 2.0, root};
  nodes[1] = TreeNode{-1, 0.0, -1, -1, 1.0, std::move(left)};
  nodes[2] = TreeNode{-1, 0.0, -1, -1, 1.0, std::move(right)};
  return Tree(nodes, d, outputs);
}

}  // namespace

TEST_CASE("iris depth-3 tree reaches 0.95 training accuracy") {
  const Dataset iris = testing::iris();
  const SplitPlan split = train_test_split(iris, 0.7, 1);
  const FittedModel m = fit_model(iris, split.train_indices, tree_spec(3));
  CHECK(accuracy(m, iris, split.train_indices) >= 0.95);
}

TEST_CASE("a one-tree forest without bagging equals the decision tree") {
  const Dataset wine = testing::wine();
  const SplitPlan split = train_test_split(wine, 0.7, 3);
  ModelSpec forest = ModelSpec::defaults(Family::RandomForest);
  forest.n_trees = 1;
  forest.bootstrap = false;
  forest.cart.max_features = MaxFeatures::all();
  forest.cart.max_depth = 4;
  const FittedModel f = fit_model(wine, split.train_indices, forest);
  const FittedModel t = fit_model(wine, split.train_indices, tree_spec(4));
  const auto& tree = std::get<SingleTreeModel>(t.body()).tree;
  CHECK(std::get<ForestModel>(f.body()).trees.front() == tree);
  for (std::size_t i = 0; i < wine.n_rows(); ++i) {
    CHECK(predict_class(f, wine.row(i)) == predict_class(t, wine.row(i)));
  }
}

TEST_CASE("gradient boosting fits wine") {
  const Dataset wine = testing::wine();
  const SplitPlan split = train_test_split(wine, 0.7, 1);
  const FittedModel m =
      fit_model(wine, split.train_indices, ModelSpec::defaults(Family::GradientBoosting));
  CHECK(accuracy(m, wine, split.train_indices) >= 0.99);
  const auto& boosted = std::get<BoostedModel>(m.body());
  CHECK(boosted.stages.size() == 50);
  CHECK(boosted.stages.front().size() == 3);
}

TEST_CASE("boosting base scores are class log-priors") {
  const Dataset ds = testing::make_dataset({{0}, {1}, {2}, {3}}, {0, 0, 0, 1});
  ModelSpec spec = ModelSpec::defaults(Family::GradientBoosting);
  spec.n_rounds = 1;
  const FittedModel m = fit_model(ds, testing::all_rows(ds), spec);
  const auto& boosted = std::get<BoostedModel>(m.body());
  CHECK(boosted.base_scores[0] == doctest::Approx(std::log(0.75)));
  CHECK(boosted.base_scores[1] == doctest::Approx(std::log(0.25)));
}

TEST_CASE("manual models score as documented") {
  const Tree s = stump(0, 0.5, {0.25, 0.75}, {0.9, 0.1}, 1);
  const std::vector<double> x{0.0};
  const FittedModel single(ModelSpec::defaults(Family::DecisionTree), 1, 2, SingleTreeModel{s});
  CHECK(class_score(single, x, 1) == 0.75);
  CHECK(predict_class(single, x) == 1);
  CHECK(error_kind_of([&] { class_score(single, x, 2); }) == ErrorKind::BadClass);

  // Two identical trees average to one.
  const FittedModel forest(ModelSpec::defaults(Family::RandomForest), 1, 2, ForestModel{{s, s}});
  CHECK(class_score(forest, x, 1) == 0.75);

  // Boosted margins: base + lr * sum of stage values.
  BoostedModel b;
  b.base_scores = {0.1, -0.2};
  b.learning_rate = 0.5;
  b.stages = {{leaf_tree({1.0}, 1), leaf_tree({-1.0}, 1)}, {leaf_tree({2.0}, 1), leaf_tree({0.0}, 1)}};
  const FittedModel boosted(ModelSpec::defaults(Family::GradientBoosting), 1, 2, b);
  const auto scores = boosted.class_scores(x);
  CHECK(scores[0] == doctest::Approx(0.1 + 0.5 * 3.0));
  CHECK(scores[1] == doctest::Approx(-0.2 - 0.5));

  // Exact ties go to the lowest class.
  const FittedModel tie(ModelSpec::defaults(Family::DecisionTree), 1, 2,
                        SingleTreeModel{leaf_tree({0.5, 0.5}, 1)});
  CHECK(predict_class(tie, x) == 0);
}

TEST_CASE("accuracy edge cases") {
  const Dataset ds = testing::make_dataset({{0}, {1}, {2}, {3}}, {0, 0, 1, 1});
  const FittedModel perfect = fit_model(ds, testing::all_rows(ds), tree_spec(2));
  CHECK(accuracy(perfect, ds, testing::all_rows(ds)) == 1.0);
  const FittedModel constant(ModelSpec::defaults(Family::DecisionTree), 1, 2,
                             SingleTreeModel{leaf_tree({0.6, 0.4}, 1)});
  CHECK(accuracy(constant, ds, testing::all_rows(ds)) == 0.5);
  const IndexList none;
  CHECK(error_kind_of([&] { accuracy(constant, ds, none); }) == ErrorKind::EmptyIndexSet);
}

TEST_CASE("spec validation and training-set checks") {
  const Dataset ds = testing::make_dataset({{0}, {1}, {2}, {3}}, {0, 0, 1, 1});
  const IndexList one_class{0, 1};
  CHECK(error_kind_of([&] { fit_model(ds, one_class, tree_spec(2)); }) ==
        ErrorKind::SingleClassTrainSet);

  ModelSpec bad = tree_spec(2);
  bad.n_trees = 3;
  CHECK(error_kind_of([&] { bad.validate(); }) == ErrorKind::InvalidSpec);
  bad = tree_spec(2);
  bad.bootstrap = true;
  CHECK(error_kind_of([&] { bad.validate(); }) == ErrorKind::InvalidSpec);
  bad = ModelSpec::defaults(Family::GradientBoosting);
  bad.learning_rate = 0.0;
  CHECK(error_kind_of([&] { bad.validate(); }) == ErrorKind::InvalidSpec);
  bad = ModelSpec::defaults(Family::RandomForest);
  bad.n_trees = 0;
  CHECK(error_kind_of([&] { bad.validate(); }) == ErrorKind::InvalidSpec);
  bad = tree_spec(2);
  bad.cart.max_features = MaxFeatures::of(2);
  CHECK(error_kind_of([&] { fit_model(ds, testing::all_rows(ds), bad); }) ==
        ErrorKind::InvalidSpec);
  CHECK(error_kind_of([&] { family_from_string("svm"); }) == ErrorKind::InvalidSpec);
}

TEST_CASE("property: ensembles are deterministic, additive and serializable") {
  std::mt19937_64 rng(21);
  const Family families[] = {Family::DecisionTree, Family::RandomForest, Family::ExtraTrees,
                             Family::GradientBoosting};
  for (int trial = 0; trial < 24; ++trial) {
    const Dataset ds = testing::random_dataset(rng, 40 + rng() % 60, 2 + rng() % 4,
                                               2 + static_cast<int>(rng() % 3));
    ModelSpec spec = ModelSpec::defaults(families[trial % 4]);
    spec.seed = rng();
    if (spec.n_trees) spec.n_trees = 1 + rng() % 8;
    if (spec.n_rounds) spec.n_rounds = 1 + rng() % 8;
    spec.cart.max_depth = 1 + rng() % 4;
    const IndexList rows = testing::all_rows(ds);
    const FittedModel m = fit_model(ds, rows, spec);
    CHECK(fit_model(ds, rows, spec) == m);

    const FittedModel restored = model_from_json(model_to_json(m));
    CHECK(restored == m);
    CHECK(model_to_json(restored).dump() == model_to_json(m).dump());

    for (std::size_t i = 0; i < ds.n_rows(); i += 7) {
      const auto x = ds.row(i);
      const auto scores = m.class_scores(x);
      CHECK(restored.class_scores(x) == scores);
      if (const auto* forest = std::get_if<ForestModel>(&m.body())) {
        for (std::size_t c = 0; c < scores.size(); ++c) {
          double mean = 0.0;
          for (const auto& t : forest->trees) mean += t.predict_value(x)[c];
          mean /= static_cast<double>(forest->trees.size());
          CHECK(std::abs(mean - scores[c]) <= 1e-12);
        }
      }
      if (const auto* boosted = std::get_if<BoostedModel>(&m.body())) {
        for (std::size_t c = 0; c < scores.size(); ++c) {
          double margin = 0.0;
          for (const auto& stage : boosted->stages) margin += stage[c].predict_value(x)[0];
          margin = boosted->base_scores[c] + boosted->learning_rate * margin;
          CHECK(std::abs(margin - scores[c]) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("model JSON rejects unknown formats") {
  const Dataset ds = testing::make_dataset({{0}, {1}, {2}, {3}}, {0, 0, 1, 1});
  auto doc = model_to_json(fit_model(ds, testing::all_rows(ds), tree_spec(2)));
  CHECK(doc.at("format") == std::string(kModelFormat));
  doc["format"] = "other/9";
  CHECK(error_kind_of([&] { model_from_json(doc); }) == ErrorKind::Parse);
}
