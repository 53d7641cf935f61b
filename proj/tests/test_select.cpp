#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "treexplain/select.hpp"

using namespace treexplain;
using testing::error_kind_of;
using nlohmann::json;

namespace {

HyperGrid tree_grid() {
  return grid_from_json(json::parse(
      R"({"family": "decision_tree",
          "axes": {"max_depth": [1, 2, 3, null], "criterion": ["gini", "entropy"],
                   "min_samples_leaf": [1, 5]}})"));
}

CandidateResult candidate(double train_acc, std::optional<double> score) {
  CandidateResult c;
  c.train_acc = train_acc;
  c.explain_cv = score;
  return c;
}

// Replaces the test-row labels with a rotation of themselves; training rows
// are untouched.
Dataset scramble_test_labels(const Dataset& ds, const SplitPlan& split) {
  std::vector<int> labels(ds.labels().begin(), ds.labels().end());
  const auto& test = split.test_indices;
  for (std::size_t t = 0; t < test.size(); ++t) {
    labels[test[t]] = ds.label(test[(t + 1) % test.size()]);
  }
  return ds.with_labels(labels);
}

}  // namespace

TEST_CASE("expand_grid order and contents") {
  const HyperGrid grid = grid_from_json(json::parse(
      R"({"family": "decision_tree", "axes": {"max_depth": [2, 4], "criterion": ["gini", "entropy"]}})"));
  CHECK(grid.size() == 4);
  const auto specs = expand_grid(grid, 9);
  REQUIRE(specs.size() == 4);
  // Axes in name order: criterion outermost, max_depth fastest.
  CHECK(specs[0].cart.criterion == Criterion::Gini);
  CHECK(specs[0].cart.max_depth == 2u);
  CHECK(specs[1].cart.criterion == Criterion::Gini);
  CHECK(specs[1].cart.max_depth == 4u);
  CHECK(specs[2].cart.criterion == Criterion::Entropy);
  CHECK(specs[2].cart.max_depth == 2u);
  CHECK(specs[3].cart.max_depth == 4u);
  for (const auto& s : specs) CHECK(s.seed == 9);

  const auto big = expand_grid(tree_grid(), 1);
  CHECK(big.size() == 16);
  for (std::size_t i = 0; i < big.size(); ++i) {
    for (std::size_t j = i + 1; j < big.size(); ++j) CHECK_FALSE(big[i] == big[j]);
  }
  CHECK(big[0].cart.max_depth == 1u);
  CHECK(big[1].cart.min_samples_leaf == 5);
  CHECK_FALSE(big[6].cart.max_depth.has_value());
  CHECK(big[8].cart.criterion == Criterion::Entropy);

  const HyperGrid one = grid_from_json(json::parse(R"({"family": "decision_tree", "axes": {}})"));
  CHECK(expand_grid(one, 0).size() == 1);
  CHECK(grid_from_json(grid_to_json(tree_grid())).axes == tree_grid().axes);
}

TEST_CASE("expand_grid rejects bad grids") {
  auto grid = [](const char* text) { return grid_from_json(json::parse(text)); };
  CHECK(error_kind_of([&] {
          expand_grid(grid(R"({"family": "decision_tree", "axes": {"max_depth": []}})"), 0);
        }) == ErrorKind::EmptyAxis);
  CHECK(error_kind_of([&] {
          expand_grid(grid(R"({"family": "decision_tree", "axes": {"n_trees": [5]}})"), 0);
        }) == ErrorKind::InvalidSpec);
  CHECK(error_kind_of([&] {
          expand_grid(grid(R"({"family": "decision_tree", "axes": {"depth": [5]}})"), 0);
        }) == ErrorKind::InvalidSpec);
  CHECK(error_kind_of([&] {
          expand_grid(grid(R"({"family": "random_forest", "axes": {"learning_rate": [0.1]}})"), 0);
        }) == ErrorKind::InvalidSpec);
  CHECK(error_kind_of([&] { grid(R"({"axes": {}})"); }) == ErrorKind::Parse);

  const auto boosted = expand_grid(
      grid(R"({"family": "gradient_boosting", "axes": {"learning_rate": [0.05, 0.3], "n_rounds": [10]}})"),
      0);
  REQUIRE(boosted.size() == 2);
  CHECK(boosted[1].learning_rate == 0.3);
  CHECK(boosted[1].n_rounds == 10u);
}

TEST_CASE("ranking prefers low scores, then training accuracy, then grid order") {
  std::vector<CandidateResult> c{candidate(0.95, 0.05), candidate(0.97, 0.05),
                                 candidate(0.97, 0.01), candidate(0.90, 0.00),
                                 candidate(0.97, std::nullopt), candidate(0.97, 0.05)};
  const ExplanationRanking r = rank_by_explanation(c, 0.02);
  // Candidate 3 is more than 0.02 below the best training accuracy.
  CHECK(r.selectable == std::vector<std::size_t>{2, 1, 5, 0});
  CHECK(r.rest == std::vector<std::size_t>{3, 4});
  CHECK_FALSE(c[3].gated);
  CHECK_FALSE(c[4].gated);
  CHECK(c[0].gated);

  // A gate of 1 keeps everyone: a pure sort by score.
  const ExplanationRanking open = rank_by_explanation(c, 1.0);
  CHECK(open.selectable == std::vector<std::size_t>{3, 2, 1, 5, 0});
}

TEST_CASE("scores equal up to rounding fall through to the training-accuracy tie-break") {
  std::vector<CandidateResult> c{candidate(0.98, 1.9047619047619042), candidate(1.0, 1.9047619047619067),
                                 candidate(0.99, 1.9047619047619042)};
  const ExplanationRanking r = rank_by_explanation(c, 1.0);
  CHECK(r.selectable == std::vector<std::size_t>{1, 2, 0});
}

TEST_CASE("property: a wider gate never drops a candidate") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CandidateResult> c(2 + rng() % 10);
    for (auto& x : c) x = candidate(0.8 + 0.2 * u(rng), u(rng));
    std::size_t previous = 0;
    for (double delta : {0.0, 0.01, 0.02, 0.05, 0.1, 1.0}) {
      const auto r = rank_by_explanation(c, delta);
      CHECK(r.selectable.size() >= previous);
      CHECK(r.selectable.size() + r.rest.size() == c.size());
      previous = r.selectable.size();
      for (std::size_t i = 1; i < r.selectable.size(); ++i) {
        CHECK(*c[r.selectable[i - 1]].explain_cv <= *c[r.selectable[i]].explain_cv);
      }
    }
    CHECK(previous == c.size());
  }
}

TEST_CASE("feature-explanation selection on iris") {
  const Dataset iris = testing::iris();
  const SplitPlan split = train_test_split(iris, 0.7, 1);
  const auto specs = expand_grid(tree_grid(), 1);
  const SelectionReport r = select_by_fe(iris, split, specs, SelectOptions{});
  CHECK(r.fit_count == specs.size());
  CHECK(r.reporting_fit_count == 0);
  std::size_t n_gated = 0;
  for (const auto& c : r.candidates) n_gated += c.gated;
  REQUIRE(r.top3.size() == std::min<std::size_t>(3, n_gated));
  CHECK(r.fewer_than_three == (n_gated < 3));
  double mean = 0.0;
  for (std::size_t i : r.top3) {
    CHECK(r.candidates[i].gated);
    mean += *r.candidates[i].test_acc;
  }
  CHECK(r.mean_top3_test_acc == doctest::Approx(mean / static_cast<double>(r.top3.size())));
  for (std::size_t i = 0; i < r.top3.size(); ++i) CHECK(r.candidates[r.top3[i]].rank == i);

  const SelectionReport single = select_by_fe(iris, split, std::span(specs).first(1), SelectOptions{});
  CHECK(single.top3.size() == 1);
  CHECK(single.fewer_than_three);
}

TEST_CASE("cross-validation selection counts and averages") {
  const Dataset iris = testing::iris();
  const SplitPlan split = train_test_split(iris, 0.7, 2);
  const auto specs = expand_grid(tree_grid(), 1);
  SelectOptions options;
  options.k = 5;
  options.fold_seed = 2;
  const SelectionReport r = select_by_cv(iris, split, specs, options);
  CHECK(r.fit_count == 5 * specs.size() + 3);
  CHECK(r.reporting_fit_count == specs.size() - 3);
  for (const auto& c : r.candidates) {
    REQUIRE(c.fold_accs);
    REQUIRE(c.fold_accs->size() == 5);
    double total = 0.0;
    for (double a : *c.fold_accs) total += a;
    CHECK(*c.cv_acc == total / 5.0);
    CHECK(c.test_acc.has_value());
  }
  for (std::size_t i = 1; i < r.top3.size(); ++i) {
    CHECK(*r.candidates[r.top3[i - 1]].cv_acc >= *r.candidates[r.top3[i]].cv_acc);
  }
}

TEST_CASE("two-fold cross-validation on separable data") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({i < 10 ? static_cast<double>(i) : 100.0 + i});
    labels.push_back(i < 10 ? 0 : 1);
  }
  const Dataset ds = testing::make_dataset(rows, labels);
  const SplitPlan split = train_test_split(ds, 0.6, 1);
  ModelSpec spec = ModelSpec::defaults(Family::DecisionTree);
  spec.cart.max_depth = 1;
  SelectOptions options;
  options.k = 2;
  const std::vector<ModelSpec> specs{spec};
  const SelectionReport r = select_by_cv(ds, split, specs, options);
  CHECK(*r.candidates[0].cv_acc == 1.0);
  CHECK(*r.candidates[0].test_acc == 1.0);
  CHECK(r.fit_count == 3);
  CHECK(error_kind_of([&] {
          SelectOptions bad;
          bad.k = 50;
          select_by_cv(ds, split, specs, bad);
        }) == ErrorKind::TooManyFolds);
}

TEST_CASE("selection never looks at test labels") {
  const Dataset wine = testing::wine();
  const SplitPlan split = train_test_split(wine, 0.7, 4);
  const Dataset scrambled = scramble_test_labels(wine, split);
  const auto specs = expand_grid(tree_grid(), 4);
  SelectOptions options;
  options.k = 5;
  options.fold_seed = 4;
  for (auto method : {SelectionMethod::FeatureExplanation, SelectionMethod::CrossValidation}) {
    const auto run = [&](const Dataset& ds) {
      return method == SelectionMethod::FeatureExplanation ? select_by_fe(ds, split, specs, options)
                                                           : select_by_cv(ds, split, specs, options);
    };
    const SelectionReport a = run(wine);
    const SelectionReport b = run(scrambled);
    CHECK(a.top3 == b.top3);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      CHECK(a.candidates[i].rank == b.candidates[i].rank);
      CHECK(a.candidates[i].explain_cv == b.candidates[i].explain_cv);
      CHECK(a.candidates[i].cv_acc == b.candidates[i].cv_acc);
    }
  }
}

TEST_CASE("reports are deterministic across worker counts and round-trip") {
  const Dataset iris = testing::iris();
  const SplitPlan split = train_test_split(iris, 0.7, 3);
  const auto specs = expand_grid(tree_grid(), 3);
  SelectOptions one;
  one.k = 4;
  one.fold_seed = 3;
  SelectOptions many = one;
  many.workers = 3;
  for (auto method : {SelectionMethod::FeatureExplanation, SelectionMethod::CrossValidation}) {
    const auto run = [&](const SelectOptions& o) {
      return method == SelectionMethod::FeatureExplanation ? select_by_fe(iris, split, specs, o)
                                                           : select_by_cv(iris, split, specs, o);
    };
    const SelectionReport a = run(one);
    const SelectionReport b = run(many);
    json ja = report_to_json(a, false);
    json jb = report_to_json(b, false);
    ja.erase("workers");
    jb.erase("workers");
    CHECK(ja.dump() == jb.dump());
    CHECK(report_to_json(run(one), false).dump() == report_to_json(a, false).dump());

    const json full = report_to_json(a);
    CHECK(full.at("schema") == std::string(kReportSchema));
    CHECK(full.contains("wall_seconds"));
    CHECK_FALSE(report_to_json(a, false).contains("wall_seconds"));
    CHECK(report_to_json(report_from_json(full)).dump() == full.dump());
  }
}

TEST_CASE("candidate CSV export") {
  const Dataset iris = testing::iris();
  const SplitPlan split = train_test_split(iris, 0.7, 1);
  const auto specs = expand_grid(tree_grid(), 1);
  const SelectionReport r = select_by_fe(iris, split, specs, SelectOptions{});
  std::ostringstream out;
  write_candidates_csv(out, r, 0, true);
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == specs.size() + 1);
  std::string header;
  for (const auto& h : candidate_csv_header()) header += (header.empty() ? "" : ",") + h;
  CHECK(lines[0] == header);
  CHECK(lines[1].rfind("iris,0,fe,decision_tree,", 0) == 0);
}

TEST_CASE("compare_methods runs both methods on shared splits") {
  const Dataset iris = testing::iris();
  const HyperGrid grid = grid_from_json(json::parse(
      R"({"family": "decision_tree", "axes": {"max_depth": [1, 2, 3]}})"));
  const auto specs = expand_grid(grid, 1);
  SelectOptions options;
  options.k = 3;
  const ComparisonRecord rec = compare_methods(iris, specs, options, 10, 2);
  REQUIRE(rec.runs.size() == 2);
  CHECK(rec.runs[0].split_seed == 10);
  CHECK(rec.runs[1].split_seed == 11);
  CHECK(rec.runs[1].cv.fold_seed == 11);
  CHECK(rec.runs[0].cv.seed == rec.runs[0].fe.seed);
  CHECK(rec.fe_mean_top3_test_acc ==
        doctest::Approx((rec.runs[0].fe.mean_top3_test_acc + rec.runs[1].fe.mean_top3_test_acc) / 2));
  CHECK(rec.speedup == doctest::Approx(rec.cv_mean_wall_seconds / rec.fe_mean_wall_seconds));
  const json doc = comparison_to_json(rec);
  CHECK(doc.at("schema") == std::string(kComparisonSchema));

  std::ostringstream csv;
  write_comparison_csv(csv, rec);
  std::size_t rows = 0;
  for (char ch : csv.str()) rows += ch == '\n';
  CHECK(rows == 1 + 2 * 2 * specs.size());
}
