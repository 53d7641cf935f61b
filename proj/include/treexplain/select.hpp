#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "treexplain/data.hpp"
#include "treexplain/ensemble.hpp"
#include "treexplain/explain.hpp"

namespace treexplain {

// Axis values are kept as JSON scalars: integers, reals, strings, booleans, or
// null (unlimited max_depth).
struct HyperGrid {
  Family family = Family::DecisionTree;
  std::map<std::string, std::vector<nlohmann::json>> axes;  // sorted by axis name

  std::size_t size() const;
};

HyperGrid grid_from_json(const nlohmann::json& doc);
nlohmann::json grid_to_json(const HyperGrid& grid);
HyperGrid load_grid(const std::filesystem::path& path);

// Cartesian product over the axes in name order, first axis outermost, values
// in file order. Every spec starts from ModelSpec::defaults(family) and gets
// `seed`. Throws EmptyAxis or InvalidSpec.
std::vector<ModelSpec> expand_grid(const HyperGrid& grid, std::uint64_t seed);

enum class SelectionMethod { FeatureExplanation, CrossValidation };

std::string_view to_string(SelectionMethod method);
SelectionMethod selection_method_from_string(std::string_view name);

struct SelectOptions {
  WeightMode mode = WeightMode::Literal;
  double gate_delta = 0.02;
  std::size_t k = 10;
  std::size_t workers = 1;
  std::uint64_t fold_seed = 0;
};

struct CandidateResult {
  ModelSpec spec;
  double train_acc = 0.0;
  std::optional<double> explain_cv;
  std::optional<double> cv_acc;
  std::optional<std::vector<double>> fold_accs;
  double fit_seconds = 0.0;
  std::optional<double> test_acc;  // reporting only
  bool gated = false;              // passed the training-accuracy gate (FE)
  std::size_t rank = 0;            // 0 = best
  std::optional<std::string> failure;
};

struct SelectionReport {
  SelectionMethod method = SelectionMethod::FeatureExplanation;
  std::string dataset_name;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::uint64_t seed = 0;  // split seed
  std::uint64_t fold_seed = 0;
  WeightMode mode = WeightMode::Literal;
  double acc_gate_delta = 0.0;
  std::size_t k = 0;
  std::size_t workers = 1;
  std::vector<CandidateResult> candidates;
  std::vector<std::size_t> top3;  // indices into candidates, best first
  double mean_top3_test_acc = 0.0;
  bool fewer_than_three = false;
  double wall_seconds = 0.0;
  std::size_t fit_count = 0;            // fits inside the timed selection
  std::size_t reporting_fit_count = 0;  // extra fits to fill test_acc for the CSV
};

struct ExplanationRanking {
  std::vector<std::size_t> selectable;  // gated, best first
  std::vector<std::size_t> rest;        // ungated by score, then failed in grid order
};

// Sets each candidate's `gated` flag and orders candidates by the
// feature-explanation rule. Candidates without an explanation score never pass.
ExplanationRanking rank_by_explanation(std::span<CandidateResult> candidates,
                                       double gate_delta);

// Fit every candidate once on the training rows, record training accuracy and
// the aggregate explanation score, keep candidates within gate_delta of the
// best training accuracy and rank them by ascending explanation score (ties:
// higher training accuracy, then grid order).
SelectionReport select_by_fe(const Dataset& ds, const SplitPlan& split,
                             std::span<const ModelSpec> candidates, const SelectOptions& options);

// Stratified k-fold over the training rows; rank by mean fold accuracy (ties:
// grid order). The top three are refit on all training rows for testing.
SelectionReport select_by_cv(const Dataset& ds, const SplitPlan& split,
                             std::span<const ModelSpec> candidates, const SelectOptions& options);

struct ComparisonRun {
  std::uint64_t split_seed = 0;
  SelectionReport cv;
  SelectionReport fe;
};

struct ComparisonRecord {
  std::string dataset_name;
  std::vector<ComparisonRun> runs;
  double cv_mean_top3_test_acc = 0.0;
  double fe_mean_top3_test_acc = 0.0;
  double cv_mean_wall_seconds = 0.0;
  double fe_mean_wall_seconds = 0.0;
  double speedup = 0.0;  // cv wall / fe wall
};

// Repetition r uses split seed `seed + r` (also the fold seed); both methods
// see the same split, candidates and worker budget.
ComparisonRecord compare_methods(const Dataset& ds, std::span<const ModelSpec> candidates,
                                 const SelectOptions& options, std::uint64_t seed,
                                 std::size_t repetitions, double train_fraction = 0.7);

inline constexpr std::string_view kReportSchema = "treexplain-selection/1";
inline constexpr std::string_view kComparisonSchema = "treexplain-comparison/1";

// Timing fields (wall_seconds, fit_seconds) are omitted when include_timing is
// false, which makes reports byte-comparable across runs.
nlohmann::json report_to_json(const SelectionReport& report, bool include_timing = true);
SelectionReport report_from_json(const nlohmann::json& doc);
nlohmann::json comparison_to_json(const ComparisonRecord& record, bool include_timing = true);

// Flat per-candidate export for plotting.
std::vector<std::string> candidate_csv_header();
void write_candidates_csv(std::ostream& out, const SelectionReport& report,
                          std::size_t repetition, bool with_header);
void write_comparison_csv(std::ostream& out, const ComparisonRecord& record);

}  // namespace treexplain
