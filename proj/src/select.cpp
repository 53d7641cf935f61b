#include "treexplain/select.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numeric>
#include <optional>
#include <thread>

#include "treexplain/error.hpp"

namespace treexplain {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs task(i) for i in [0, n) on up to `workers` threads. Exceptions are
// rethrown after all workers finish, lowest index first.
template <typename Task>
void parallel_for(std::size_t n, std::size_t workers, Task&& task) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto drain = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

void apply_axis(ModelSpec& spec, const std::string& axis, const nlohmann::json& value) {
  const auto need = [&](bool ok) {
    if (!ok) {
      throw Error(ErrorKind::InvalidSpec, "axis '" + axis + "' has invalid value " + value.dump() +
                                              " for " + std::string(to_string(spec.family)));
    }
  };
  const bool bagged =
      spec.family == Family::RandomForest || spec.family == Family::ExtraTrees;
  const bool boosted = spec.family == Family::GradientBoosting;
  if (axis == "max_depth") {
    if (value.is_null()) {
      spec.cart.max_depth.reset();
    } else {
      need(value.is_number_unsigned() && value.get<std::size_t>() >= 1);
      spec.cart.max_depth = value.get<std::size_t>();
    }
  } else if (axis == "min_samples_leaf") {
    need(value.is_number_unsigned() && value.get<std::size_t>() >= 1);
    spec.cart.min_samples_leaf = value.get<std::size_t>();
  } else if (axis == "criterion") {
    need(value.is_string());
    spec.cart.criterion = criterion_from_string(value.get<std::string>());
  } else if (axis == "max_features") {
    if (value.is_string()) {
      const auto name = value.get<std::string>();
      need(name == "all" || name == "sqrt");
      spec.cart.max_features = name == "all" ? MaxFeatures::all() : MaxFeatures::sqrt();
    } else {
      need(value.is_number_unsigned() && value.get<std::size_t>() >= 1);
      spec.cart.max_features = MaxFeatures::of(value.get<std::size_t>());
    }
  } else if (axis == "n_trees") {
    need(bagged && value.is_number_unsigned() && value.get<std::size_t>() >= 1);
    spec.n_trees = value.get<std::size_t>();
  } else if (axis == "bootstrap") {
    need(bagged && value.is_boolean());
    spec.bootstrap = value.get<bool>();
  } else if (axis == "learning_rate") {
    need(boosted && value.is_number());
    spec.learning_rate = value.get<double>();
  } else if (axis == "n_rounds") {
    need(boosted && value.is_number_unsigned() && value.get<std::size_t>() >= 1);
    spec.n_rounds = value.get<std::size_t>();
  } else {
    throw Error(ErrorKind::InvalidSpec, "unknown grid axis '" + axis + "'");
  }
}

SelectionReport new_report(SelectionMethod method, const Dataset& ds, const SplitPlan& split,
                           const SelectOptions& options) {
  if (!(options.gate_delta >= 0.0 && options.gate_delta <= 1.0)) {
    throw Error(ErrorKind::InvalidSpec, "gate_delta must lie in [0, 1]");
  }
  if (split.train_indices.empty() || split.test_indices.empty()) {
    throw Error(ErrorKind::EmptyIndexSet, "split has an empty side");
  }
  SelectionReport report;
  report.method = method;
  report.dataset_name = ds.name();
  report.n_rows = ds.n_rows();
  report.n_features = ds.n_features();
  report.n_classes = ds.n_classes();
  report.seed = split.seed;
  report.fold_seed = options.fold_seed;
  report.mode = options.mode;
  report.acc_gate_delta = options.gate_delta;
  report.k = method == SelectionMethod::CrossValidation ? options.k : 0;
  report.workers = std::max<std::size_t>(options.workers, 1);
  return report;
}

// Fills rank, top3 and the top-3 flags from a best-first order over the
// selectable candidates; everything else is ranked after them in `rest` order.
void assign_ranks(SelectionReport& report, const std::vector<std::size_t>& selectable,
                  const std::vector<std::size_t>& rest) {
  std::size_t rank = 0;
  for (std::size_t i : selectable) report.candidates[i].rank = rank++;
  for (std::size_t i : rest) report.candidates[i].rank = rank++;
  const std::size_t n_top = std::min<std::size_t>(3, selectable.size());
  report.top3.assign(selectable.begin(), selectable.begin() + static_cast<std::ptrdiff_t>(n_top));
  report.fewer_than_three = n_top < 3;
}

void finish_top3(SelectionReport& report) {
  if (report.top3.empty()) {
    report.mean_top3_test_acc = 0.0;
    return;
  }
  double total = 0.0;
  for (std::size_t i : report.top3) total += *report.candidates[i].test_acc;
  report.mean_top3_test_acc = total / static_cast<double>(report.top3.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// Grids

std::size_t HyperGrid::size() const {
  std::size_t total = 1;
  for (const auto& [name, values] : axes) total *= values.size();
  return total;
}

HyperGrid grid_from_json(const nlohmann::json& doc) {
  try {
    HyperGrid grid;
    grid.family = family_from_string(doc.at("family").get<std::string>());
    for (const auto& [name, values] : doc.at("axes").items()) {
      if (!values.is_array()) {
        throw Error(ErrorKind::InvalidSpec, "axis '" + name + "' must be an array");
      }
      grid.axes[name] = values.get<std::vector<nlohmann::json>>();
    }
    return grid;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("grid JSON: ") + e.what());
  }
}

nlohmann::json grid_to_json(const HyperGrid& grid) {
  nlohmann::json axes = nlohmann::json::object();
  for (const auto& [name, values] : grid.axes) axes[name] = values;
  return {{"family", to_string(grid.family)}, {"axes", axes}};
}

HyperGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open grid file " + path.string());
  try {
    return grid_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

std::vector<ModelSpec> expand_grid(const HyperGrid& grid, std::uint64_t seed) {
  std::vector<std::pair<std::string, const std::vector<nlohmann::json>*>> axes;
  for (const auto& [name, values] : grid.axes) {
    if (values.empty()) throw Error(ErrorKind::EmptyAxis, "grid axis '" + name + "' is empty");
    axes.emplace_back(name, &values);
  }

  std::vector<ModelSpec> specs;
  std::vector<std::size_t> digits(axes.size(), 0);
  const std::size_t total = grid.size();
  specs.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    ModelSpec spec = ModelSpec::defaults(grid.family);
    spec.seed = seed;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      apply_axis(spec, axes[a].first, (*axes[a].second)[digits[a]]);
    }
    spec.validate();
    specs.push_back(std::move(spec));
    // Odometer increment, last axis fastest.
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++digits[a] < axes[a].second->size()) break;
      digits[a] = 0;
    }
  }
  return specs;
}

std::string_view to_string(SelectionMethod method) {
  return method == SelectionMethod::FeatureExplanation ? "fe" : "cv";
}

SelectionMethod selection_method_from_string(std::string_view name) {
  if (name == "fe") return SelectionMethod::FeatureExplanation;
  if (name == "cv") return SelectionMethod::CrossValidation;
  throw Error(ErrorKind::InvalidSpec, "unknown selection method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Selection

ExplanationRanking rank_by_explanation(std::span<CandidateResult> candidates,
                                       double gate_delta) {
  double best_train = -1.0;
  for (const auto& c : candidates) {
    if (c.explain_cv) best_train = std::max(best_train, c.train_acc);
  }
  ExplanationRanking out;
  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& c = candidates[i];
    if (!c.explain_cv) {
      c.gated = false;
      failed.push_back(i);
      continue;
    }
    c.gated = c.train_acc >= best_train - gate_delta - 1e-12;
    (c.gated ? out.selectable : out.rest).push_back(i);
  }
  // Scores that differ only by summation rounding count as ties.
  const auto key = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
  };
  const auto by_score = [&](std::size_t a, std::size_t b) {
    const auto& ca = candidates[a];
    const auto& cb = candidates[b];
    const double ka = key(*ca.explain_cv);
    const double kb = key(*cb.explain_cv);
    if (ka != kb) return ka < kb;
    if (ca.train_acc != cb.train_acc) return ca.train_acc > cb.train_acc;
    return a < b;
  };
  std::sort(out.selectable.begin(), out.selectable.end(), by_score);
  std::sort(out.rest.begin(), out.rest.end(), by_score);
  out.rest.insert(out.rest.end(), failed.begin(), failed.end());
  return out;
}


SelectionReport select_by_fe(const Dataset& ds, const SplitPlan& split,
                             std::span<const ModelSpec> candidates, const SelectOptions& options) {
  SelectionReport report =
      new_report(SelectionMethod::FeatureExplanation, ds, split, options);
  const std::size_t g = candidates.size();
  report.candidates.resize(g);
  std::vector<std::optional<FittedModel>> models(g);
  std::atomic<std::size_t> fits{0};

  const auto start = Clock::now();
  parallel_for(g, report.workers, [&](std::size_t i) {
    CandidateResult& result = report.candidates[i];
    result.spec = candidates[i];
    const auto fit_start = Clock::now();
    models[i].emplace(fit_model(ds, split.train_indices, candidates[i]));
    ++fits;
    result.fit_seconds = seconds_since(fit_start);
    result.train_acc = accuracy(*models[i], ds, split.train_indices);
    try {
      result.explain_cv =
          explain_cv_model(*models[i], ds, split.train_indices, options.mode).aggregate;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoFeaturesUsed && e.kind() != ErrorKind::AllInstancesSkipped) {
        throw;
      }
      result.failure = std::string(to_string(e.kind()));
    }
  });

  const ExplanationRanking ranking = rank_by_explanation(report.candidates, options.gate_delta);
  assign_ranks(report, ranking.selectable, ranking.rest);
  report.wall_seconds = seconds_since(start);
  report.fit_count = fits.load();

  // Reporting only: test labels are first touched here.
  for (std::size_t i = 0; i < g; ++i) {
    report.candidates[i].test_acc = accuracy(*models[i], ds, split.test_indices);
  }
  finish_top3(report);
  return report;
}

SelectionReport select_by_cv(const Dataset& ds, const SplitPlan& split,
                             std::span<const ModelSpec> candidates, const SelectOptions& options) {
  SelectionReport report = new_report(SelectionMethod::CrossValidation, ds, split, options);
  const FoldPlan folds =
      stratified_kfold(split.train_indices, ds.labels(), options.k, options.fold_seed);
  const std::size_t g = candidates.size();
  const std::size_t k = folds.k;
  std::vector<IndexList> fold_train(k);
  for (std::size_t f = 0; f < k; ++f) fold_train[f] = folds.complement(f);

  report.candidates.resize(g);
  std::vector<std::vector<double>> fold_accs(g, std::vector<double>(k, 0.0));
  std::vector<std::vector<double>> fold_seconds(g, std::vector<double>(k, 0.0));
  std::atomic<std::size_t> fits{0};

  const auto start = Clock::now();
  parallel_for(g * k, report.workers, [&](std::size_t task) {
    const std::size_t i = task / k;
    const std::size_t f = task % k;
    const auto fit_start = Clock::now();
    const FittedModel model = fit_model(ds, fold_train[f], candidates[i]);
    ++fits;
    fold_seconds[i][f] = seconds_since(fit_start);
    fold_accs[i][f] = accuracy(model, ds, folds.folds[f]);
  });

  std::vector<std::size_t> order(g);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < g; ++i) {
    CandidateResult& c = report.candidates[i];
    c.spec = candidates[i];
    double total = 0.0;
    for (double a : fold_accs[i]) total += a;
    c.cv_acc = total / static_cast<double>(k);
    c.fold_accs = fold_accs[i];
    c.fit_seconds = std::accumulate(fold_seconds[i].begin(), fold_seconds[i].end(), 0.0);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *report.candidates[a].cv_acc > *report.candidates[b].cv_acc;
  });
  assign_ranks(report, order, {});

  // Refit the selected specs on the whole training portion.
  std::vector<std::optional<FittedModel>> models(g);
  parallel_for(report.top3.size(), report.workers, [&](std::size_t t) {
    const std::size_t i = report.top3[t];
    models[i].emplace(fit_model(ds, split.train_indices, candidates[i]));
    ++fits;
  });
  report.wall_seconds = seconds_since(start);
  report.fit_count = fits.load();

  // Reporting only: refit the rest so every CSV row has a test accuracy.
  std::atomic<std::size_t> extra{0};
  parallel_for(g, report.workers, [&](std::size_t i) {
    if (!models[i]) {
      models[i].emplace(fit_model(ds, split.train_indices, candidates[i]));
      ++extra;
    }
  });
  report.reporting_fit_count = extra.load();
  for (std::size_t i = 0; i < g; ++i) {
    report.candidates[i].train_acc = accuracy(*models[i], ds, split.train_indices);
    report.candidates[i].test_acc = accuracy(*models[i], ds, split.test_indices);
  }
  finish_top3(report);
  return report;
}

ComparisonRecord compare_methods(const Dataset& ds, std::span<const ModelSpec> candidates,
                                 const SelectOptions& options, std::uint64_t seed,
                                 std::size_t repetitions, double train_fraction) {
  if (repetitions < 1) throw Error(ErrorKind::InvalidSpec, "repetitions must be >= 1");
  ComparisonRecord record;
  record.dataset_name = ds.name();
  for (std::size_t r = 0; r < repetitions; ++r) {
    ComparisonRun run;
    run.split_seed = seed + r;
    const SplitPlan split = train_test_split(ds, train_fraction, run.split_seed);
    SelectOptions opts = options;
    opts.fold_seed = run.split_seed;
    run.cv = select_by_cv(ds, split, candidates, opts);
    run.fe = select_by_fe(ds, split, candidates, opts);
    record.cv_mean_top3_test_acc += run.cv.mean_top3_test_acc;
    record.fe_mean_top3_test_acc += run.fe.mean_top3_test_acc;
    record.cv_mean_wall_seconds += run.cv.wall_seconds;
    record.fe_mean_wall_seconds += run.fe.wall_seconds;
    record.runs.push_back(std::move(run));
  }
  const auto reps = static_cast<double>(repetitions);
  record.cv_mean_top3_test_acc /= reps;
  record.fe_mean_top3_test_acc /= reps;
  record.cv_mean_wall_seconds /= reps;
  record.fe_mean_wall_seconds /= reps;
  record.speedup = record.cv_mean_wall_seconds / record.fe_mean_wall_seconds;
  return record;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& value) {
  return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<T>();
}

}  // namespace

nlohmann::json report_to_json(const SelectionReport& report, bool include_timing) {
  nlohmann::json out;
  out["schema"] = kReportSchema;
  out["method"] = to_string(report.method);
  out["dataset"] = {{"name", report.dataset_name},
                    {"n_rows", report.n_rows},
                    {"n_features", report.n_features},
                    {"n_classes", report.n_classes}};
  out["seed"] = report.seed;
  out["fold_seed"] = report.fold_seed;
  out["mode"] = to_string(report.mode);
  out["acc_gate_delta"] = report.acc_gate_delta;
  out["k"] = report.k;
  out["workers"] = report.workers;
  out["fit_count"] = report.fit_count;
  out["reporting_fit_count"] = report.reporting_fit_count;
  auto candidates = nlohmann::json::array();
  for (const auto& c : report.candidates) {
    nlohmann::json row;
    row["spec"] = model_spec_to_json(c.spec);
    row["train_acc"] = c.train_acc;
    row["explain_cv"] = optional_json(c.explain_cv);
    row["cv_acc"] = optional_json(c.cv_acc);
    row["fold_accs"] = optional_json(c.fold_accs);
    row["test_acc"] = optional_json(c.test_acc);
    row["gated"] = c.gated;
    row["rank"] = c.rank;
    row["failure"] = optional_json(c.failure);
    if (include_timing) row["fit_seconds"] = c.fit_seconds;
    candidates.push_back(std::move(row));
  }
  out["candidates"] = std::move(candidates);
  out["top3"] = report.top3;
  auto top_specs = nlohmann::json::array();
  for (std::size_t i : report.top3) top_specs.push_back(model_spec_to_json(report.candidates[i].spec));
  out["top3_specs"] = std::move(top_specs);
  out["mean_top3_test_acc"] = report.mean_top3_test_acc;
  out["fewer_than_three"] = report.fewer_than_three;
  if (include_timing) out["wall_seconds"] = report.wall_seconds;
  return out;
}

SelectionReport report_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != kReportSchema) {
      throw Error(ErrorKind::Parse, "unsupported report schema");
    }
    SelectionReport report;
    report.method = selection_method_from_string(doc.at("method").get<std::string>());
    const auto& dataset = doc.at("dataset");
    report.dataset_name = dataset.at("name").get<std::string>();
    report.n_rows = dataset.at("n_rows").get<std::size_t>();
    report.n_features = dataset.at("n_features").get<std::size_t>();
    report.n_classes = dataset.at("n_classes").get<std::size_t>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.fold_seed = doc.at("fold_seed").get<std::uint64_t>();
    report.mode = weight_mode_from_string(doc.at("mode").get<std::string>());
    report.acc_gate_delta = doc.at("acc_gate_delta").get<double>();
    report.k = doc.at("k").get<std::size_t>();
    report.workers = doc.at("workers").get<std::size_t>();
    report.fit_count = doc.at("fit_count").get<std::size_t>();
    report.reporting_fit_count = doc.at("reporting_fit_count").get<std::size_t>();
    for (const auto& row : doc.at("candidates")) {
      CandidateResult c;
      c.spec = model_spec_from_json(row.at("spec"));
      c.train_acc = row.at("train_acc").get<double>();
      c.explain_cv = optional_from<double>(row, "explain_cv");
      c.cv_acc = optional_from<double>(row, "cv_acc");
      c.fold_accs = optional_from<std::vector<double>>(row, "fold_accs");
      c.test_acc = optional_from<double>(row, "test_acc");
      c.gated = row.at("gated").get<bool>();
      c.rank = row.at("rank").get<std::size_t>();
      c.failure = optional_from<std::string>(row, "failure");
      c.fit_seconds = row.value("fit_seconds", 0.0);
      report.candidates.push_back(std::move(c));
    }
    report.top3 = doc.at("top3").get<std::vector<std::size_t>>();
    for (std::size_t i : report.top3) {
      if (i >= report.candidates.size()) throw Error(ErrorKind::Parse, "top3 index out of range");
    }
    report.mean_top3_test_acc = doc.at("mean_top3_test_acc").get<double>();
    report.fewer_than_three = doc.at("fewer_than_three").get<bool>();
    report.wall_seconds = doc.value("wall_seconds", 0.0);
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("report JSON: ") + e.what());
  }
}

nlohmann::json comparison_to_json(const ComparisonRecord& record, bool include_timing) {
  nlohmann::json out;
  out["schema"] = kComparisonSchema;
  out["dataset"] = record.dataset_name;
  out["repetitions"] = record.runs.size();
  out["cv_mean_top3_test_acc"] = record.cv_mean_top3_test_acc;
  out["fe_mean_top3_test_acc"] = record.fe_mean_top3_test_acc;
  if (include_timing) {
    out["cv_mean_wall_seconds"] = record.cv_mean_wall_seconds;
    out["fe_mean_wall_seconds"] = record.fe_mean_wall_seconds;
    out["speedup"] = record.speedup;
  }
  auto runs = nlohmann::json::array();
  for (const auto& run : record.runs) {
    runs.push_back({{"split_seed", run.split_seed},
                    {"cv", report_to_json(run.cv, include_timing)},
                    {"fe", report_to_json(run.fe, include_timing)}});
  }
  out["runs"] = std::move(runs);
  return out;
}

std::vector<std::string> candidate_csv_header() {
  return {"dataset",   "repetition",  "method",     "family",   "max_depth",
          "min_samples_leaf", "criterion", "max_features", "n_trees", "learning_rate",
          "n_rounds",  "bootstrap",   "train_acc",  "cv_acc",   "explain_cv",
          "test_acc",  "fit_seconds", "gated",      "rank",     "selected"};
}

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string format_optional(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return format_real(*v);
  } else {
    return std::to_string(*v);
  }
}

}  // namespace

void write_candidates_csv(std::ostream& out, const SelectionReport& report,
                          std::size_t repetition, bool with_header) {
  if (with_header) {
    const auto header = candidate_csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
  }
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto& c = report.candidates[i];
    const auto& cart = c.spec.cart;
    std::string max_features = "all";
    if (cart.max_features.kind == MaxFeatures::Kind::Sqrt) max_features = "sqrt";
    if (cart.max_features.kind == MaxFeatures::Kind::Count) {
      max_features = std::to_string(cart.max_features.count);
    }
    const bool selected =
        std::find(report.top3.begin(), report.top3.end(), i) != report.top3.end();
    out << report.dataset_name << ',' << repetition << ',' << to_string(report.method) << ','
        << to_string(c.spec.family) << ','
        << (cart.max_depth ? std::to_string(*cart.max_depth) : "none") << ','
        << cart.min_samples_leaf << ',' << to_string(cart.criterion) << ',' << max_features
        << ',' << format_optional(c.spec.n_trees) << ','
        << format_optional(c.spec.learning_rate) << ',' << format_optional(c.spec.n_rounds)
        << ',' << (c.spec.bootstrap ? "true" : "false") << ',' << format_real(c.train_acc)
        << ',' << format_optional(c.cv_acc) << ',' << format_optional(c.explain_cv) << ','
        << format_optional(c.test_acc) << ',' << format_real(c.fit_seconds) << ','
        << (c.gated ? "true" : "false") << ',' << c.rank << ',' << (selected ? "true" : "false")
        << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const ComparisonRecord& record) {
  bool header = true;
  for (std::size_t r = 0; r < record.runs.size(); ++r) {
    write_candidates_csv(out, record.runs[r].cv, r, header);
    header = false;
    write_candidates_csv(out, record.runs[r].fe, r, false);
  }
}

}  // namespace treexplain
