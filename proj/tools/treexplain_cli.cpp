// treexplain: fit, explain, select, compare and scatter subcommands.
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 config, 4 runtime. Failures print one
// JSON object {"error": <kind>, "message": <text>} on stderr.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "treexplain/data.hpp"
#include "treexplain/ensemble.hpp"
#include "treexplain/error.hpp"
#include "treexplain/explain.hpp"
#include "treexplain/scatter.hpp"
#include "treexplain/select.hpp"

namespace fs = std::filesystem;
using namespace treexplain;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

struct DataArgs {
  std::string dataset;
  std::string label;
  std::string name;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;

  Dataset load() const {
    return load_csv(dataset, label, name.empty() ? fs::path(dataset).stem().string() : name);
  }
};

void add_data_options(CLI::App& cmd, DataArgs& args) {
  cmd.add_option("--dataset", args.dataset, "CSV file with a header row")->required();
  cmd.add_option("--label", args.label, "Name of the label column")->required();
  cmd.add_option("--name", args.name, "Dataset name for reports (default: file stem)");
  cmd.add_option("--train-fraction", args.train_fraction, "Train share of the split")
      ->capture_default_str();
  cmd.add_option("--seed", args.seed, "Split and model seed")
      ->envname("TREEXPLAIN_SEED")
      ->capture_default_str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_json(const nlohmann::json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

SelectOptions make_options(const std::string& mode, std::size_t k, double gate_delta,
                           std::size_t workers, std::uint64_t fold_seed) {
  SelectOptions options;
  options.mode = weight_mode_from_string(mode);
  options.k = k;
  options.gate_delta = gate_delta;
  options.workers = workers;
  options.fold_seed = fold_seed;
  return options;
}

int fail(std::string_view kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-model feature explanation and model selection"};
  app.require_subcommand(1);

  // fit
  DataArgs fit_data;
  std::string fit_grid;
  std::size_t fit_index = 0;
  std::string fit_dump;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "Fit one grid candidate on the training split");
  add_data_options(*fit, fit_data);
  fit->add_option("--grid", fit_grid, "Grid JSON file")->required();
  fit->add_option("--index", fit_index, "Candidate index within the expanded grid")
      ->capture_default_str();
  fit->add_option("--dump-model", fit_dump, "Write the fitted model as JSON");
  fit->add_option("--out", fit_out, "Summary JSON (default: stdout)");

  // explain
  DataArgs explain_data;
  std::string explain_model;
  std::string explain_mode = "literal";
  std::string explain_rows = "train";
  std::string explain_out;
  auto* explain = app.add_subcommand("explain", "Per-instance contribution breakdowns (JSON lines)");
  add_data_options(*explain, explain_data);
  explain->add_option("--model", explain_model, "Model JSON written by fit --dump-model")
      ->required();
  explain->add_option("--mode", explain_mode, "Weight mode")
      ->check(CLI::IsMember({"literal", "normalized"}))
      ->capture_default_str();
  explain->add_option("--rows", explain_rows, "Which rows to explain")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  explain->add_option("--out", explain_out, "Output JSON-lines file (default: stdout)");

  // select / compare share most options
  DataArgs sel_data;
  std::string sel_grid;
  std::string sel_method = "fe";
  std::string sel_mode = "literal";
  std::size_t sel_k = 10;
  double sel_gate = 0.02;
  std::size_t sel_workers = 1;
  std::size_t sel_reps = 1;
  std::string sel_out;
  std::string sel_csv;
  bool sel_no_timing = false;
  auto* select = app.add_subcommand("select", "Rank a hyperparameter grid by FE or CV");
  auto* compare = app.add_subcommand("compare", "Run FE and CV selection side by side");
  for (auto* cmd : {select, compare}) {
    add_data_options(*cmd, sel_data);
    cmd->add_option("--grid", sel_grid, "Grid JSON file")->required();
    cmd->add_option("--mode", sel_mode, "Weight mode for FE")
        ->check(CLI::IsMember({"literal", "normalized"}))
        ->capture_default_str();
    cmd->add_option("--k", sel_k, "Folds for CV")->capture_default_str();
    cmd->add_option("--gate-delta", sel_gate, "FE training-accuracy gate")->capture_default_str();
    cmd->add_option("--workers", sel_workers, "Worker threads")->capture_default_str();
    cmd->add_option("--out", sel_out, "Report JSON (default: stdout)");
    cmd->add_option("--csv", sel_csv, "Per-candidate CSV export");
    cmd->add_flag("--no-timing", sel_no_timing, "Omit wall-clock fields from the report JSON");
  }
  select->add_option("--method", sel_method, "Selection method")
      ->check(CLI::IsMember({"fe", "cv"}))
      ->capture_default_str();
  std::string compare_method = "both";
  compare->add_option("--method", compare_method, "Must be 'both'")
      ->check(CLI::IsMember({"both"}))
      ->capture_default_str();
  compare->add_option("--repetitions", sel_reps, "Repetitions with fresh split seeds")
      ->capture_default_str();

  // scatter
  std::string sc_csv;
  std::string sc_x = "explain_cv";
  std::string sc_y = "test_acc";
  std::string sc_out;
  std::string sc_svg;
  std::string sc_method;
  bool sc_gated = false;
  auto* scatter = app.add_subcommand("scatter", "Scatter data + Spearman from a candidate CSV");
  scatter->add_option("--report-csv", sc_csv, "CSV written by select/compare --csv")->required();
  scatter->add_option("--x", sc_x, "x axis")
      ->check(CLI::IsMember({"cv_acc", "explain_cv", "train_acc"}))
      ->capture_default_str();
  scatter->add_option("--y", sc_y, "y axis")->check(CLI::IsMember({"test_acc"}))->capture_default_str();
  scatter->add_option("--out", sc_out, "Scatter CSV")->required();
  scatter->add_option("--svg", sc_svg, "Optional SVG rendering");
  scatter->add_option("--method", sc_method, "Keep rows of one method")
      ->check(CLI::IsMember({"fe", "cv"}));
  scatter->add_flag("--gated-only", sc_gated, "Keep rows that passed the FE gate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fail("Usage", e.what(), kExitUsage);
  }

  try {
    if (fit->parsed()) {
      const Dataset ds = fit_data.load();
      const auto specs = expand_grid(load_grid(fit_grid), fit_data.seed);
      if (fit_index >= specs.size()) {
        throw Error(ErrorKind::InvalidSpec, "--index " + std::to_string(fit_index) +
                                                " exceeds grid size " + std::to_string(specs.size()));
      }
      const SplitPlan split = train_test_split(ds, fit_data.train_fraction, fit_data.seed);
      const FittedModel model = fit_model(ds, split.train_indices, specs[fit_index]);
      if (!fit_dump.empty()) {
        auto out = open_output(fit_dump);
        out << model_to_json(model).dump() << '\n';
      }
      nlohmann::json summary;
      summary["dataset"] = ds.name();
      summary["spec"] = model_spec_to_json(model.spec());
      summary["train_acc"] = accuracy(model, ds, split.train_indices);
      summary["test_acc"] = accuracy(model, ds, split.test_indices);
      summary["used_features"] = model.used_features();
      write_json(summary, fit_out);
    } else if (explain->parsed()) {
      const Dataset ds = explain_data.load();
      const FittedModel model = model_from_json(read_json(explain_model));
      if (model.n_features() != ds.n_features()) {
        throw Error(ErrorKind::DimensionMismatch, "model and dataset feature counts differ");
      }
      IndexList rows;
      if (explain_rows == "all") {
        rows.resize(ds.n_rows());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
      } else {
        const SplitPlan split =
            train_test_split(ds, explain_data.train_fraction, explain_data.seed);
        rows = explain_rows == "train" ? split.train_indices : split.test_indices;
      }
      const WeightMode mode = weight_mode_from_string(explain_mode);
      const auto used = model.used_features();
      std::ofstream file;
      if (!explain_out.empty()) file = open_output(explain_out);
      std::ostream& out = explain_out.empty() ? std::cout : file;
      for (std::size_t idx : rows) {
        const ContributionBreakdown b = contributions(model, ds, idx);
        nlohmann::json line;
        line["instance"] = idx;
        line["target_class"] = b.target_class;
        line["c_full"] = b.c_full;
        line["f_x"] = b.f_x;
        line["contrib"] = nlohmann::json::object();
        for (const auto& [k, v] : b.contrib) line["contrib"][ds.feature_names()[k]] = v;
        try {
          line["explain_cv"] = explain_cv_instance(feature_weights(b, used, mode), used.size());
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NearZeroDenominator && e.kind() != ErrorKind::NoFeaturesUsed) {
            throw;
          }
          line["explain_cv"] = nullptr;
        }
        out << line.dump() << '\n';
      }
    } else if (select->parsed() || compare->parsed()) {
      const Dataset ds = sel_data.load();
      const auto specs = expand_grid(load_grid(sel_grid), sel_data.seed);
      const SelectOptions options =
          make_options(sel_mode, sel_k, sel_gate, sel_workers, sel_data.seed);
      if (select->parsed()) {
        const SplitPlan split = train_test_split(ds, sel_data.train_fraction, sel_data.seed);
        const SelectionReport report = selection_method_from_string(sel_method) ==
                                               SelectionMethod::FeatureExplanation
                                           ? select_by_fe(ds, split, specs, options)
                                           : select_by_cv(ds, split, specs, options);
        write_json(report_to_json(report, !sel_no_timing), sel_out);
        if (!sel_csv.empty()) {
          auto csv = open_output(sel_csv);
          write_candidates_csv(csv, report, 0, true);
        }
      } else {
        const ComparisonRecord record = compare_methods(ds, specs, options, sel_data.seed,
                                                        sel_reps, sel_data.train_fraction);
        write_json(comparison_to_json(record, !sel_no_timing), sel_out);
        std::string csv_path = sel_csv;
        if (csv_path.empty() && !sel_out.empty() && sel_out != "-") {
          csv_path = fs::path(sel_out).replace_extension(".csv").string();
        }
        if (!csv_path.empty()) {
          auto csv = open_output(csv_path);
          write_comparison_csv(csv, record);
        }
      }
    } else if (scatter->parsed()) {
      ScatterFilter filter;
      if (!sc_method.empty()) filter.method = sc_method;
      filter.gated_only = sc_gated;
      std::optional<fs::path> svg;
      if (!sc_svg.empty()) svg = sc_svg;
      const ScatterData data = emit_scatter(sc_csv, sc_x, sc_y, sc_out, filter, svg);
      std::cout << nlohmann::json{{"points", data.points.size()},
                                  {"spearman", data.spearman ? nlohmann::json(*data.spearman)
                                                             : nlohmann::json(nullptr)}}
                       .dump()
                << '\n';
    }
  } catch (const Error& e) {
    const int code = e.category() == ErrorCategory::Data     ? kExitData
                     : e.category() == ErrorCategory::Config ? kExitConfig
                                                             : kExitRuntime;
    return fail(to_string(e.kind()), e.what(), code);
  } catch (const std::exception& e) {
    return fail("Runtime", e.what(), kExitRuntime);
  }
  return 0;
}
