#include "treexplain/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "treexplain/error.hpp"
#include "treexplain/kernels.hpp"
#include "treexplain/rng.hpp"

namespace treexplain {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::DecisionTree: return "decision_tree";
    case Family::RandomForest: return "random_forest";
    case Family::ExtraTrees: return "extra_trees";
    case Family::GradientBoosting: return "gradient_boosting";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "decision_tree") return Family::DecisionTree;
  if (name == "random_forest") return Family::RandomForest;
  if (name == "extra_trees") return Family::ExtraTrees;
  if (name == "gradient_boosting") return Family::GradientBoosting;
  throw Error(ErrorKind::InvalidSpec, "unknown model family '" + std::string(name) + "'");
}

ModelSpec ModelSpec::defaults(Family family) {
  ModelSpec spec;
  spec.family = family;
  switch (family) {
    case Family::DecisionTree:
      break;
    case Family::RandomForest:
      spec.n_trees = 50;
      spec.bootstrap = true;
      spec.cart.max_features = MaxFeatures::sqrt();
      break;
    case Family::ExtraTrees:
      spec.n_trees = 50;
      spec.cart.max_features = MaxFeatures::sqrt();
      spec.cart.random_thresholds = true;
      break;
    case Family::GradientBoosting:
      spec.learning_rate = 0.1;
      spec.n_rounds = 50;
      spec.cart.max_depth = 3;
      break;
  }
  return spec;
}

void ModelSpec::validate() const {
  const bool bagged = family == Family::RandomForest || family == Family::ExtraTrees;
  const bool boosted = family == Family::GradientBoosting;
  const std::string name(to_string(family));
  if (bagged != n_trees.has_value()) {
    throw Error(ErrorKind::InvalidSpec, name + ": n_trees is set iff the family is bagged");
  }
  if (boosted != learning_rate.has_value() || boosted != n_rounds.has_value()) {
    throw Error(ErrorKind::InvalidSpec,
                name + ": learning_rate/n_rounds are set iff the family is gradient_boosting");
  }
  if (bagged && *n_trees < 1) throw Error(ErrorKind::InvalidSpec, "n_trees must be >= 1");
  if (boosted) {
    if (!(*learning_rate > 0.0 && *learning_rate <= 1.0)) {
      throw Error(ErrorKind::InvalidSpec, "learning_rate must lie in (0, 1]");
    }
    if (*n_rounds < 1) throw Error(ErrorKind::InvalidSpec, "n_rounds must be >= 1");
  }
  if (bootstrap && !bagged) {
    throw Error(ErrorKind::InvalidSpec, name + ": bootstrap applies to bagged families only");
  }
  if (cart.min_samples_leaf < 1) throw Error(ErrorKind::InvalidSpec, "min_samples_leaf must be >= 1");
  if (cart.max_depth && *cart.max_depth < 1) {
    throw Error(ErrorKind::InvalidSpec, "max_depth must be >= 1");
  }
  if (cart.max_features.kind == MaxFeatures::Kind::Count && cart.max_features.count < 1) {
    throw Error(ErrorKind::InvalidSpec, "max_features must be >= 1");
  }
}

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  nlohmann::json out;
  out["family"] = to_string(spec.family);
  out["cart"] = cart_config_to_json(spec.cart);
  if (spec.n_trees) out["n_trees"] = *spec.n_trees;
  if (spec.learning_rate) out["learning_rate"] = *spec.learning_rate;
  if (spec.n_rounds) out["n_rounds"] = *spec.n_rounds;
  out["bootstrap"] = spec.bootstrap;
  out["seed"] = spec.seed;
  return out;
}

ModelSpec model_spec_from_json(const nlohmann::json& doc) {
  try {
    ModelSpec spec;
    spec.family = family_from_string(doc.at("family").get<std::string>());
    spec.cart = cart_config_from_json(doc.at("cart"));
    if (doc.contains("n_trees")) spec.n_trees = doc.at("n_trees").get<std::size_t>();
    if (doc.contains("learning_rate")) spec.learning_rate = doc.at("learning_rate").get<double>();
    if (doc.contains("n_rounds")) spec.n_rounds = doc.at("n_rounds").get<std::size_t>();
    spec.bootstrap = doc.value("bootstrap", false);
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("model spec JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// FittedModel

FittedModel::FittedModel(ModelSpec spec, std::size_t n_features, std::size_t n_classes,
                         Body body)
    : spec_(std::move(spec)),
      n_features_(n_features),
      n_classes_(n_classes),
      body_(std::move(body)) {
  const auto check_tree = [&](const Tree& tree, std::size_t outputs) {
    if (tree.n_features() != n_features_ || tree.n_outputs() != outputs) {
      throw Error(ErrorKind::DimensionMismatch, "member tree shape does not match the model");
    }
  };
  if (const auto* single = std::get_if<SingleTreeModel>(&body_)) {
    check_tree(single->tree, n_classes_);
  } else if (const auto* forest = std::get_if<ForestModel>(&body_)) {
    if (forest->trees.empty()) throw Error(ErrorKind::InvalidSpec, "forest without trees");
    for (const Tree& tree : forest->trees) check_tree(tree, n_classes_);
  } else {
    const auto& boosted = std::get<BoostedModel>(body_);
    if (boosted.base_scores.size() != n_classes_) {
      throw Error(ErrorKind::DimensionMismatch, "base_scores must have one entry per class");
    }
    for (const auto& stage : boosted.stages) {
      if (stage.size() != n_classes_) {
        throw Error(ErrorKind::DimensionMismatch, "each boosting round needs one tree per class");
      }
      for (const Tree& tree : stage) check_tree(tree, 1);
    }
  }
}

std::vector<std::size_t> FittedModel::used_features() const {
  std::vector<std::size_t> out;
  const auto add = [&](const Tree& tree) {
    const auto used = tree.used_features();
    out.insert(out.end(), used.begin(), used.end());
  };
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, SingleTreeModel>) {
          add(body.tree);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          for (const Tree& tree : body.trees) add(tree);
        } else {
          for (const auto& stage : body.stages) {
            for (const Tree& tree : stage) add(tree);
          }
        }
      },
      body_);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> FittedModel::class_scores(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw Error(ErrorKind::DimensionMismatch,
                "expected " + std::to_string(n_features_) + " features, got " +
                    std::to_string(x.size()));
  }
  std::vector<double> scores(n_classes_, 0.0);
  if (const auto* single = std::get_if<SingleTreeModel>(&body_)) {
    const auto leaf = single->tree.predict_value(x);
    std::copy(leaf.begin(), leaf.end(), scores.begin());
  } else if (const auto* forest = std::get_if<ForestModel>(&body_)) {
    for (const Tree& tree : forest->trees) kernels::scaled_add(scores, 1.0, tree.predict_value(x));
    const auto n_trees = static_cast<double>(forest->trees.size());
    for (double& s : scores) s /= n_trees;
  } else {
    const auto& boosted = std::get<BoostedModel>(body_);
    for (const auto& stage : boosted.stages) {
      for (std::size_t c = 0; c < n_classes_; ++c) scores[c] += stage[c].predict_value(x)[0];
    }
    for (std::size_t c = 0; c < n_classes_; ++c) {
      scores[c] = boosted.base_scores[c] + boosted.learning_rate * scores[c];
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

CartConfig member_config(const ModelSpec& spec, std::size_t member) {
  CartConfig cfg = spec.cart;
  cfg.feature_subsample_seed = derive_seed(spec.seed, Stream::Tree, member);
  if (spec.family == Family::ExtraTrees) cfg.random_thresholds = true;
  return cfg;
}

Tree fit_bagged_member(const Dataset& ds, std::span<const std::size_t> indices,
                       const ModelSpec& spec, std::size_t member) {
  const CartConfig cfg = member_config(spec, member);
  if (!spec.bootstrap) return fit_cart(ds, indices, cfg);
  Rng rng(derive_seed(spec.seed, Stream::Bootstrap, member));
  IndexList sample(indices.size());
  for (auto& idx : sample) idx = indices[uniform_below(rng, indices.size())];
  std::sort(sample.begin(), sample.end());
  return fit_cart(ds, sample, cfg);
}

BoostedModel fit_boosted(const Dataset& ds, std::span<const std::size_t> indices,
                         const ModelSpec& spec) {
  const std::size_t n = indices.size();
  const std::size_t n_classes = ds.n_classes();
  const double lr = *spec.learning_rate;

  BoostedModel model;
  model.learning_rate = lr;
  model.base_scores.assign(n_classes, 0.0);
  std::vector<double> counts(n_classes, 0.0);
  for (std::size_t idx : indices) counts[static_cast<std::size_t>(ds.label(idx))] += 1.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    // Classes missing from the training rows get half a pseudo-count.
    const double count = counts[c] > 0.0 ? counts[c] : 0.5;
    model.base_scores[c] = std::log(count / static_cast<double>(n));
  }

  std::vector<double> margins(n * n_classes);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(model.base_scores.begin(), model.base_scores.end(),
              margins.begin() + static_cast<std::ptrdiff_t>(i * n_classes));
  }
  std::vector<double> probs(n * n_classes);
  std::vector<double> targets(ds.n_rows(), 0.0);
  std::vector<double> residuals(n);
  std::vector<std::size_t> leaf_of(n);
  const double newton_scale = static_cast<double>(n_classes - 1) / static_cast<double>(n_classes);

  for (std::size_t round = 0; round < *spec.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* f = margins.data() + i * n_classes;
      double* p = probs.data() + i * n_classes;
      const double top = *std::max_element(f, f + n_classes);
      double z = 0.0;
      for (std::size_t c = 0; c < n_classes; ++c) {
        p[c] = std::exp(f[c] - top);
        z += p[c];
      }
      for (std::size_t c = 0; c < n_classes; ++c) p[c] /= z;
    }

    std::vector<Tree> stage;
    stage.reserve(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        const double y = static_cast<std::size_t>(ds.label(indices[i])) == c ? 1.0 : 0.0;
        residuals[i] = y - probs[i * n_classes + c];
        targets[indices[i]] = residuals[i];
      }
      CartConfig cfg = member_config(spec, round * n_classes + c);
      cfg.random_thresholds = false;
      Tree tree = fit_cart(ds, indices, cfg, {}, targets);

      // One Newton step per leaf for the multinomial deviance.
      std::vector<double> numerator(tree.nodes().size(), 0.0);
      std::vector<double> denominator(tree.nodes().size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        leaf_of[i] = tree.leaf_index(ds.row(indices[i]));
        const double r = residuals[i];
        numerator[leaf_of[i]] += r;
        denominator[leaf_of[i]] += std::abs(r) * (1.0 - std::abs(r));
      }
      std::vector<double> leaf_values(tree.nodes().size(), 0.0);
      for (std::size_t id = 0; id < leaf_values.size(); ++id) {
        if (tree.nodes()[id].is_leaf() && denominator[id] > 1e-150) {
          leaf_values[id] = newton_scale * numerator[id] / denominator[id];
        }
      }
      tree.set_leaf_values(leaf_values);
      for (std::size_t i = 0; i < n; ++i) {
        margins[i * n_classes + c] += lr * leaf_values[leaf_of[i]];
      }
      stage.push_back(std::move(tree));
    }
    model.stages.push_back(std::move(stage));
  }
  return model;
}

}  // namespace

FittedModel fit_model(const Dataset& ds, std::span<const std::size_t> indices,
                      const ModelSpec& spec) {
  spec.validate();
  if (indices.empty()) throw Error(ErrorKind::EmptyIndexSet, "fit_model: empty index set");
  {
    std::vector<bool> present(ds.n_classes(), false);
    std::size_t distinct = 0;
    for (std::size_t idx : indices) {
      if (idx >= ds.n_rows()) throw Error(ErrorKind::DimensionMismatch, "row index out of range");
      const auto label = static_cast<std::size_t>(ds.label(idx));
      if (!present[label]) {
        present[label] = true;
        ++distinct;
      }
    }
    if (distinct < 2) {
      throw Error(ErrorKind::SingleClassTrainSet, "training rows contain fewer than 2 classes");
    }
  }
  // Resolve max_features early so a bad count surfaces as InvalidSpec here.
  spec.cart.max_features.resolve(ds.n_features());

  const std::size_t d = ds.n_features();
  const std::size_t n_classes = ds.n_classes();
  switch (spec.family) {
    case Family::DecisionTree:
      return FittedModel(spec, d, n_classes,
                         SingleTreeModel{fit_cart(ds, indices, member_config(spec, 0))});
    case Family::RandomForest:
    case Family::ExtraTrees: {
      ForestModel forest;
      forest.trees.reserve(*spec.n_trees);
      for (std::size_t t = 0; t < *spec.n_trees; ++t) {
        forest.trees.push_back(fit_bagged_member(ds, indices, spec, t));
      }
      return FittedModel(spec, d, n_classes, std::move(forest));
    }
    case Family::GradientBoosting:
      return FittedModel(spec, d, n_classes, fit_boosted(ds, indices, spec));
  }
  throw Error(ErrorKind::InvalidSpec, "unknown family");
}

double class_score(const FittedModel& model, std::span<const double> x,
                   std::size_t class_index) {
  if (class_index >= model.n_classes()) {
    throw Error(ErrorKind::BadClass, "class index " + std::to_string(class_index) +
                                         " out of range");
  }
  return model.class_scores(x)[class_index];
}

std::size_t predict_class(const FittedModel& model, std::span<const double> x) {
  const auto scores = model.class_scores(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

double accuracy(const FittedModel& model, const Dataset& ds,
                std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorKind::EmptyIndexSet, "accuracy: empty index set");
  std::size_t correct = 0;
  for (std::size_t idx : indices) {
    if (predict_class(model, ds.row(idx)) == static_cast<std::size_t>(ds.label(idx))) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json model_to_json(const FittedModel& model) {
  nlohmann::json out;
  out["format"] = kModelFormat;
  out["spec"] = model_spec_to_json(model.spec());
  out["n_features"] = model.n_features();
  out["n_classes"] = model.n_classes();
  if (const auto* single = std::get_if<SingleTreeModel>(&model.body())) {
    out["kind"] = "single_tree";
    out["trees"] = nlohmann::json::array({tree_to_json(single->tree)});
  } else if (const auto* forest = std::get_if<ForestModel>(&model.body())) {
    out["kind"] = "forest";
    out["trees"] = nlohmann::json::array();
    for (const Tree& tree : forest->trees) out["trees"].push_back(tree_to_json(tree));
  } else {
    const auto& boosted = std::get<BoostedModel>(model.body());
    out["kind"] = "boosted";
    out["base_scores"] = boosted.base_scores;
    out["learning_rate"] = boosted.learning_rate;
    out["stages"] = nlohmann::json::array();
    for (const auto& stage : boosted.stages) {
      auto round = nlohmann::json::array();
      for (const Tree& tree : stage) round.push_back(tree_to_json(tree));
      out["stages"].push_back(std::move(round));
    }
  }
  return out;
}

FittedModel model_from_json(const nlohmann::json& doc) {
  try {
    const auto format = doc.at("format").get<std::string>();
    if (format != kModelFormat) {
      throw Error(ErrorKind::Parse, "unsupported model format '" + format + "'");
    }
    ModelSpec spec = model_spec_from_json(doc.at("spec"));
    const auto d = doc.at("n_features").get<std::size_t>();
    const auto n_classes = doc.at("n_classes").get<std::size_t>();
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "single_tree") {
      return FittedModel(spec, d, n_classes,
                         SingleTreeModel{tree_from_json(doc.at("trees").at(0))});
    }
    if (kind == "forest") {
      ForestModel forest;
      for (const auto& tree : doc.at("trees")) forest.trees.push_back(tree_from_json(tree));
      return FittedModel(spec, d, n_classes, std::move(forest));
    }
    if (kind == "boosted") {
      BoostedModel boosted;
      boosted.base_scores = doc.at("base_scores").get<std::vector<double>>();
      boosted.learning_rate = doc.at("learning_rate").get<double>();
      for (const auto& round : doc.at("stages")) {
        std::vector<Tree> stage;
        for (const auto& tree : round) stage.push_back(tree_from_json(tree));
        boosted.stages.push_back(std::move(stage));
      }
      return FittedModel(spec, d, n_classes, std::move(boosted));
    }
    throw Error(ErrorKind::Parse, "unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("model JSON: ") + e.what());
  }
}

}  // namespace treexplain
