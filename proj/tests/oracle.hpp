#pragma once

// Brute-force attribution oracle for tests. Works on the JSON dump of a model
// so it shares no traversal code with the library: re-walks every tree from
// the root, accumulating value deltas on the splitting feature.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace oracle {

struct Breakdown {
  std::size_t target = 0;
  double c_full = 0.0;
  double f_x = 0.0;
  std::map<std::size_t, double> contrib;
};

struct TreeWalk {
  double root = 0.0;
  double leaf = 0.0;
  std::map<std::size_t, double> deltas;
};

inline TreeWalk walk(const nlohmann::json& tree, std::span<const double> x, std::size_t output) {
  TreeWalk out;
  const nlohmann::json* node = &tree.at("root");
  out.root = node->at("value").at(output).get<double>();
  while (node->at("kind") == "internal") {
    const auto feature = node->at("feature").get<std::size_t>();
    const double threshold = node->at("threshold").get<double>();
    const nlohmann::json* child = x[feature] <= threshold ? &node->at("left") : &node->at("right");
    out.deltas[feature] +=
        child->at("value").at(output).get<double>() - node->at("value").at(output).get<double>();
    node = child;
  }
  out.leaf = node->at("value").at(output).get<double>();
  return out;
}

// Score of class c, computed by walking the JSON.
inline double score(const nlohmann::json& model, std::span<const double> x, std::size_t c) {
  const std::string kind = model.at("kind");
  if (kind == "boosted") {
    double sum = 0.0;
    for (const auto& stage : model.at("stages")) sum += walk(stage.at(c), x, 0).leaf;
    return model.at("base_scores").at(c).get<double>() +
           model.at("learning_rate").get<double>() * sum;
  }
  double sum = 0.0;
  for (const auto& tree : model.at("trees")) sum += walk(tree, x, c).leaf;
  return sum / static_cast<double>(model.at("trees").size());
}

inline Breakdown breakdown(const nlohmann::json& model, std::span<const double> x) {
  const auto n_classes = model.at("n_classes").get<std::size_t>();
  Breakdown out;
  double best = score(model, x, 0);
  for (std::size_t c = 1; c < n_classes; ++c) {
    const double s = score(model, x, c);
    if (s > best) {
      best = s;
      out.target = c;
    }
  }
  const std::size_t c = out.target;
  const std::string kind = model.at("kind");
  if (kind == "boosted") {
    const double lr = model.at("learning_rate").get<double>();
    double roots = 0.0;
    double leaves = 0.0;
    for (const auto& stage : model.at("stages")) {
      const TreeWalk w = walk(stage.at(c), x, 0);
      roots += w.root;
      leaves += w.leaf;
      for (const auto& [k, v] : w.deltas) out.contrib[k] += lr * v;
    }
    const double base = model.at("base_scores").at(c).get<double>();
    out.c_full = base + lr * roots;
    out.f_x = base + lr * leaves;
    return out;
  }
  const auto n_trees = static_cast<double>(model.at("trees").size());
  for (const auto& tree : model.at("trees")) {
    const TreeWalk w = walk(tree, x, c);
    out.c_full += w.root;
    out.f_x += w.leaf;
    for (const auto& [k, v] : w.deltas) out.contrib[k] += v;
  }
  out.c_full /= n_trees;
  out.f_x /= n_trees;
  for (auto& [k, v] : out.contrib) v /= n_trees;
  return out;
}

inline void collect_features(const nlohmann::json& node, std::set<std::size_t>& out) {
  if (node.at("kind") != "internal") return;
  out.insert(node.at("feature").get<std::size_t>());
  collect_features(node.at("left"), out);
  collect_features(node.at("right"), out);
}

inline std::set<std::size_t> used_features(const nlohmann::json& model) {
  std::set<std::size_t> out;
  if (model.at("kind") == "boosted") {
    for (const auto& stage : model.at("stages")) {
      for (const auto& tree : stage) collect_features(tree.at("root"), out);
    }
  } else {
    for (const auto& tree : model.at("trees")) collect_features(tree.at("root"), out);
  }
  return out;
}

// Literal per-instance feature-explanation value: sum_k ((c_full + contrib_k) / f_x - 1/K)^2.
inline double explain_cv_literal(const Breakdown& b, const std::set<std::size_t>& used) {
  const double inv_k = 1.0 / static_cast<double>(used.size());
  double total = 0.0;
  for (std::size_t k : used) {
    const auto it = b.contrib.find(k);
    const double contrib = it == b.contrib.end() ? 0.0 : it->second;
    const double w = (b.c_full + contrib) / b.f_x;
    total += (w - inv_k) * (w - inv_k);
  }
  return total;
}

}  // namespace oracle
