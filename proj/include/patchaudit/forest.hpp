#pragma once

// Random forest of Gini-split decision trees.
//
// Randomness: tree t draws from std::mt19937_64 seeded with
// derive_seed(master_seed, t, /*salt=*/1) (see parallel.hpp). The bootstrap
// sample is n draws of std::uniform_int_distribution<std::size_t>(0, n-1);
// feature order at each node is a Fisher-Yates shuffle from the same
// generator. Trees are built independently and stored by index, so results
// do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchaudit/features.hpp"

namespace patchaudit {

struct ForestParams {
  std::size_t n_trees = 200;
  std::size_t max_depth = 0;           // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = round(sqrt(D))
  bool bootstrap = true;
  std::uint64_t seed = 0;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// One tree, stored as parallel arrays indexed by node id (root = 0).
/// Internal nodes send x[feature] <= threshold to `left`. Leaves have
/// feature == -1 and own the (class, count) pairs in
/// [leaf_begin[node], leaf_begin[node + 1]).
struct DecisionTree {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
  std::vector<std::uint32_t> leaf_begin{0};
  std::vector<std::uint32_t> leaf_class;
  std::vector<std::uint32_t> leaf_count;

  std::size_t node_count() const noexcept { return feature.size(); }
  bool is_leaf(std::size_t node) const noexcept { return feature[node] < 0; }
  std::size_t find_leaf(std::span<const double> x) const;
  /// Class frequencies at a leaf; sums to 1.
  std::vector<double> leaf_distribution(std::size_t node, std::size_t n_classes) const;
  std::size_t depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;
};

/// Index of the largest entry, ties to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

struct RandomForest {
  FeatureSchema schema;
  std::vector<std::string> class_names;
  ForestParams params;
  std::vector<DecisionTree> trees;

  std::size_t n_classes() const noexcept { return class_names.size(); }
  /// Mean of the leaf distributions; throws ArgumentError on a dimension mismatch.
  Prediction predict(std::span<const double> features) const;

  friend bool operator==(const RandomForest&, const RandomForest&) = default;
};

/// Features sampled per split when params.features_per_split == 0.
std::size_t default_features_per_split(std::size_t dimension);

/// Trains on every row of `table`. Requires at least two distinct labels.
RandomForest train_forest(const FeatureTable& table, const ForestParams& params, std::size_t threads = 0);

}  // namespace patchaudit
