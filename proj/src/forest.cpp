#include "patchaudit/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "patchaudit/error.hpp"
#include "patchaudit/parallel.hpp"

namespace patchaudit {

std::size_t DecisionTree::find_leaf(std::span<const double> x) const {
  std::size_t node = 0;
  while (feature[node] >= 0) {
    node = x[static_cast<std::size_t>(feature[node])] <= threshold[node] ? left[node] : right[node];
  }
  return node;
}

std::vector<double> DecisionTree::leaf_distribution(std::size_t node, std::size_t n_classes) const {
  std::vector<double> dist(n_classes, 0.0);
  std::uint64_t total = 0;
  for (std::uint32_t i = leaf_begin[node]; i < leaf_begin[node + 1]; ++i) {
    total += leaf_count[i];
  }
  for (std::uint32_t i = leaf_begin[node]; i < leaf_begin[node + 1]; ++i) {
    dist[leaf_class[i]] = static_cast<double>(leaf_count[i]) / static_cast<double>(total);
  }
  return dist;
}

std::size_t DecisionTree::depth() const {
  if (feature.empty()) {
    return 0;
  }
  std::vector<std::size_t> depth_of(feature.size(), 0);
  std::size_t deepest = 0;
  // Children always have larger ids than their parent.
  for (std::size_t node = 0; node < feature.size(); ++node) {
    deepest = std::max(deepest, depth_of[node]);
    if (feature[node] >= 0) {
      depth_of[left[node]] = depth_of[node] + 1;
      depth_of[right[node]] = depth_of[node] + 1;
    }
  }
  return deepest;
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

Prediction RandomForest::predict(std::span<const double> features) const {
  if (features.size() != schema.dimension) {
    throw ArgumentError("feature vector has " + std::to_string(features.size()) + " values, model " +
                        schema.name() + " expects " + std::to_string(schema.dimension));
  }
  Prediction out;
  out.probabilities.assign(n_classes(), 0.0);
  for (const auto& tree : trees) {
    const std::size_t leaf = tree.find_leaf(features);
    std::uint64_t total = 0;
    for (std::uint32_t i = tree.leaf_begin[leaf]; i < tree.leaf_begin[leaf + 1]; ++i) {
      total += tree.leaf_count[i];
    }
    for (std::uint32_t i = tree.leaf_begin[leaf]; i < tree.leaf_begin[leaf + 1]; ++i) {
      out.probabilities[tree.leaf_class[i]] +=
          static_cast<double>(tree.leaf_count[i]) / static_cast<double>(total);
    }
  }
  const auto n_trees = static_cast<double>(trees.size());
  for (double& p : out.probabilities) {
    p /= n_trees;
  }
  out.label = argmax_lowest(out.probabilities);
  return out;
}

std::size_t default_features_per_split(std::size_t dimension) {
  const auto k = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(dimension))));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(dimension, 1));
}

namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sum_k left_k^2 / n_left + sum_k right_k^2 / n_right; larger is purer
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureTable& table, std::span<const double> matrix, const ForestParams& params,
              std::size_t mtry, std::uint64_t seed)
      : table_(table),
        matrix_(matrix),
        params_(params),
        dimension_(table.schema.dimension),
        n_classes_(table.class_names.size()),
        mtry_(mtry),
        rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = table_.rows.size();
    std::vector<std::uint32_t> samples(n);
    if (params_.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : samples) {
        s = static_cast<std::uint32_t>(pick(rng_));
      }
    } else {
      std::iota(samples.begin(), samples.end(), 0U);
    }
    samples_ = std::move(samples);
    feature_order_.resize(dimension_);
    left_counts_.resize(n_classes_);
    grow(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  double value(std::uint32_t sample, std::size_t feature) const {
    return matrix_[static_cast<std::size_t>(sample) * dimension_ + feature];
  }

  std::size_t label(std::uint32_t sample) const { return table_.rows[sample].label; }

  std::uint32_t new_node() {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(0);
    tree_.right.push_back(0);
    tree_.leaf_begin.push_back(tree_.leaf_begin.back());
    return static_cast<std::uint32_t>(tree_.feature.size() - 1);
  }

  void make_leaf(std::uint32_t node, const std::vector<std::uint64_t>& counts) {
    // Leaves are created in id order, so the leaf's pairs extend the tail.
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] > 0) {
        tree_.leaf_class.push_back(static_cast<std::uint32_t>(k));
        tree_.leaf_count.push_back(static_cast<std::uint32_t>(counts[k]));
      }
    }
    tree_.leaf_begin[node + 1] = static_cast<std::uint32_t>(tree_.leaf_class.size());
  }

  std::uint32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const std::uint32_t node = new_node();
    std::vector<std::uint64_t> counts(n_classes_, 0);
    for (std::size_t i = begin; i < end; ++i) {
      ++counts[label(samples_[i])];
    }
    const std::size_t m = end - begin;
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    const bool depth_limited = params_.max_depth != 0 && depth >= params_.max_depth;
    if (pure || depth_limited || m < 2 * params_.min_samples_leaf) {
      make_leaf(node, counts);
      return node;
    }
    const Split split = find_split(begin, end, counts);
    if (split.feature < 0) {
      make_leaf(node, counts);
      return node;
    }
    const auto f = static_cast<std::size_t>(split.feature);
    const auto middle = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                              [&](std::uint32_t s) { return value(s, f) <= split.threshold; });
    const auto mid = static_cast<std::size_t>(middle - samples_.begin());
    // Leaf ranges must stay contiguous in id order: an internal node owns none.
    tree_.leaf_begin[node + 1] = static_cast<std::uint32_t>(tree_.leaf_class.size());
    tree_.feature[node] = split.feature;
    tree_.threshold[node] = split.threshold;
    const std::uint32_t l = grow(begin, mid, depth + 1);
    const std::uint32_t r = grow(mid, end, depth + 1);
    tree_.left[node] = l;
    tree_.right[node] = r;
    return node;
  }

  // Visits features in random order and stops after mtry features that are
  // not constant on this node (all features when fewer vary).
  Split find_split(std::size_t begin, std::size_t end, const std::vector<std::uint64_t>& counts) {
    std::iota(feature_order_.begin(), feature_order_.end(), 0U);
    const std::size_t m = end - begin;
    Split best;
    bool found = false;
    std::size_t evaluated = 0;
    for (std::size_t i = 0; i < dimension_ && evaluated < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, dimension_ - 1);
      std::swap(feature_order_[i], feature_order_[pick(rng_)]);
      const std::size_t f = feature_order_[i];
      column_.clear();
      for (std::size_t s = begin; s < end; ++s) {
        column_.emplace_back(value(samples_[s], f), static_cast<std::uint32_t>(label(samples_[s])));
      }
      std::sort(column_.begin(), column_.end());
      if (column_.front().first == column_.back().first) {
        continue;
      }
      ++evaluated;
      std::fill(left_counts_.begin(), left_counts_.end(), 0);
      double left_sq = 0.0;
      double right_sq = 0.0;
      for (auto c : counts) {
        right_sq += static_cast<double>(c) * static_cast<double>(c);
      }
      for (std::size_t j = 1; j < m; ++j) {
        const std::uint32_t k = column_[j - 1].second;
        const auto lk = static_cast<double>(left_counts_[k]);
        const auto rk = static_cast<double>(counts[k] - left_counts_[k]);
        left_sq += 2.0 * lk + 1.0;
        right_sq -= 2.0 * rk - 1.0;
        ++left_counts_[k];
        if (column_[j - 1].first == column_[j].first) {
          continue;
        }
        if (j < params_.min_samples_leaf || m - j < params_.min_samples_leaf) {
          continue;
        }
        const double score = left_sq / static_cast<double>(j) + right_sq / static_cast<double>(m - j);
        if (!found || score > best.score) {
          const double lo = column_[j - 1].first;
          const double hi = column_[j].first;
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) {
            threshold = lo;
          }
          best = {static_cast<std::int32_t>(f), threshold, score};
          found = true;
        }
      }
    }
    return best;
  }

  const FeatureTable& table_;
  std::span<const double> matrix_;
  const ForestParams& params_;
  std::size_t dimension_;
  std::size_t n_classes_;
  std::size_t mtry_;
  std::mt19937_64 rng_;
  std::vector<std::uint32_t> samples_;
  std::vector<std::uint32_t> feature_order_;
  std::vector<std::uint64_t> left_counts_;
  std::vector<std::pair<double, std::uint32_t>> column_;
  DecisionTree tree_;
};

}  // namespace

RandomForest train_forest(const FeatureTable& table, const ForestParams& params, std::size_t threads) {
  table.validate();
  if (table.rows.empty()) {
    throw ArgumentError("cannot train a forest on an empty table");
  }
  if (params.n_trees == 0) {
    throw ArgumentError("forest needs at least one tree");
  }
  if (params.min_samples_leaf == 0) {
    throw ArgumentError("min_samples_leaf must be at least 1");
  }
  if (table.rows.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("too many training rows");
  }
  const std::size_t first_label = table.rows.front().label;
  if (std::all_of(table.rows.begin(), table.rows.end(),
                  [&](const FeatureRow& r) { return r.label == first_label; })) {
    throw ArgumentError("training rows carry a single class; a forest needs at least two");
  }
  const std::size_t dimension = table.schema.dimension;
  std::vector<double> matrix;
  matrix.reserve(table.rows.size() * dimension);
  for (const auto& row : table.rows) {
    matrix.insert(matrix.end(), row.values.begin(), row.values.end());
  }
  const std::size_t mtry = params.features_per_split == 0
                               ? default_features_per_split(dimension)
                               : std::min(params.features_per_split, dimension);
  RandomForest forest{table.schema, table.class_names, params, std::vector<DecisionTree>(params.n_trees)};
  parallel_for(params.n_trees, threads, [&](std::size_t t) {
    TreeBuilder builder(table, matrix, params, mtry, derive_seed(params.seed, t, 1));
    forest.trees[t] = builder.build();
  });
  return forest;
}

}  // namespace patchaudit
