#pragma once

// Multinomial logistic regression probe trained by full-batch gradient descent.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchaudit/features.hpp"
#include "patchaudit/forest.hpp"

namespace patchaudit {

struct SoftmaxParams {
  double learning_rate = 0.5;
  std::size_t epochs = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 0;  // recorded; initialization is all zeros
  bool standardize = true;
  double tolerance = 1e-10;  // stop when the relative loss decrease falls below this

  friend bool operator==(const SoftmaxParams&, const SoftmaxParams&) = default;
};

struct SoftmaxProbe {
  FeatureSchema schema;
  std::vector<std::string> class_names;
  SoftmaxParams params;
  // Inputs are mapped to (x - offset) / scale before the linear layer.
  std::vector<double> feature_offset;
  std::vector<double> feature_scale;
  // n_classes x (D + 1), row-major; the last column is the bias.
  std::vector<double> weights;
  std::size_t epochs_run = 0;
  double final_loss = 0.0;

  std::size_t n_classes() const noexcept { return class_names.size(); }
  Prediction predict(std::span<const double> features) const;

  friend bool operator==(const SoftmaxProbe&, const SoftmaxProbe&) = default;
};

/// Design matrix in the probe's input space: one row of D + 1 values per
/// sample, last entry 1.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;  // D + 1
  std::vector<double> values;
  std::vector<std::size_t> labels;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as the weights
};

/// Mean cross-entropy plus (l2 / 2) * ||W without bias column||^2, and its
/// gradient with respect to W.
LossAndGradient softmax_objective(std::span<const double> weights, const Design& design,
                                  std::size_t n_classes, double l2);

/// Numerically stable softmax of W * x for one augmented input.
std::vector<double> softmax_probabilities(std::span<const double> weights, std::span<const double> x,
                                          std::size_t n_classes);

/// Throws ArgumentError for fewer than two classes or an empty table and
/// std::runtime_error when the loss turns non-finite (message names the
/// epoch) or refuses to decrease after ten learning-rate halvings.
SoftmaxProbe train_softmax(const FeatureTable& table, const SoftmaxParams& params);

}  // namespace patchaudit
