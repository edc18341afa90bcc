#include "patchaudit/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "patchaudit/error.hpp"

namespace patchaudit {

std::vector<double> softmax_probabilities(std::span<const double> weights, std::span<const double> x,
                                          std::size_t n_classes) {
  const std::size_t cols = x.size();
  std::vector<double> z(n_classes, 0.0);
  for (std::size_t k = 0; k < n_classes; ++k) {
    double dot = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      dot += weights[k * cols + j] * x[j];
    }
    z[k] = dot;
  }
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : z) {
    v /= total;
  }
  return z;
}

LossAndGradient softmax_objective(std::span<const double> weights, const Design& design,
                                  std::size_t n_classes, double l2) {
  const std::size_t cols = design.cols;
  LossAndGradient out;
  out.gradient.assign(n_classes * cols, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < design.rows; ++i) {
    const std::span<const double> x(design.values.data() + i * cols, cols);
    const std::vector<double> p = softmax_probabilities(weights, x, n_classes);
    const std::size_t y = design.labels[i];
    loss -= std::log(std::max(p[y], 1e-300));
    for (std::size_t k = 0; k < n_classes; ++k) {
      const double residual = p[k] - (k == y ? 1.0 : 0.0);
      double* g = out.gradient.data() + k * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        g[j] += residual * x[j];
      }
    }
  }
  const auto n = static_cast<double>(design.rows);
  loss /= n;
  for (double& g : out.gradient) {
    g /= n;
  }
  double penalty = 0.0;
  for (std::size_t k = 0; k < n_classes; ++k) {
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      const double w = weights[k * cols + j];
      penalty += w * w;
      out.gradient[k * cols + j] += l2 * w;
    }
  }
  out.loss = loss + 0.5 * l2 * penalty;
  return out;
}

namespace {

std::vector<double> standardized(std::span<const double> x, const SoftmaxProbe& probe) {
  std::vector<double> out(x.size() + 1);
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = (x[j] - probe.feature_offset[j]) / probe.feature_scale[j];
  }
  out.back() = 1.0;
  return out;
}

}  // namespace

Prediction SoftmaxProbe::predict(std::span<const double> features) const {
  if (features.size() != schema.dimension) {
    throw ArgumentError("feature vector has " + std::to_string(features.size()) + " values, model " +
                        schema.name() + " expects " + std::to_string(schema.dimension));
  }
  const std::vector<double> x = standardized(features, *this);
  Prediction out;
  out.probabilities = softmax_probabilities(weights, x, n_classes());
  out.label = argmax_lowest(out.probabilities);
  return out;
}

SoftmaxProbe train_softmax(const FeatureTable& table, const SoftmaxParams& params) {
  table.validate();
  if (table.rows.empty()) {
    throw ArgumentError("cannot train a probe on an empty table");
  }
  if (table.class_names.size() < 2) {
    throw ArgumentError("a softmax probe needs at least two classes");
  }
  if (!(params.learning_rate > 0.0) || !(params.l2 >= 0.0)) {
    throw ArgumentError("learning rate must be positive and L2 strength non-negative");
  }
  const std::size_t dimension = table.schema.dimension;
  const std::size_t n_classes = table.class_names.size();
  SoftmaxProbe probe{table.schema, table.class_names, params, std::vector<double>(dimension, 0.0),
                     std::vector<double>(dimension, 1.0), {}, 0, 0.0};
  if (params.standardize) {
    const auto n = static_cast<double>(table.rows.size());
    for (std::size_t j = 0; j < dimension; ++j) {
      double mean = 0.0;
      for (const auto& row : table.rows) {
        mean += row.values[j];
      }
      mean /= n;
      double var = 0.0;
      for (const auto& row : table.rows) {
        var += (row.values[j] - mean) * (row.values[j] - mean);
      }
      const double sd = std::sqrt(var / n);
      probe.feature_offset[j] = mean;
      probe.feature_scale[j] = sd > 1e-12 ? sd : 1.0;
    }
  }
  Design design;
  design.rows = table.rows.size();
  design.cols = dimension + 1;
  design.values.reserve(design.rows * design.cols);
  for (const auto& row : table.rows) {
    const std::vector<double> x = standardized(row.values, probe);
    design.values.insert(design.values.end(), x.begin(), x.end());
    design.labels.push_back(row.label);
  }

  std::vector<double> weights(n_classes * design.cols, 0.0);
  LossAndGradient current = softmax_objective(weights, design, n_classes, params.l2);
  double rate = params.learning_rate;
  std::size_t epoch = 0;
  for (; epoch < params.epochs; ++epoch) {
    double grad_norm = 0.0;
    for (double g : current.gradient) {
      grad_norm += g * g;
    }
    if (std::sqrt(grad_norm) < 1e-12) {
      break;
    }
    bool accepted = false;
    bool converged = false;
    double smallest_rise = std::numeric_limits<double>::infinity();
    for (int halvings = 0; halvings <= 10; ++halvings) {
      std::vector<double> trial(weights.size());
      for (std::size_t i = 0; i < weights.size(); ++i) {
        trial[i] = weights[i] - rate * current.gradient[i];
      }
      LossAndGradient next = softmax_objective(trial, design, n_classes, params.l2);
      if (!std::isfinite(next.loss)) {
        throw std::runtime_error("softmax training produced a non-finite loss at epoch " +
                                 std::to_string(epoch));
      }
      if (next.loss <= current.loss) {
        converged = current.loss - next.loss <= params.tolerance * std::max(1.0, current.loss);
        weights = std::move(trial);
        current = std::move(next);
        accepted = true;
        break;
      }
      smallest_rise = std::min(smallest_rise, next.loss - current.loss);
      rate /= 2.0;
    }
    // A rise within rounding of the loss means the optimum has been reached.
    if (!accepted && smallest_rise <= 1e-14 * std::max(1.0, current.loss)) {
      break;
    }
    if (!accepted) {
      throw std::runtime_error("softmax loss failed to decrease at epoch " + std::to_string(epoch) +
                               " after 10 learning-rate halvings");
    }
    if (converged) {
      ++epoch;
      break;
    }
  }
  probe.weights = std::move(weights);
  probe.epochs_run = epoch;
  probe.final_loss = current.loss;
  return probe;
}

}  // namespace patchaudit
