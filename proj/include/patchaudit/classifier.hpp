#pragma once

// Trained-model wrapper, evaluation metrics and the JSON model file.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "patchaudit/features.hpp"
#include "patchaudit/forest.hpp"
#include "patchaudit/softmax.hpp"

namespace patchaudit {

using Classifier = std::variant<RandomForest, SoftmaxProbe>;

const FeatureSchema& schema_of(const Classifier& model);
const std::vector<std::string>& class_names_of(const Classifier& model);
Prediction predict(const Classifier& model, std::span<const double> features);
std::string kind_of(const Classifier& model);  // "random_forest" or "softmax_probe"

/// Rows are true classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 0);
  ConfusionMatrix(std::vector<std::vector<std::uint64_t>> counts);

  void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1);

  std::size_t n_classes() const noexcept { return n_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
  std::uint64_t total() const noexcept;
  std::uint64_t support(std::size_t truth) const;

  double accuracy() const;
  /// Per-class recall; empty for classes with no samples.
  std::optional<double> recall(std::size_t truth) const;
  /// Mean recall over classes that have samples.
  double balanced_accuracy() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> counts_;
};

struct Evaluation {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  std::vector<std::optional<double>> recall;  // per class; reported as per-class accuracy
  std::vector<std::string> warnings;
};

/// Throws ArgumentError when the table schema or class list differs from the model's.
Evaluation evaluate(const Classifier& model, const FeatureTable& table);

/// Versioned JSON model file.
void save_model(const Classifier& model, const std::filesystem::path& path);
Classifier load_model(const std::filesystem::path& path);
std::string serialize_model(const Classifier& model);
Classifier deserialize_model(const std::string& text, const std::string& source = "<model>");

inline constexpr int kModelFormatVersion = 1;

}  // namespace patchaudit
