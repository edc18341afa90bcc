#include <numeric>

#include "patchaudit/classifier.hpp"
#include "patchaudit/error.hpp"

namespace patchaudit {

const FeatureSchema& schema_of(const Classifier& model) {
  return std::visit([](const auto& m) -> const FeatureSchema& { return m.schema; }, model);
}

const std::vector<std::string>& class_names_of(const Classifier& model) {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.class_names; }, model);
}

Prediction predict(const Classifier& model, std::span<const double> features) {
  return std::visit([&](const auto& m) { return m.predict(features); }, model);
}

std::string kind_of(const Classifier& model) {
  return std::holds_alternative<RandomForest>(model) ? "random_forest" : "softmax_probe";
}

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {}

ConfusionMatrix::ConfusionMatrix(std::vector<std::vector<std::uint64_t>> counts)
    : ConfusionMatrix(counts.size()) {
  for (std::size_t t = 0; t < n_; ++t) {
    if (counts[t].size() != n_) {
      throw ArgumentError("confusion matrix must be square");
    }
    for (std::size_t p = 0; p < n_; ++p) {
      counts_[t * n_ + p] = counts[t][p];
    }
  }
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t count) {
  if (truth >= n_ || predicted >= n_) {
    throw ArgumentError("class index outside the confusion matrix");
  }
  counts_[truth * n_ + predicted] += count;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::support(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < n_; ++p) {
    s += at(truth, p);
  }
  return s;
}

double ConfusionMatrix::accuracy() const {
  const std::uint64_t n = total();
  if (n == 0) {
    return 0.0;
  }
  std::uint64_t trace = 0;
  for (std::size_t k = 0; k < n_; ++k) {
    trace += at(k, k);
  }
  return static_cast<double>(trace) / static_cast<double>(n);
}

std::optional<double> ConfusionMatrix::recall(std::size_t truth) const {
  const std::uint64_t s = support(truth);
  if (s == 0) {
    return std::nullopt;
  }
  return static_cast<double>(at(truth, truth)) / static_cast<double>(s);
}

double ConfusionMatrix::balanced_accuracy() const {
  // Extended precision keeps hand-checkable cases exact, e.g. (0.9 + 0.8) / 2.
  long double sum = 0.0L;
  std::size_t present = 0;
  for (std::size_t k = 0; k < n_; ++k) {
    if (support(k) > 0) {
      sum += static_cast<long double>(at(k, k)) / static_cast<long double>(support(k));
      ++present;
    }
  }
  return present == 0 ? 0.0 : static_cast<double>(sum / static_cast<long double>(present));
}

Evaluation evaluate(const Classifier& model, const FeatureTable& table) {
  const FeatureSchema& schema = schema_of(model);
  if (!(schema == table.schema)) {
    throw ArgumentError("feature schema " + table.schema.name() + " does not match model schema " +
                        schema.name());
  }
  const auto& names = class_names_of(model);
  if (names != table.class_names) {
    throw ArgumentError("feature table classes [" + format_class_list(table.class_names) +
                        "] do not match model classes [" + format_class_list(names) + "]");
  }
  table.validate();
  Evaluation out{ConfusionMatrix(names.size()), 0.0, 0.0, {}, {}};
  for (const auto& row : table.rows) {
    out.confusion.add(row.label, predict(model, row.values).label);
  }
  out.accuracy = out.confusion.accuracy();
  out.balanced_accuracy = out.confusion.balanced_accuracy();
  for (std::size_t k = 0; k < names.size(); ++k) {
    out.recall.push_back(out.confusion.recall(k));
    if (!out.recall.back()) {
      out.warnings.push_back("class '" + names[k] + "' has no evaluation samples; excluded from balanced accuracy");
    }
  }
  return out;
}

}  // namespace patchaudit
