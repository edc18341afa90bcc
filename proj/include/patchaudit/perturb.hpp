#pragma once

// Robustness protocol: JPEG re-encoding and hue rotation of evaluation images.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "patchaudit/classifier.hpp"
#include "patchaudit/corpus.hpp"
#include "patchaudit/features.hpp"
#include "patchaudit/image.hpp"

namespace patchaudit {

/// Encode to baseline 4:2:0 JPEG at `quality` and decode back.
LabeledImage jpeg_recompress(const LabeledImage& image, int quality);
RgbImage jpeg_recompress(const RgbImage& image, int quality);

/// Rotates the HSV hue of every pixel by delta_degrees on a 0-360 circle,
/// keeping S and V. Grey pixels (S = 0) are left untouched.
LabeledImage hue_shift(const LabeledImage& image, double delta_degrees);
RgbImage hue_shift(const RgbImage& image, double delta_degrees);

struct PerturbationSpec {
  std::vector<int> jpeg_qualities{80, 60, 40, 20};
  std::vector<double> hue_deltas_degrees{-10.0, 10.0, -20.0, 20.0};

  /// Throws ArgumentError for qualities outside [1, 100] or non-finite deltas.
  void validate() const;
};

struct Perturbation {
  enum class Kind { identity, jpeg, hue };
  Kind kind = Kind::identity;
  double amount = 0.0;

  /// "base", "jpeg_q80", "hue_+10", "hue_-20", ...
  std::string id() const;
  RgbImage apply(const RgbImage& image) const;
};

/// Base row first, then JPEG qualities, then hue deltas, in spec order.
std::vector<Perturbation> expand(const PerturbationSpec& spec);

struct RobustnessRow {
  std::string perturbation;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double delta_accuracy = 0.0;  // accuracy - base accuracy
  std::size_t evaluated = 0;
  std::size_t errors = 0;
};

struct RobustnessTable {
  std::vector<RobustnessRow> rows;  // rows[0] is the unperturbed base
  std::vector<std::string> warnings;

  const RobustnessRow& base() const { return rows.front(); }
  const RobustnessRow* find(const std::string& id) const;
};

/// Evaluates `model` on every manifest image after each perturbation,
/// re-featurized with `extractor`. Per-image failures are counted, never fatal.
RobustnessTable robustness_sweep(const Classifier& model, const CorpusManifest& manifest,
                                 const Extractor& extractor, const PerturbationSpec& spec,
                                 std::size_t threads = 0);

/// `perturbation,accuracy,balanced_accuracy,delta_accuracy`
void write_robustness_csv(const RobustnessTable& table, const std::filesystem::path& path);

}  // namespace patchaudit
