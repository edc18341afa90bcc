#pragma once

// Detectors for colour signatures, JPEG blockiness and dynamic-range clipping,
// and the corpus-level audit that combines them.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "patchaudit/corpus.hpp"
#include "patchaudit/features.hpp"
#include "patchaudit/image.hpp"

namespace patchaudit {

// ---- colour audit ---------------------------------------------------------

struct ColorAuditEntry {
  std::size_t class_index = 0;
  std::array<double, 3> centroid{};   // mean RGB in [0, 255]
  std::vector<double> mean_histogram;  // 3 x bins frequencies
  std::size_t samples = 0;
};

struct ClassDistance {
  std::size_t a = 0;
  std::size_t b = 0;
  double l1 = 0.0;
};

struct ColorAudit {
  std::vector<ColorAuditEntry> entries;          // train classes with samples, class order
  std::vector<ClassDistance> pairwise;           // a < b, lexicographic
  std::vector<std::optional<double>> train_test_shift;  // per class; empty without a test table
  std::vector<std::string> warnings;
};

/// L1 distance between two histograms of equal length.
double histogram_l1(std::span<const double> a, std::span<const double> b);

/// Tables must be histogram tables over the same classes. Centroids come from
/// `train_means` (a mean-RGB table row-aligned with `train`) when given,
/// otherwise from the bin centres of the average histogram. Classes without
/// rows are left out with a warning.
ColorAudit color_audit(const FeatureTable& train, const FeatureTable* test = nullptr,
                       const FeatureTable* train_means = nullptr);

// ---- blockiness -----------------------------------------------------------

struct BlockinessParts {
  std::uint64_t edge_sum = 0;  // in luminance x 1000 units
  std::uint64_t edge_pairs = 0;
  std::uint64_t interior_sum = 0;
  std::uint64_t interior_pairs = 0;

  double edge_mean() const;
  double interior_mean() const;
  /// edge_mean / (interior_mean + 1e-6), or 0 when there is no gradient.
  double score() const;
};

/// Luminance gradients split into grid-boundary pairs (x % grid == grid - 1
/// horizontally, same for y vertically) and all other adjacent pairs.
/// Throws ArgumentError when grid is 0 or a side is shorter than 2 * grid.
BlockinessParts blockiness_parts(const RgbImage& image, std::size_t grid = 8);
double blockiness(const RgbImage& image, std::size_t grid = 8);

enum class QualityBand { severe, moderate, minor, none };

std::string_view to_string(QualityBand band) noexcept;

struct CalibrationSettings {
  std::size_t images_per_level = 24;
  std::size_t width = 128;
  std::size_t height = 128;
  std::array<std::uint8_t, 3> mean{170, 120, 150};
  double noise_sigma = 8.0;
  std::uint64_t seed = 0;
};

/// Blockiness scores of the calibration corpus at one JPEG quality
/// (std::nullopt = lossless), in generation order.
std::vector<double> calibration_scores(std::optional<int> quality, const CalibrationSettings& settings = {},
                                       std::size_t threads = 0);

struct QualityCalibration {
  CalibrationSettings settings;
  std::array<int, 3> qualities{30, 60, 85};
  std::array<double, 3> medians{};  // at each quality
  double lossless_median = 0.0;
  // severe >= boundaries[0] > moderate >= boundaries[1] > minor >= boundaries[2] > none
  std::array<double, 3> boundaries{};

  QualityBand band(double score) const;
};

/// Boundaries are the midpoints between consecutive medians at qualities
/// 30, 60, 85 and, for the last one, the lossless median. Throws
/// std::runtime_error when the medians are not strictly decreasing.
QualityCalibration calibrate_quality_bands(const CalibrationSettings& settings = {}, std::size_t threads = 0);

/// Computed on first use and shared afterwards.
const QualityCalibration& default_quality_calibration();

QualityBand quality_band(const RgbImage& image);
QualityBand quality_band(const RgbImage& image, const QualityCalibration& calibration);

// ---- clipping -------------------------------------------------------------

struct ClippingStats {
  std::array<double, 3> at_zero{};
  std::array<double, 3> at_max{};
  bool corrupted = false;
};

/// Exact per-channel fractions of 0 and 255 values; corrupted when any
/// channel's at-255 fraction reaches the threshold.
ClippingStats clipping_stats(const RgbImage& image, double saturation_threshold = 0.05);

// ---- corpus audit ---------------------------------------------------------

struct ScoreSummary {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double iqr() const { return q3 - q1; }
};

/// Quartiles with linear interpolation between order statistics.
ScoreSummary summarize(std::vector<double> values);

/// Quantile p in [0, 1] of sorted values, linear interpolation.
double quantile_sorted(std::span<const double> sorted, double p);

struct ImageAudit {
  std::string path;
  std::size_t label = 0;
  Split split = Split::train;
  std::array<double, 3> mean_rgb{};
  std::optional<double> blockiness;  // absent when the image is smaller than two grid cells
  std::optional<QualityBand> band;
  ClippingStats clipping;
};

struct ClassAudit {
  std::size_t class_index = 0;
  Split split = Split::train;
  std::size_t images = 0;
  ScoreSummary blockiness;  // over images with a score
  std::array<std::size_t, 4> band_counts{};  // severe, moderate, minor, none
  std::size_t clipped = 0;
  double blue_tail_mass = 0.0;  // mean fraction of blue mass in the top bin
  std::vector<double> mean_histogram;
};

struct AuditOptions {
  std::size_t bins = 16;
  std::size_t grid = 8;
  double saturation_threshold = 0.05;
  LoadOptions load;
  const QualityCalibration* calibration = nullptr;  // default calibration when null
};

struct AuditReport {
  std::vector<std::string> class_names;
  std::size_t bins = 16;
  std::size_t grid = 8;
  double saturation_threshold = 0.05;
  QualityCalibration calibration;
  std::vector<ImageAudit> images;      // manifest order, train then test
  std::vector<ClassAudit> train;       // one per class
  std::vector<ClassAudit> test;        // empty without a test manifest
  ColorAudit color;                    // train classes, shift against test
  ColorAudit test_color;               // test classes alone
  std::vector<std::string> warnings;
};

/// Decodes each image once and runs every detector on it. Undecodable images
/// are skipped with a warning unless options.load.strict is set. The test
/// manifest must share the train class list.
AuditReport audit_corpus(const CorpusManifest& train, const CorpusManifest* test = nullptr,
                         const AuditOptions& options = {});

/// JSON report; byte-stable for equal inputs.
std::string audit_report_json(const AuditReport& report);

/// `class,channel,bin,frequency` rows for each split's average histograms.
std::string histogram_csv(const AuditReport& report, Split split);

/// Per-image `path,class,split,mean_r,mean_g,mean_b,blockiness,band,blue_at_255,corrupted`.
std::string image_audit_csv(const AuditReport& report);

}  // namespace patchaudit
