#include "patchaudit/forensics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "patchaudit/error.hpp"
#include "patchaudit/kernels.hpp"
#include "patchaudit/parallel.hpp"
#include "patchaudit/synth.hpp"

namespace patchaudit {

namespace {

constexpr double kEpsilon = 1e-6;

void check_histogram_table(const FeatureTable& table, const char* what) {
  if (table.schema.kind != FeatureSchema::Kind::histogram) {
    throw ArgumentError(std::string(what) + " table must hold histogram features, got " + table.schema.name());
  }
  table.validate();
}

// Per-class average histograms; std::nullopt for classes without rows.
std::vector<std::optional<std::vector<double>>> class_means(const FeatureTable& table,
                                                            std::vector<std::size_t>& counts) {
  const std::size_t k = table.class_names.size();
  std::vector<std::vector<double>> sums(k, std::vector<double>(table.schema.dimension, 0.0));
  counts.assign(k, 0);
  for (const auto& row : table.rows) {
    auto& sum = sums[row.label];
    for (std::size_t d = 0; d < row.values.size(); ++d) {
      sum[d] += row.values[d];
    }
    ++counts[row.label];
  }
  std::vector<std::optional<std::vector<double>>> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      continue;
    }
    for (double& v : sums[c]) {
      v /= static_cast<double>(counts[c]);
    }
    out[c] = std::move(sums[c]);
  }
  return out;
}

}  // namespace

double histogram_l1(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ArgumentError("histograms differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::abs(a[i] - b[i]);
  }
  return sum;
}

ColorAudit color_audit(const FeatureTable& train, const FeatureTable* test, const FeatureTable* train_means) {
  check_histogram_table(train, "train");
  if (test != nullptr) {
    check_histogram_table(*test, "test");
    if (test->schema != train.schema) {
      throw ArgumentError("train schema " + train.schema.name() + " differs from test schema " +
                          test->schema.name());
    }
    if (test->class_names != train.class_names) {
      throw ArgumentError("train and test tables list different classes");
    }
  }
  if (train_means != nullptr) {
    if (train_means->schema.kind != FeatureSchema::Kind::mean_rgb || train_means->rows.size() != train.rows.size()) {
      throw ArgumentError("mean-RGB table must be row-aligned with the histogram table");
    }
    train_means->validate();
  }
  const std::size_t k = train.class_names.size();
  const std::size_t bins = train.schema.bins;
  ColorAudit audit;
  std::vector<std::size_t> counts;
  const auto means = class_means(train, counts);

  std::vector<std::array<double, 3>> centroid_sums(k, {0.0, 0.0, 0.0});
  if (train_means != nullptr) {
    for (const auto& row : train_means->rows) {
      for (int c = 0; c < 3; ++c) {
        centroid_sums[row.label][c] += row.values[c];
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!means[c]) {
      audit.warnings.push_back("class " + train.class_names[c] + " has no training rows; omitted from colour audit");
      continue;
    }
    ColorAuditEntry entry{c, {}, *means[c], counts[c]};
    for (std::size_t ch = 0; ch < 3; ++ch) {
      if (train_means != nullptr) {
        entry.centroid[ch] = centroid_sums[c][ch] / static_cast<double>(counts[c]);
      } else {
        double centre_sum = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
          const double centre = (static_cast<double>(b) + 0.5) * 256.0 / static_cast<double>(bins) - 0.5;
          centre_sum += entry.mean_histogram[ch * bins + b] * centre;
        }
        entry.centroid[ch] = centre_sum;
      }
    }
    audit.entries.push_back(std::move(entry));
  }
  for (std::size_t i = 0; i < audit.entries.size(); ++i) {
    for (std::size_t j = i + 1; j < audit.entries.size(); ++j) {
      audit.pairwise.push_back({audit.entries[i].class_index, audit.entries[j].class_index,
                                histogram_l1(audit.entries[i].mean_histogram, audit.entries[j].mean_histogram)});
    }
  }
  if (test != nullptr) {
    std::vector<std::size_t> test_counts;
    const auto test_means = class_means(*test, test_counts);
    audit.train_test_shift.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      if (means[c] && test_means[c]) {
        audit.train_test_shift[c] = histogram_l1(*means[c], *test_means[c]);
      } else if (means[c]) {
        audit.warnings.push_back("class " + train.class_names[c] + " has no test rows; shift undefined");
      }
    }
  }
  return audit;
}

// ---- blockiness -----------------------------------------------------------

double BlockinessParts::edge_mean() const {
  return edge_pairs == 0 ? 0.0 : static_cast<double>(edge_sum) / 1000.0 / static_cast<double>(edge_pairs);
}

double BlockinessParts::interior_mean() const {
  return interior_pairs == 0 ? 0.0
                             : static_cast<double>(interior_sum) / 1000.0 / static_cast<double>(interior_pairs);
}

double BlockinessParts::score() const {
  if (edge_sum == 0) {
    return 0.0;
  }
  return edge_mean() / (interior_mean() + kEpsilon);
}

BlockinessParts blockiness_parts(const RgbImage& image, std::size_t grid) {
  image.validate();
  if (grid == 0) {
    throw ArgumentError("blockiness grid must be positive");
  }
  const std::size_t w = image.width;
  const std::size_t h = image.height;
  if (w < 2 * grid || h < 2 * grid) {
    throw ArgumentError("image " + std::to_string(w) + "x" + std::to_string(h) + " is smaller than two " +
                        std::to_string(grid) + "-pixel grid cells");
  }
  const auto& k = kernels::active();
  std::vector<std::int32_t> lum(w * h);
  k.luminance_x1000(image.rgb(), lum);

  BlockinessParts parts;
  std::uint64_t horizontal_total = 0;
  std::uint64_t horizontal_edges = 0;
  std::size_t edges_per_row = 0;
  for (std::size_t x = grid - 1; x + 1 < w; x += grid) {
    ++edges_per_row;
  }
  for (std::size_t y = 0; y < h; ++y) {
    const std::span<const std::int32_t> row(lum.data() + y * w, w);
    horizontal_total += k.abs_diff_adjacent(row);
    for (std::size_t x = grid - 1; x + 1 < w; x += grid) {
      horizontal_edges += static_cast<std::uint64_t>(std::abs(row[x + 1] - row[x]));
    }
  }
  parts.edge_sum = horizontal_edges;
  parts.edge_pairs = edges_per_row * h;
  parts.interior_sum = horizontal_total - horizontal_edges;
  parts.interior_pairs = (w - 1 - edges_per_row) * h;
  for (std::size_t y = 0; y + 1 < h; ++y) {
    const std::uint64_t d = k.abs_diff_rows(std::span<const std::int32_t>(lum.data() + y * w, w),
                                            std::span<const std::int32_t>(lum.data() + (y + 1) * w, w));
    if (y % grid == grid - 1) {
      parts.edge_sum += d;
      parts.edge_pairs += w;
    } else {
      parts.interior_sum += d;
      parts.interior_pairs += w;
    }
  }
  return parts;
}

double blockiness(const RgbImage& image, std::size_t grid) {
  return blockiness_parts(image, grid).score();
}

std::string_view to_string(QualityBand band) noexcept {
  switch (band) {
    case QualityBand::severe:
      return "severe";
    case QualityBand::moderate:
      return "moderate";
    case QualityBand::minor:
      return "minor";
    case QualityBand::none:
      return "none";
  }
  return "none";
}

std::vector<double> calibration_scores(std::optional<int> quality, const CalibrationSettings& settings,
                                       std::size_t threads) {
  SynthSpec spec;
  spec.n_classes = 1;
  spec.train_per_class = settings.images_per_level;
  spec.test_per_class = 0;
  spec.width = settings.width;
  spec.height = settings.height;
  spec.class_means = {settings.mean};
  spec.noise_sigma = settings.noise_sigma;
  spec.class_quality = {quality};
  spec.seed = settings.seed;
  const auto images = generate_images(spec, Split::train, threads);
  std::vector<double> scores(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    scores[i] = blockiness(images[i]);
  }
  return scores;
}

QualityBand QualityCalibration::band(double score) const {
  if (score >= boundaries[0]) {
    return QualityBand::severe;
  }
  if (score >= boundaries[1]) {
    return QualityBand::moderate;
  }
  if (score >= boundaries[2]) {
    return QualityBand::minor;
  }
  return QualityBand::none;
}

QualityCalibration calibrate_quality_bands(const CalibrationSettings& settings, std::size_t threads) {
  if (settings.images_per_level == 0) {
    throw ArgumentError("calibration needs at least one image per quality");
  }
  QualityCalibration calibration;
  calibration.settings = settings;
  for (std::size_t i = 0; i < 3; ++i) {
    calibration.medians[i] = summarize(calibration_scores(calibration.qualities[i], settings, threads)).median;
  }
  calibration.lossless_median = summarize(calibration_scores(std::nullopt, settings, threads)).median;
  const auto& m = calibration.medians;
  if (!(m[0] > m[1] && m[1] > m[2] && m[2] > calibration.lossless_median)) {
    throw std::runtime_error("calibration medians are not strictly decreasing in quality");
  }
  calibration.boundaries = {(m[0] + m[1]) / 2.0, (m[1] + m[2]) / 2.0, (m[2] + calibration.lossless_median) / 2.0};
  return calibration;
}

const QualityCalibration& default_quality_calibration() {
  static const QualityCalibration calibration = calibrate_quality_bands();
  return calibration;
}

QualityBand quality_band(const RgbImage& image) {
  return quality_band(image, default_quality_calibration());
}

QualityBand quality_band(const RgbImage& image, const QualityCalibration& calibration) {
  return calibration.band(blockiness(image));
}

// ---- clipping -------------------------------------------------------------

ClippingStats clipping_stats(const RgbImage& image, double saturation_threshold) {
  image.validate();
  const auto counts = kernels::active().saturation_counts(image.rgb());
  const auto n = static_cast<double>(image.pixel_count());
  ClippingStats stats;
  for (std::size_t c = 0; c < 3; ++c) {
    stats.at_zero[c] = static_cast<double>(counts.at_zero[c]) / n;
    stats.at_max[c] = static_cast<double>(counts.at_max[c]) / n;
    stats.corrupted = stats.corrupted || stats.at_max[c] >= saturation_threshold;
  }
  return stats;
}

// ---- corpus audit ---------------------------------------------------------

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) {
    throw ArgumentError("quantile of an empty sample");
  }
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

ScoreSummary summarize(std::vector<double> values) {
  ScoreSummary s;
  s.count = values.size();
  if (values.empty()) {
    return s;
  }
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  return s;
}

namespace {

struct ImageResult {
  ImageAudit audit;
  std::vector<double> histogram;
};

struct SplitResult {
  std::vector<ImageResult> images;
  std::vector<std::string> warnings;
};

SplitResult audit_split(const CorpusManifest& manifest, const AuditOptions& options,
                        const QualityCalibration& calibration) {
  const std::size_t n = manifest.entries.size();
  std::vector<std::optional<ImageResult>> slots(n);
  std::vector<std::string> errors(n);
  const Extractor histogram{FeatureSchema::Kind::histogram, options.bins};
  parallel_for(n, options.load.threads, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    LabeledImage image;
    try {
      image = load_image(manifest, entry);
    } catch (const DecodeError& e) {
      if (options.load.strict) {
        throw;
      }
      errors[i] = std::string("skipped ") + e.what();
      return;
    }
    ImageResult r;
    r.audit.path = entry.path;
    r.audit.label = entry.label;
    r.audit.split = entry.split;
    const auto mean = mean_rgb(image).values;
    std::copy(mean.begin(), mean.end(), r.audit.mean_rgb.begin());
    if (image.width >= 2 * options.grid && image.height >= 2 * options.grid) {
      const double score = blockiness(image, options.grid);
      r.audit.blockiness = score;
      r.audit.band = calibration.band(score);
    } else {
      errors[i] = entry.path + ": too small for blockiness";
    }
    r.audit.clipping = clipping_stats(image, options.saturation_threshold);
    r.histogram = histogram(image).values;
    slots[i] = std::move(r);
  });
  SplitResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      out.warnings.push_back(errors[i]);
    }
    if (slots[i]) {
      out.images.push_back(std::move(*slots[i]));
    }
  }
  return out;
}

std::vector<ClassAudit> summarize_classes(const std::vector<ImageResult>& images, std::size_t n_classes,
                                          Split split, std::size_t bins) {
  std::vector<ClassAudit> classes(n_classes);
  std::vector<std::vector<double>> scores(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    classes[c].class_index = c;
    classes[c].split = split;
    classes[c].mean_histogram.assign(3 * bins, 0.0);
  }
  for (const auto& r : images) {
    auto& cls = classes[r.audit.label];
    ++cls.images;
    if (r.audit.blockiness) {
      scores[r.audit.label].push_back(*r.audit.blockiness);
      ++cls.band_counts[static_cast<std::size_t>(*r.audit.band)];
    }
    if (r.audit.clipping.corrupted) {
      ++cls.clipped;
    }
    cls.blue_tail_mass += r.histogram[3 * bins - 1];
    for (std::size_t d = 0; d < r.histogram.size(); ++d) {
      cls.mean_histogram[d] += r.histogram[d];
    }
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& cls = classes[c];
    cls.blockiness = summarize(std::move(scores[c]));
    if (cls.images > 0) {
      const auto n = static_cast<double>(cls.images);
      cls.blue_tail_mass /= n;
      for (double& v : cls.mean_histogram) {
        v /= n;
      }
    }
  }
  return classes;
}

FeatureTable histogram_table(const std::vector<ImageResult>& images, const std::vector<std::string>& class_names,
                             std::size_t bins) {
  FeatureTable table{FeatureSchema::histogram(bins), class_names, {}};
  for (const auto& r : images) {
    table.rows.push_back({r.audit.label, r.audit.split, r.histogram});
  }
  return table;
}

FeatureTable means_table(const std::vector<ImageResult>& images, const std::vector<std::string>& class_names) {
  FeatureTable table{FeatureSchema::mean_rgb(), class_names, {}};
  for (const auto& r : images) {
    table.rows.push_back({r.audit.label, r.audit.split, {r.audit.mean_rgb.begin(), r.audit.mean_rgb.end()}});
  }
  return table;
}

}  // namespace

AuditReport audit_corpus(const CorpusManifest& train, const CorpusManifest* test, const AuditOptions& options) {
  train.validate();
  if (options.bins == 0 || options.bins > 65536) {
    throw ArgumentError("histogram bins must be in [1, 65536]");
  }
  if (options.grid == 0) {
    throw ArgumentError("blockiness grid must be positive");
  }
  if (test != nullptr) {
    test->validate();
    if (test->class_names != train.class_names) {
      throw ArgumentError("train and test manifests list different classes");
    }
  }
  AuditReport report;
  report.class_names = train.class_names;
  report.bins = options.bins;
  report.grid = options.grid;
  report.saturation_threshold = options.saturation_threshold;
  report.calibration = options.calibration != nullptr ? *options.calibration : default_quality_calibration();
  report.warnings = train.warnings;

  SplitResult train_result = audit_split(train, options, report.calibration);
  report.warnings.insert(report.warnings.end(), train_result.warnings.begin(), train_result.warnings.end());
  const std::size_t k = train.class_names.size();
  report.train = summarize_classes(train_result.images, k, Split::train, options.bins);
  const FeatureTable train_hist = histogram_table(train_result.images, train.class_names, options.bins);
  const FeatureTable train_means = means_table(train_result.images, train.class_names);

  std::optional<SplitResult> test_result;
  FeatureTable test_hist;
  if (test != nullptr) {
    report.warnings.insert(report.warnings.end(), test->warnings.begin(), test->warnings.end());
    test_result = audit_split(*test, options, report.calibration);
    report.warnings.insert(report.warnings.end(), test_result->warnings.begin(), test_result->warnings.end());
    report.test = summarize_classes(test_result->images, k, Split::test, options.bins);
    test_hist = histogram_table(test_result->images, test->class_names, options.bins);
    const FeatureTable test_means = means_table(test_result->images, test->class_names);
    report.test_color = color_audit(test_hist, nullptr, &test_means);
  }
  report.color = color_audit(train_hist, test != nullptr ? &test_hist : nullptr, &train_means);
  report.warnings.insert(report.warnings.end(), report.color.warnings.begin(), report.color.warnings.end());

  for (auto& r : train_result.images) {
    report.images.push_back(std::move(r.audit));
  }
  if (test_result) {
    for (auto& r : test_result->images) {
      report.images.push_back(std::move(r.audit));
    }
  }
  return report;
}

}  // namespace patchaudit
