#include <gtest/gtest.h>

#include <json.hpp>

#include "patchaudit/error.hpp"
#include "patchaudit/forensics.hpp"
#include "patchaudit/image_codec.hpp"
#include "patchaudit/perturb.hpp"
#include "patchaudit/synth.hpp"
#include "test_util.hpp"

namespace patchaudit {
namespace {

using testing::TempDir;

// Brute-force reference for the blockiness definition, in floating point.
double reference_blockiness(const RgbImage& image, std::size_t grid) {
  auto lum = [&](std::size_t x, std::size_t y) {
    const auto* p = image.at(x, y);
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  };
  double edge = 0;
  double interior = 0;
  std::size_t n_edge = 0;
  std::size_t n_interior = 0;
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x + 1 < image.width; ++x) {
      const double d = std::abs(lum(x + 1, y) - lum(x, y));
      (x % grid == grid - 1 ? edge : interior) += d;
      ++(x % grid == grid - 1 ? n_edge : n_interior);
    }
  }
  for (std::size_t y = 0; y + 1 < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const double d = std::abs(lum(x, y + 1) - lum(x, y));
      (y % grid == grid - 1 ? edge : interior) += d;
      ++(y % grid == grid - 1 ? n_edge : n_interior);
    }
  }
  if (edge == 0) {
    return 0;
  }
  return (edge / static_cast<double>(n_edge)) / (interior / static_cast<double>(n_interior) + 1e-6);
}

TEST(Blockiness, SolidImageScoresZero) {
  EXPECT_EQ(blockiness(make_solid(32, 32, 90, 10, 200)), 0.0);
}

TEST(Blockiness, ConstantTilesScoreHuge) {
  RgbImage image{32, 24, std::vector<std::uint8_t>(32 * 24 * 3)};
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const auto v = static_cast<std::uint8_t>(20 * (x / 8) + 50 * (y / 8));
      std::fill(image.at(x, y), image.at(x, y) + 3, v);
    }
  }
  const BlockinessParts parts = blockiness_parts(image);
  EXPECT_EQ(parts.interior_sum, 0u);
  EXPECT_GT(parts.edge_sum, 0u);
  EXPECT_DOUBLE_EQ(parts.score(), parts.edge_mean() / 1e-6);
  EXPECT_GT(parts.score(), 1e6);
}

TEST(Blockiness, MatchesFloatingPointReference) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RgbImage image = testing::random_image(16 + seed * 5, 20 + seed * 3, seed);
    for (std::size_t grid : {2u, 4u, 8u}) {
      EXPECT_NEAR(blockiness(image, grid), reference_blockiness(image, grid), 1e-9) << seed << " " << grid;
    }
  }
}

TEST(Blockiness, PairCounts) {
  const BlockinessParts p = blockiness_parts(testing::random_image(20, 17, 1), 8);
  // Horizontal edges at x = 7, 15; vertical edges at y = 7, 15.
  EXPECT_EQ(p.edge_pairs, 2u * 17u + 2u * 20u);
  EXPECT_EQ(p.edge_pairs + p.interior_pairs, 19u * 17u + 20u * 16u);
}

TEST(Blockiness, HeavyCompressionRaisesScore) {
  const RgbImage textured = testing::noisy_image(96, 96, 20.0, 3);
  EXPECT_GT(blockiness(jpeg_recompress(textured, 20)), blockiness(jpeg_recompress(textured, 90)));
  EXPECT_GT(blockiness(jpeg_recompress(textured, 20)), blockiness(textured));
}

TEST(Blockiness, OffsetInvariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RgbImage image = testing::random_image(40, 24, seed);
    for (auto& v : image.pixels) {
      v = static_cast<std::uint8_t>(v / 2 + 20);
    }
    RgbImage shifted = image;
    for (auto& v : shifted.pixels) {
      v = static_cast<std::uint8_t>(v + 40);
    }
    const auto a = blockiness_parts(image);
    const auto b = blockiness_parts(shifted);
    EXPECT_EQ(a.edge_sum, b.edge_sum);
    EXPECT_EQ(a.interior_sum, b.interior_sum);
    EXPECT_EQ(blockiness(image), blockiness(shifted));
  }
}

TEST(Blockiness, TransposeSymmetry) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RgbImage image = jpeg_recompress(testing::noisy_image(48 + 8 * (seed % 3), 32 + seed, 15.0, seed), 40);
    EXPECT_EQ(blockiness(image), blockiness(transpose(image))) << seed;
  }
}

TEST(Blockiness, RejectsSmallImagesAndZeroGrid) {
  EXPECT_THROW(blockiness(make_solid(15, 64, 0, 0, 0)), ArgumentError);
  EXPECT_THROW(blockiness(make_solid(64, 15, 0, 0, 0)), ArgumentError);
  EXPECT_NO_THROW(blockiness(make_solid(16, 16, 0, 0, 0)));
  EXPECT_THROW(blockiness(make_solid(16, 16, 0, 0, 0), 0), ArgumentError);
}

TEST(QualityBands, CalibrationIsOrderedAndMidpoints) {
  const QualityCalibration& cal = default_quality_calibration();
  EXPECT_GT(cal.medians[0], cal.medians[1]);
  EXPECT_GT(cal.medians[1], cal.medians[2]);
  EXPECT_GT(cal.medians[2], cal.lossless_median);
  EXPECT_DOUBLE_EQ(cal.boundaries[0], (cal.medians[0] + cal.medians[1]) / 2);
  EXPECT_DOUBLE_EQ(cal.boundaries[1], (cal.medians[1] + cal.medians[2]) / 2);
  EXPECT_DOUBLE_EQ(cal.boundaries[2], (cal.medians[2] + cal.lossless_median) / 2);
  EXPECT_EQ(&cal, &default_quality_calibration());
}

TEST(QualityBands, BandThresholds) {
  QualityCalibration cal;
  cal.boundaries = {3.0, 2.0, 1.0};
  EXPECT_EQ(cal.band(3.0), QualityBand::severe);
  EXPECT_EQ(cal.band(2.999), QualityBand::moderate);
  EXPECT_EQ(cal.band(2.0), QualityBand::moderate);
  EXPECT_EQ(cal.band(1.5), QualityBand::minor);
  EXPECT_EQ(cal.band(0.99), QualityBand::none);
  EXPECT_EQ(to_string(QualityBand::severe), "severe");
  EXPECT_EQ(to_string(QualityBand::none), "none");
}

TEST(QualityBands, CalibrationImageAtQuality30IsSevere) {
  const QualityCalibration& cal = default_quality_calibration();
  SynthSpec spec;
  spec.n_classes = 1;
  spec.train_per_class = cal.settings.images_per_level;
  spec.test_per_class = 0;
  spec.width = cal.settings.width;
  spec.height = cal.settings.height;
  spec.class_means = {cal.settings.mean};
  spec.noise_sigma = cal.settings.noise_sigma;
  spec.class_quality = {30};
  spec.seed = cal.settings.seed;
  const auto images = generate_images(spec, Split::train, 1);
  std::size_t severe = 0;
  for (const auto& image : images) {
    severe += quality_band(image) == QualityBand::severe;
  }
  // At least the upper half of the calibration sample sits above its own median.
  EXPECT_GE(2 * severe, images.size());
  std::vector<double> scores;
  for (const auto& image : images) {
    scores.push_back(blockiness(image));
  }
  const double median = summarize(scores).median;
  EXPECT_EQ(cal.band(median), QualityBand::severe);
}

TEST(QualityBands, SmoothGradientAndSolidAreNone) {
  RgbImage gradient{128, 128, std::vector<std::uint8_t>(128 * 128 * 3)};
  for (std::size_t y = 0; y < 128; ++y) {
    for (std::size_t x = 0; x < 128; ++x) {
      auto* p = gradient.at(x, y);
      p[0] = static_cast<std::uint8_t>(x);
      p[1] = static_cast<std::uint8_t>(y);
      p[2] = static_cast<std::uint8_t>((x + y) / 2);
    }
  }
  EXPECT_LT(blockiness(gradient), default_quality_calibration().boundaries[2]);
  EXPECT_EQ(quality_band(gradient), QualityBand::none);
  EXPECT_EQ(quality_band(make_solid(64, 64, 10, 10, 10)), QualityBand::none);
}

TEST(QualityBands, MedianMonotoneInQuality) {
  CalibrationSettings settings;
  settings.images_per_level = 12;
  double previous = std::numeric_limits<double>::infinity();
  for (int q : {20, 40, 60, 80, 95}) {
    const double median = summarize(calibration_scores(q, settings, 1)).median;
    EXPECT_LE(median, previous) << "quality " << q;
    previous = median;
  }
}

TEST(QualityBands, LowQualityExceedsLosslessAtDefaultTexture) {
  CalibrationSettings settings;
  settings.noise_sigma = 20.0;
  settings.images_per_level = 12;
  const double lossless = summarize(calibration_scores(std::nullopt, settings, 1)).median;
  for (int q : {20, 40, 60}) {
    EXPECT_GT(summarize(calibration_scores(q, settings, 1)).median, lossless) << q;
  }
}

TEST(Clipping, SolidRed) {
  const ClippingStats s = clipping_stats(make_solid(4, 4, 255, 0, 0));
  EXPECT_EQ(s.at_max, (std::array<double, 3>{1, 0, 0}));
  EXPECT_EQ(s.at_zero, (std::array<double, 3>{0, 1, 1}));
  EXPECT_TRUE(s.corrupted);
}

TEST(Clipping, SixPercentBlueIsFlagged) {
  RgbImage image = make_solid(10, 10, 128, 128, 128);
  for (std::size_t i = 0; i < 6; ++i) {
    image.pixels[3 * (i * 13) + 2] = 255;
  }
  const ClippingStats s = clipping_stats(image, 0.05);
  EXPECT_DOUBLE_EQ(s.at_max[2], 0.06);
  EXPECT_TRUE(s.corrupted);
  EXPECT_FALSE(clipping_stats(image, 0.07).corrupted);
}

TEST(Clipping, MidGrayIsClean) {
  const ClippingStats s = clipping_stats(make_solid(7, 3, 128, 128, 128));
  EXPECT_EQ(s.at_max, (std::array<double, 3>{0, 0, 0}));
  EXPECT_EQ(s.at_zero, (std::array<double, 3>{0, 0, 0}));
  EXPECT_FALSE(s.corrupted);
}

TEST(Clipping, MatchesBruteForceCounting) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RgbImage image = testing::random_image(1 + seed % 11, 1 + seed % 7, seed);
    for (std::size_t i = 0; i < image.pixels.size(); i += 1 + seed % 4) {
      image.pixels[i] = (i / 2) % 2 == 0 ? 255 : 0;
    }
    std::array<double, 3> zero{};
    std::array<double, 3> max{};
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
      zero[i % 3] += image.pixels[i] == 0;
      max[i % 3] += image.pixels[i] == 255;
    }
    const auto n = static_cast<double>(image.pixel_count());
    const ClippingStats s = clipping_stats(image);
    for (int c = 0; c < 3; ++c) {
      EXPECT_EQ(s.at_zero[c], zero[c] / n);
      EXPECT_EQ(s.at_max[c], max[c] / n);
    }
  }
}

FeatureTable hist_table(const std::vector<std::pair<std::size_t, RgbImage>>& images, std::size_t classes,
                        Split split = Split::train) {
  FeatureTable t{FeatureSchema::histogram(16), {}, {}};
  for (std::size_t c = 0; c < classes; ++c) {
    t.class_names.push_back("c" + std::to_string(c));
  }
  for (const auto& [label, image] : images) {
    t.rows.push_back({label, split, color_histogram(image, 16).values});
  }
  return t;
}

TEST(ColorAudit, RedVersusBlue) {
  const auto t = hist_table({{0, make_solid(4, 4, 255, 0, 0)}, {1, make_solid(4, 4, 0, 0, 255)}}, 2);
  const ColorAudit audit = color_audit(t);
  ASSERT_EQ(audit.pairwise.size(), 1u);
  EXPECT_DOUBLE_EQ(audit.pairwise[0].l1, 4.0);
  ASSERT_EQ(audit.entries.size(), 2u);
  EXPECT_EQ(audit.entries[0].samples, 1u);
  // Bin-centre estimate: 255 lies in bin 15 with centre 247.5.
  EXPECT_DOUBLE_EQ(audit.entries[0].centroid[0], 247.5);
  EXPECT_DOUBLE_EQ(audit.entries[0].centroid[2], 7.5);
  EXPECT_TRUE(audit.train_test_shift.empty());
}

TEST(ColorAudit, ExactCentroidsFromMeans) {
  const std::vector<std::pair<std::size_t, RgbImage>> images{{0, make_solid(4, 4, 255, 0, 0)},
                                                             {0, make_solid(4, 4, 245, 10, 0)}};
  const auto t = hist_table(images, 1);
  FeatureTable means{FeatureSchema::mean_rgb(), t.class_names, {}};
  for (const auto& [label, image] : images) {
    means.rows.push_back({label, Split::train, mean_rgb(image).values});
  }
  const ColorAudit audit = color_audit(t, nullptr, &means);
  EXPECT_EQ(audit.entries[0].centroid, (std::array<double, 3>{250.0, 5.0, 0.0}));
  EXPECT_TRUE(audit.pairwise.empty());
}

TEST(ColorAudit, IdenticalTablesHaveZeroShift) {
  std::vector<std::pair<std::size_t, RgbImage>> images;
  for (std::uint64_t i = 0; i < 9; ++i) {
    images.push_back({i % 3, testing::random_image(5, 5, i)});
  }
  const auto t = hist_table(images, 3);
  const ColorAudit audit = color_audit(t, &t);
  ASSERT_EQ(audit.train_test_shift.size(), 3u);
  for (const auto& s : audit.train_test_shift) {
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(*s, 0.0);
  }
  EXPECT_EQ(audit.pairwise.size(), 3u);
  for (const auto& e : audit.entries) {
    for (std::size_t c = 0; c < 3; ++c) {
      double sum = 0;
      for (std::size_t b = 0; b < 16; ++b) {
        sum += e.mean_histogram[c * 16 + b];
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(ColorAudit, EmptyClassOmittedWithWarning) {
  const auto t = hist_table({{0, make_solid(4, 4, 1, 2, 3)}, {2, make_solid(4, 4, 9, 9, 9)}}, 3);
  const ColorAudit audit = color_audit(t);
  EXPECT_EQ(audit.entries.size(), 2u);
  EXPECT_EQ(audit.pairwise.size(), 1u);
  ASSERT_EQ(audit.warnings.size(), 1u);
  EXPECT_NE(audit.warnings[0].find("c1"), std::string::npos);
}

TEST(ColorAudit, RejectsMismatchedTables) {
  const auto t = hist_table({{0, make_solid(4, 4, 1, 2, 3)}}, 1);
  FeatureTable means{FeatureSchema::mean_rgb(), t.class_names, {{0, Split::train, {1, 2, 3}}}};
  EXPECT_THROW(color_audit(means), ArgumentError);
  auto other = t;
  other.class_names = {"x"};
  EXPECT_THROW(color_audit(t, &other), ArgumentError);
}

TEST(ColorAudit, L1IsAMetric) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  auto random_hist = [&] {
    std::vector<double> h(48);
    for (auto& v : h) {
      v = u(rng);
    }
    return h;
  };
  for (int i = 0; i < 200; ++i) {
    const auto a = random_hist();
    const auto b = random_hist();
    const auto c = random_hist();
    EXPECT_EQ(histogram_l1(a, b), histogram_l1(b, a));
    EXPECT_EQ(histogram_l1(a, a), 0.0);
    EXPECT_GT(histogram_l1(a, b), 0.0);
    EXPECT_LE(histogram_l1(a, c), histogram_l1(a, b) + histogram_l1(b, c) + 1e-12);
  }
  EXPECT_THROW(histogram_l1(std::vector<double>(3), std::vector<double>(4)), ArgumentError);
}

TEST(Summary, LinearInterpolationQuartiles) {
  const ScoreSummary s = summarize({4, 1, 3, 2});
  EXPECT_EQ(s.count, 4u);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.max, 4);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
  EXPECT_DOUBLE_EQ(s.iqr(), 1.5);
  EXPECT_EQ(summarize({}).count, 0u);
  EXPECT_EQ(summarize({7}).median, 7);
}

SynthSpec audit_spec() {
  SynthSpec spec;
  spec.n_classes = 3;
  spec.class_names = {"clean", "clipped", "lossy"};
  spec.train_per_class = 4;
  spec.test_per_class = 3;
  spec.width = 64;
  spec.height = 64;
  spec.class_means = {{170, 120, 150}, {170, 120, 150}, {150, 100, 170}};
  spec.class_quality = {std::nullopt, std::nullopt, 20};
  spec.class_blue_clip = {std::nullopt, 0.06, std::nullopt};
  // Bands are calibrated on sigma 8 texture; match it so q20 reads as severe.
  spec.noise_sigma = 8.0;
  spec.seed = 5;
  return spec;
}

TEST(AuditCorpus, FlagsClippedClassAndCompressedClass) {
  TempDir dir("audit");
  const SynthCorpus corpus = generate_corpus(audit_spec(), dir.path(), 1);
  AuditOptions options;
  options.load.threads = 2;
  const AuditReport report = audit_corpus(corpus.train, &corpus.test, options);
  ASSERT_EQ(report.train.size(), 3u);
  ASSERT_EQ(report.test.size(), 3u);
  EXPECT_EQ(report.images.size(), 21u);
  EXPECT_EQ(report.train[0].clipped, 0u);
  EXPECT_EQ(report.train[1].clipped, 4u);
  EXPECT_EQ(report.train[2].clipped, 0u);
  EXPECT_EQ(report.test[1].clipped, 3u);
  EXPECT_GT(report.train[2].blockiness.median, report.train[0].blockiness.median);
  EXPECT_EQ(report.train[2].band_counts[0], 4u);
  EXPECT_GT(report.train[1].blue_tail_mass, report.train[0].blue_tail_mass);
  EXPECT_EQ(report.color.entries.size(), 3u);
  EXPECT_EQ(report.color.pairwise.size(), 3u);
  ASSERT_EQ(report.color.train_test_shift.size(), 3u);
  EXPECT_TRUE(report.warnings.empty());

  const auto json = nlohmann::json::parse(audit_report_json(report));
  for (const char* key : {"format_version", "corpus", "color_audit", "blockiness", "clipping", "train_test_shift"}) {
    EXPECT_TRUE(json.contains(key)) << key;
  }
  EXPECT_EQ(json["color_audit"].size(), 6u);
  EXPECT_TRUE(json["blockiness"]["calibration"].contains("boundaries"));
  EXPECT_EQ(json["clipping"]["per_class"][1]["flagged"], 4);

  const std::string csv = histogram_csv(report, Split::train);
  EXPECT_EQ(csv.rfind("class,channel,bin,frequency\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 48);
  const std::string images = image_audit_csv(report);
  EXPECT_EQ(std::count(images.begin(), images.end(), '\n'), 1 + 21);
}

TEST(AuditCorpus, ThreadCountDoesNotChangeReport) {
  TempDir dir("audit_threads");
  const SynthCorpus corpus = generate_corpus(audit_spec(), dir.path(), 1);
  AuditOptions one;
  one.load.threads = 1;
  AuditOptions many;
  many.load.threads = 8;
  EXPECT_EQ(audit_report_json(audit_corpus(corpus.train, &corpus.test, one)),
            audit_report_json(audit_corpus(corpus.train, &corpus.test, many)));
}

TEST(AuditCorpus, SkipsBrokenImagesWithWarning) {
  TempDir dir("audit_broken");
  SynthSpec spec = audit_spec();
  spec.test_per_class = 0;
  SynthCorpus corpus = generate_corpus(spec, dir.path(), 1);
  write_file_bytes(dir / "train/clean/zz.png", std::vector<std::uint8_t>{1, 2, 3});
  corpus.train.entries.push_back({"train/clean/zz.png", 0, Split::train});
  const AuditReport report = audit_corpus(corpus.train);
  EXPECT_EQ(report.train[0].images, 4u);
  EXPECT_EQ(report.warnings.size(), 1u);
  AuditOptions strict;
  strict.load.strict = true;
  EXPECT_THROW(audit_corpus(corpus.train, nullptr, strict), DecodeError);
}

}  // namespace
}  // namespace patchaudit
