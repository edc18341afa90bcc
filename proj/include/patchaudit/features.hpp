#pragma once

// Shallow colour descriptors and feature tables.
//
// Feature CSV layout:
//
//   # schema: hist-3x16
//   # classes: ADI,BACK,...
//   label,split,f0,f1,...,f47
//   ADI,train,0.0123,...
//
// Values are written with 17 significant digits, so a table read back is
// bit-identical.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "patchaudit/corpus.hpp"
#include "patchaudit/image.hpp"

namespace patchaudit {

struct FeatureSchema {
  enum class Kind { mean_rgb, histogram, external };

  Kind kind = Kind::mean_rgb;
  std::size_t bins = 0;       // histogram only
  std::size_t dimension = 3;

  static FeatureSchema mean_rgb() { return {Kind::mean_rgb, 0, 3}; }
  static FeatureSchema histogram(std::size_t bins) { return {Kind::histogram, bins, 3 * bins}; }
  static FeatureSchema external(std::size_t dimension) { return {Kind::external, 0, dimension}; }

  /// "mean-rgb-3", "hist-3x16", "external-1280".
  std::string name() const;
  /// Inverse of name(); throws ArgumentError.
  static FeatureSchema parse(std::string_view text);

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

struct FeatureVector {
  FeatureSchema schema;
  std::vector<double> values;
};

struct FeatureRow {
  std::size_t label = 0;
  Split split = Split::train;
  std::vector<double> values;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureTable {
  FeatureSchema schema;
  std::vector<std::string> class_names;
  std::vector<FeatureRow> rows;

  /// Throws ArgumentError when a row length disagrees with the schema, a
  /// value is not finite or a label is out of range.
  void validate() const;

  /// Rows of one split, in order.
  FeatureTable filter(Split split) const;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

/// Per-channel mean over all pixels: integer channel sums divided once.
FeatureVector mean_rgb(const RgbImage& image);

/// Normalized per-channel histograms, R block then G then B, with bin
/// floor(v * bins / 256). Throws ArgumentError when bins == 0.
FeatureVector color_histogram(const RgbImage& image, std::size_t bins = 16);

struct Extractor {
  FeatureSchema::Kind kind = FeatureSchema::Kind::histogram;
  std::size_t bins = 16;

  FeatureSchema schema() const;
  FeatureVector operator()(const RgbImage& image) const;

  /// "mean-rgb" or "hist"; throws ArgumentError.
  static Extractor parse(std::string_view text, std::size_t bins = 16);
  /// Extractor that reproduces a schema; throws for external schemas.
  static Extractor for_schema(const FeatureSchema& schema);
};

struct LoadOptions {
  std::size_t threads = 0;  // 0 = hardware concurrency
  bool strict = false;      // abort on the first undecodable file
};

/// One row per manifest entry in manifest order. Undecodable images are
/// skipped and reported in `warnings` unless options.strict is set.
FeatureTable featurize_corpus(const CorpusManifest& manifest, const Extractor& extractor,
                              const LoadOptions& options, std::vector<std::string>* warnings = nullptr);

void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path);

/// Reads a feature CSV using its own `# schema:` and `# classes:` lines.
FeatureTable read_feature_csv(const std::filesystem::path& path);

/// Ingests externally computed features. Dimension comes from the header;
/// labels are resolved against `class_names`. Ragged rows, non-finite values
/// and unknown labels raise ParseError with the line number.
FeatureTable load_external_features(const std::filesystem::path& path,
                                    const std::vector<std::string>& class_names);

}  // namespace patchaudit
