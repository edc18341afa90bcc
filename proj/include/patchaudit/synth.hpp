#pragma once

// Synthetic corpora with known, injected defects: per-class colour
// signatures, per-class JPEG quality and blue-channel clipping.
//
// Spec JSON:
//   {
//     "n_classes": 9,
//     "class_names": ["c0", ...],            optional, default c0..c{n-1}
//     "train_per_class": 500, "test_per_class": 100,
//     "width": 224, "height": 224,            optional
//     "class_means": [[r, g, b], ...],        one per class
//     "noise_sigma": 20,                      optional
//     "class_quality": [null, 30, ...],       optional, per class
//     "class_blue_clip": [null, 0.06, ...],   optional, per class
//     "seed": 0
//   }

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "patchaudit/corpus.hpp"
#include "patchaudit/image.hpp"

namespace patchaudit {

struct SynthSpec {
  std::size_t n_classes = 1;
  std::vector<std::string> class_names;
  std::size_t train_per_class = 10;
  std::size_t test_per_class = 10;
  std::size_t width = 224;
  std::size_t height = 224;
  std::vector<std::array<std::uint8_t, 3>> class_means;
  double noise_sigma = 20.0;
  std::vector<std::optional<int>> class_quality;
  std::vector<std::optional<double>> class_blue_clip;
  std::uint64_t seed = 0;

  /// Fills defaults (names, empty per-class options) and checks ranges;
  /// throws ArgumentError.
  void normalize();
  std::size_t per_class(Split split) const { return split == Split::train ? train_per_class : test_per_class; }
};

SynthSpec parse_synth_spec(const std::string& json_text, const std::string& source = "<spec>");
SynthSpec read_synth_spec(const std::filesystem::path& path);
std::string synth_spec_to_json(const SynthSpec& spec);

/// One generated image: the pixels a decoder will see and the file to write.
struct SynthImage {
  RgbImage pixels;
  std::vector<std::uint8_t> file_bytes;
  std::string extension;  // ".png" or ".jpg"
};

/// Deterministic in (spec, class, split, index): mean colour plus clamped
/// Gaussian noise; JPEG round trip when the class has a quality; then exactly
/// round(f * pixels) distinct pixels get blue = 255 when the class has a
/// clipping fraction f. Saved as JPEG when only a quality is set, PNG
/// otherwise (a clipped JPEG-quality image is stored losslessly after
/// clipping so the injected fraction survives). With with_file == false only
/// the pixels are produced.
SynthImage render_synth_image(const SynthSpec& spec, std::size_t label, Split split, std::size_t index,
                              bool with_file = true);

struct SynthCorpus {
  CorpusManifest train;
  CorpusManifest test;
};

/// Writes out_root/{train,test}/<class>/<class>_<index>.{png,jpg} and
/// out_root/{train,test}_manifest.csv. Throws std::runtime_error when the
/// directory cannot be written.
SynthCorpus generate_corpus(SynthSpec spec, const std::filesystem::path& out_root, std::size_t threads = 0);

/// In-memory variant for calibration and tests; images in (label, index) order.
std::vector<LabeledImage> generate_images(SynthSpec spec, Split split, std::size_t threads = 0);

/// Nine classes whose means lie on a hue circle (V = 200, S = 0.5, hues
/// 0, 40, ..., 320); every pair of means is at least 46 apart in RGB.
SynthSpec color_signature_spec(std::size_t train_per_class, std::size_t test_per_class, std::uint64_t seed);

/// Nine classes sharing one mean colour.
SynthSpec identical_means_spec(std::size_t train_per_class, std::size_t test_per_class, std::uint64_t seed);

}  // namespace patchaudit
