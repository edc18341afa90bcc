#include "patchaudit/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "patchaudit/csv.hpp"
#include "patchaudit/error.hpp"
#include "patchaudit/image_codec.hpp"
#include "patchaudit/parallel.hpp"

namespace patchaudit {

RgbImage jpeg_recompress(const RgbImage& image, int quality) {
  const std::vector<std::uint8_t> bytes = encode_jpeg(image, quality);
  RgbImage out = decode_image(bytes, "<jpeg q" + std::to_string(quality) + ">");
  if (out.width != image.width || out.height != image.height) {
    throw std::runtime_error("JPEG round trip changed image dimensions");
  }
  return out;
}

LabeledImage jpeg_recompress(const LabeledImage& image, int quality) {
  LabeledImage out = image;
  static_cast<RgbImage&>(out) = jpeg_recompress(static_cast<const RgbImage&>(image), quality);
  return out;
}

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Hexcone RGB <-> HSV on r, g, b in [0, 1].
void rotate_hue(std::uint8_t* px, double delta) {
  const double r = px[0] / 255.0;
  const double g = px[1] / 255.0;
  const double b = px[2] / 255.0;
  const double hi = std::max({r, g, b});
  const double lo = std::min({r, g, b});
  const double chroma = hi - lo;
  if (chroma == 0.0) {
    return;
  }
  double hue;
  if (hi == r) {
    hue = 60.0 * std::fmod((g - b) / chroma, 6.0);
  } else if (hi == g) {
    hue = 60.0 * ((b - r) / chroma + 2.0);
  } else {
    hue = 60.0 * ((r - g) / chroma + 4.0);
  }
  hue = std::fmod(hue + delta, 360.0);
  if (hue < 0.0) {
    hue += 360.0;
  }
  const double value = hi;
  const double sector = hue / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(sector, 2.0) - 1.0));
  double r1 = 0.0;
  double g1 = 0.0;
  double b1 = 0.0;
  switch (static_cast<int>(sector) % 6) {
    case 0: r1 = chroma; g1 = x; break;
    case 1: r1 = x; g1 = chroma; break;
    case 2: g1 = chroma; b1 = x; break;
    case 3: g1 = x; b1 = chroma; break;
    case 4: r1 = x; b1 = chroma; break;
    default: r1 = chroma; b1 = x; break;
  }
  const double m = value - chroma;
  px[0] = to_byte((r1 + m) * 255.0);
  px[1] = to_byte((g1 + m) * 255.0);
  px[2] = to_byte((b1 + m) * 255.0);
}

}  // namespace

RgbImage hue_shift(const RgbImage& image, double delta_degrees) {
  if (!std::isfinite(delta_degrees)) {
    throw ArgumentError("hue delta must be finite");
  }
  RgbImage out = image;
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    rotate_hue(&out.pixels[3 * p], delta_degrees);
  }
  return out;
}

LabeledImage hue_shift(const LabeledImage& image, double delta_degrees) {
  LabeledImage out = image;
  static_cast<RgbImage&>(out) = hue_shift(static_cast<const RgbImage&>(image), delta_degrees);
  return out;
}

void PerturbationSpec::validate() const {
  for (int q : jpeg_qualities) {
    if (q < 1 || q > 100) {
      throw ArgumentError("JPEG quality " + std::to_string(q) + " outside [1, 100]");
    }
  }
  for (double d : hue_deltas_degrees) {
    if (!std::isfinite(d)) {
      throw ArgumentError("hue delta must be finite");
    }
  }
}

std::string Perturbation::id() const {
  switch (kind) {
    case Kind::identity:
      return "base";
    case Kind::jpeg:
      return "jpeg_q" + std::to_string(static_cast<int>(amount));
    case Kind::hue: {
      std::string text = csv::format_double(std::fabs(amount));
      if (text.find('.') == std::string::npos && text.find('e') == std::string::npos) {
        text = std::to_string(static_cast<long long>(std::fabs(amount)));
      }
      return std::string("hue_") + (amount < 0 ? "-" : "+") + text;
    }
  }
  return "unknown";
}

RgbImage Perturbation::apply(const RgbImage& image) const {
  switch (kind) {
    case Kind::identity:
      return image;
    case Kind::jpeg:
      return jpeg_recompress(image, static_cast<int>(amount));
    case Kind::hue:
      return hue_shift(image, amount);
  }
  return image;
}

std::vector<Perturbation> expand(const PerturbationSpec& spec) {
  spec.validate();
  std::vector<Perturbation> out{{Perturbation::Kind::identity, 0.0}};
  for (int q : spec.jpeg_qualities) {
    out.push_back({Perturbation::Kind::jpeg, static_cast<double>(q)});
  }
  for (double d : spec.hue_deltas_degrees) {
    out.push_back({Perturbation::Kind::hue, d});
  }
  return out;
}

const RobustnessRow* RobustnessTable::find(const std::string& id) const {
  for (const auto& row : rows) {
    if (row.perturbation == id) {
      return &row;
    }
  }
  return nullptr;
}

RobustnessTable robustness_sweep(const Classifier& model, const CorpusManifest& manifest,
                                 const Extractor& extractor, const PerturbationSpec& spec,
                                 std::size_t threads) {
  if (!(extractor.schema() == schema_of(model))) {
    throw ArgumentError("extractor schema " + extractor.schema().name() + " does not match model schema " +
                        schema_of(model).name());
  }
  if (class_names_of(model) != manifest.class_names) {
    throw ArgumentError("manifest classes do not match model classes");
  }
  const std::vector<Perturbation> perturbations = expand(spec);
  const std::size_t n = manifest.entries.size();
  const std::size_t m = perturbations.size();
  // predicted[i * m + j]: label for image i under perturbation j, empty on failure.
  std::vector<std::optional<std::size_t>> predicted(n * m);
  std::vector<std::string> failures(n);
  parallel_for(n, threads, [&](std::size_t i) {
    LabeledImage image;
    try {
      image = load_image(manifest, manifest.entries[i]);
    } catch (const std::exception& e) {
      failures[i] = e.what();
      return;
    }
    for (std::size_t j = 0; j < m; ++j) {
      try {
        const RgbImage perturbed = perturbations[j].apply(image);
        predicted[i * m + j] = predict(model, extractor(perturbed).values).label;
      } catch (const std::exception& e) {
        failures[i] += perturbations[j].id() + ": " + e.what() + "; ";
      }
    }
  });
  RobustnessTable table;
  for (std::size_t j = 0; j < m; ++j) {
    ConfusionMatrix confusion(manifest.class_names.size());
    RobustnessRow row;
    row.perturbation = perturbations[j].id();
    for (std::size_t i = 0; i < n; ++i) {
      if (predicted[i * m + j]) {
        confusion.add(manifest.entries[i].label, *predicted[i * m + j]);
        ++row.evaluated;
      } else {
        ++row.errors;
      }
    }
    row.accuracy = confusion.accuracy();
    row.balanced_accuracy = confusion.balanced_accuracy();
    table.rows.push_back(row);
  }
  for (auto& row : table.rows) {
    row.delta_accuracy = row.accuracy - table.rows.front().accuracy;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i].empty()) {
      table.warnings.push_back(manifest.entries[i].path + ": " + failures[i]);
    }
  }
  return table;
}

void write_robustness_csv(const RobustnessTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "perturbation,accuracy,balanced_accuracy,delta_accuracy\n";
  for (const auto& row : table.rows) {
    out << row.perturbation << ',' << csv::format_double(row.accuracy) << ','
        << csv::format_double(row.balanced_accuracy) << ',' << csv::format_double(row.delta_accuracy) << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw std::runtime_error("cannot write " + path.string());
  }
  file << out.str();
}

}  // namespace patchaudit
