#include "patchaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "patchaudit/error.hpp"
#include "patchaudit/image_codec.hpp"
#include "patchaudit/parallel.hpp"

namespace patchaudit {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void SynthSpec::normalize() {
  if (n_classes == 0) {
    throw ArgumentError("synth spec needs at least one class");
  }
  if (width == 0 || height == 0) {
    throw ArgumentError("synth image size must be positive");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ArgumentError("noise_sigma must be finite and non-negative");
  }
  if (class_names.empty()) {
    const int digits = n_classes > 10 ? static_cast<int>(std::to_string(n_classes - 1).size()) : 1;
    for (std::size_t k = 0; k < n_classes; ++k) {
      char buffer[32];
      std::snprintf(buffer, sizeof(buffer), "c%0*zu", digits, k);
      class_names.emplace_back(buffer);
    }
  }
  if (class_names.size() != n_classes) {
    throw ArgumentError("class_names must list one name per class");
  }
  if (class_means.size() != n_classes) {
    throw ArgumentError("class_means must list one colour per class");
  }
  if (class_quality.empty()) {
    class_quality.resize(n_classes);
  }
  if (class_blue_clip.empty()) {
    class_blue_clip.resize(n_classes);
  }
  if (class_quality.size() != n_classes || class_blue_clip.size() != n_classes) {
    throw ArgumentError("per-class options must have one entry per class");
  }
  for (const auto& q : class_quality) {
    if (q && (*q < 1 || *q > 100)) {
      throw ArgumentError("class quality must be in [1, 100]");
    }
  }
  for (const auto& f : class_blue_clip) {
    if (f && !(*f >= 0.0 && *f <= 1.0)) {
      throw ArgumentError("blue clipping fraction must be in [0, 1]");
    }
  }
  CorpusManifest probe;
  probe.class_names = class_names;
  probe.validate();
}

SynthSpec parse_synth_spec(const std::string& json_text, const std::string& source) {
  try {
    const Json j = Json::parse(json_text);
    SynthSpec spec;
    spec.n_classes = j.at("n_classes").get<std::size_t>();
    if (j.contains("class_names")) {
      j.at("class_names").get_to(spec.class_names);
    }
    spec.train_per_class = j.at("train_per_class").get<std::size_t>();
    spec.test_per_class = j.at("test_per_class").get<std::size_t>();
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    for (const auto& mean : j.at("class_means")) {
      const auto rgb = mean.get<std::vector<int>>();
      if (rgb.size() != 3 || std::any_of(rgb.begin(), rgb.end(), [](int v) { return v < 0 || v > 255; })) {
        throw ArgumentError("class mean must be three values in [0, 255]");
      }
      spec.class_means.push_back({static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                                  static_cast<std::uint8_t>(rgb[2])});
    }
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    if (j.contains("class_quality")) {
      for (const auto& q : j.at("class_quality")) {
        spec.class_quality.push_back(q.is_null() ? std::nullopt : std::optional<int>(q.get<int>()));
      }
    }
    if (j.contains("class_blue_clip")) {
      for (const auto& f : j.at("class_blue_clip")) {
        spec.class_blue_clip.push_back(f.is_null() ? std::nullopt : std::optional<double>(f.get<double>()));
      }
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.normalize();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(source + ": malformed synth spec: " + e.what());
  } catch (const ArgumentError& e) {
    throw ArgumentError(source + ": " + e.what());
  }
}

SynthSpec read_synth_spec(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open synth spec " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_synth_spec(text.str(), path.string());
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  Json j;
  j["n_classes"] = spec.n_classes;
  j["class_names"] = spec.class_names;
  j["train_per_class"] = spec.train_per_class;
  j["test_per_class"] = spec.test_per_class;
  j["width"] = spec.width;
  j["height"] = spec.height;
  Json means = Json::array();
  for (const auto& m : spec.class_means) {
    means.push_back({m[0], m[1], m[2]});
  }
  j["class_means"] = means;
  j["noise_sigma"] = spec.noise_sigma;
  Json quality = Json::array();
  for (const auto& q : spec.class_quality) {
    quality.push_back(q ? Json(*q) : Json(nullptr));
  }
  j["class_quality"] = quality;
  Json clip = Json::array();
  for (const auto& f : spec.class_blue_clip) {
    clip.push_back(f ? Json(*f) : Json(nullptr));
  }
  j["class_blue_clip"] = clip;
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

SynthImage render_synth_image(const SynthSpec& spec, std::size_t label, Split split, std::size_t index,
                              bool with_file) {
  const std::uint64_t stream = (static_cast<std::uint64_t>(label) << 32) | static_cast<std::uint64_t>(index);
  std::mt19937_64 rng(derive_seed(spec.seed, stream, split == Split::train ? 11 : 12));
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto& mean = spec.class_means[label];
  RgbImage image{spec.width, spec.height, std::vector<std::uint8_t>(spec.width * spec.height * 3)};
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = mean[i % 3] + spec.noise_sigma * noise(rng);
    image.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  SynthImage out;
  const auto& quality = spec.class_quality[label];
  const auto& clip = spec.class_blue_clip[label];
  if (quality) {
    out.file_bytes = encode_jpeg(image, *quality);
    out.extension = ".jpg";
    image = decode_image(out.file_bytes, "<synth>");
  }
  if (clip && *clip > 0.0) {
    const std::size_t n = image.pixel_count();
    const auto k = static_cast<std::size_t>(std::llround(*clip * static_cast<double>(n)));
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0U);
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
      image.pixels[3 * static_cast<std::size_t>(order[i]) + 2] = 255;
    }
  }
  if (!with_file) {
    out.file_bytes.clear();
    out.extension.clear();
  } else if (!quality || (clip && *clip > 0.0)) {
    out.file_bytes = encode_png(image, 1);
    out.extension = ".png";
  }
  out.pixels = std::move(image);
  return out;
}

namespace {

std::string file_name(const std::string& class_name, std::size_t index, const std::string& extension) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "_%05zu", index);
  return class_name + buffer + extension;
}

// Labels in the manifest follow the sorted class names.
std::vector<std::size_t> sorted_label_map(const SynthSpec& spec, std::vector<std::string>& sorted_names) {
  sorted_names = spec.class_names;
  std::sort(sorted_names.begin(), sorted_names.end());
  std::vector<std::size_t> map(spec.n_classes);
  for (std::size_t k = 0; k < spec.n_classes; ++k) {
    map[k] = static_cast<std::size_t>(std::find(sorted_names.begin(), sorted_names.end(), spec.class_names[k]) -
                                      sorted_names.begin());
  }
  return map;
}

}  // namespace

SynthCorpus generate_corpus(SynthSpec spec, const fs::path& out_root, std::size_t threads) {
  spec.normalize();
  std::vector<std::string> sorted_names;
  const std::vector<std::size_t> label_map = sorted_label_map(spec, sorted_names);
  SynthCorpus corpus;
  for (Split split : {Split::train, Split::test}) {
    const std::string split_name(to_string(split));
    std::error_code ec;
    for (const auto& name : spec.class_names) {
      fs::create_directories(out_root / split_name / name, ec);
      if (ec) {
        throw std::runtime_error("cannot create " + (out_root / split_name / name).string() + ": " + ec.message());
      }
    }
    const std::size_t per_class = spec.per_class(split);
    std::vector<std::string> paths(spec.n_classes * per_class);
    parallel_for(paths.size(), threads, [&](std::size_t job) {
      const std::size_t label = job / per_class;
      const std::size_t index = job % per_class;
      const SynthImage image = render_synth_image(spec, label, split, index);
      const std::string relative =
          split_name + "/" + spec.class_names[label] + "/" + file_name(spec.class_names[label], index, image.extension);
      write_file_bytes(out_root / relative, image.file_bytes);
      paths[job] = relative;
    });
    CorpusManifest manifest;
    manifest.class_names = sorted_names;
    manifest.root = out_root;
    for (std::size_t job = 0; job < paths.size(); ++job) {
      manifest.entries.push_back({paths[job], label_map[job / per_class], split});
    }
    std::sort(manifest.entries.begin(), manifest.entries.end(), [](const auto& a, const auto& b) {
      return std::tie(a.label, a.path) < std::tie(b.label, b.path);
    });
    write_manifest(manifest, out_root / (split_name + "_manifest.csv"));
    (split == Split::train ? corpus.train : corpus.test) = std::move(manifest);
  }
  return corpus;
}

std::vector<LabeledImage> generate_images(SynthSpec spec, Split split, std::size_t threads) {
  spec.normalize();
  std::vector<std::string> sorted_names;
  const std::vector<std::size_t> label_map = sorted_label_map(spec, sorted_names);
  const std::size_t per_class = spec.per_class(split);
  std::vector<LabeledImage> images(spec.n_classes * per_class);
  parallel_for(images.size(), threads, [&](std::size_t job) {
    const std::size_t label = job / per_class;
    SynthImage rendered = render_synth_image(spec, label, split, job % per_class, false);
    LabeledImage& image = images[job];
    static_cast<RgbImage&>(image) = std::move(rendered.pixels);
    image.label = label_map[label];
    image.split = split;
    image.source = "synth:" + spec.class_names[label] + "/" + std::to_string(job % per_class);
  });
  return images;
}

namespace {

std::array<std::uint8_t, 3> hsv_byte_color(double hue_degrees, double saturation, double value) {
  const double chroma = value * saturation;
  const double sector = hue_degrees / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(sector, 2.0) - 1.0));
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  switch (static_cast<int>(sector) % 6) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = value - chroma;
  auto byte = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); };
  return {byte(r + m), byte(g + m), byte(b + m)};
}

}  // namespace

SynthSpec color_signature_spec(std::size_t train_per_class, std::size_t test_per_class, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_classes = 9;
  spec.train_per_class = train_per_class;
  spec.test_per_class = test_per_class;
  for (std::size_t k = 0; k < 9; ++k) {
    spec.class_means.push_back(hsv_byte_color(40.0 * static_cast<double>(k), 0.5, 200.0));
  }
  spec.seed = seed;
  spec.normalize();
  return spec;
}

SynthSpec identical_means_spec(std::size_t train_per_class, std::size_t test_per_class, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_classes = 9;
  spec.train_per_class = train_per_class;
  spec.test_per_class = test_per_class;
  spec.class_means.assign(9, {170, 120, 150});
  spec.seed = seed;
  spec.normalize();
  return spec;
}

}  // namespace patchaudit
