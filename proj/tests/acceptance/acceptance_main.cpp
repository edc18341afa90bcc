// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "patchaudit/classifier.hpp"
#include "patchaudit/cli.hpp"
#include "patchaudit/features.hpp"
#include "patchaudit/forensics.hpp"
#include "patchaudit/forest.hpp"
#include "patchaudit/image_codec.hpp"
#include "patchaudit/parallel.hpp"
#include "patchaudit/perturb.hpp"
#include "patchaudit/softmax.hpp"
#include "patchaudit/synth.hpp"

namespace fs = std::filesystem;
using namespace patchaudit;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  failures += pass ? 0 : 1;
}

std::string fmt(double v, int precision = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("patchaudit_accept_" + tag + "_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Mean-RGB rows rendered on the fly so the full corpus never sits in memory.
FeatureTable synth_mean_rgb(SynthSpec spec, Split split) {
  spec.normalize();
  const std::size_t per_class = spec.per_class(split);
  FeatureTable table{FeatureSchema::mean_rgb(), spec.class_names, {}};
  table.rows.resize(spec.n_classes * per_class);
  parallel_for(table.rows.size(), 0, [&](std::size_t job) {
    const std::size_t label = job / per_class;
    const SynthImage image = render_synth_image(spec, label, split, job % per_class, false);
    table.rows[job] = {label, split, mean_rgb(image.pixels).values};
  });
  return table;
}

double synth_forest_accuracy(const SynthSpec& spec) {
  const FeatureTable train = synth_mean_rgb(spec, Split::train);
  const FeatureTable test = synth_mean_rgb(spec, Split::test);
  ForestParams params;
  params.n_trees = 200;
  const RandomForest forest = train_forest(train, params, 0);
  return evaluate(forest, test).accuracy;
}

void real_data() {
  const char* root = std::getenv("PATCHAUDIT_NCT_ROOT");
  const std::string name = "real-data reproduction";
  if (root == nullptr || *root == '\0') {
    std::cout << "SKIP " << name << ": PATCHAUDIT_NCT_ROOT not set" << std::endl;
    return;
  }
  ScratchDir out("nct");
  ReproOptions options;
  options.dataset_root = root;
  options.out_dir = out.path();
  std::ostringstream log;
  const ReproResult r = run_repro(options, log);
  const double m_acc = 100 * r.mean_rgb.accuracy, m_ba = 100 * r.mean_rgb.balanced_accuracy;
  const double h_acc = 100 * r.histogram.accuracy, h_ba = 100 * r.histogram.balanced_accuracy;
  const bool pass = std::abs(m_acc - 53.8) <= 3.0 && std::abs(m_ba - 50.51) <= 3.0 && std::abs(h_acc - 82.2) <= 3.0 &&
                    std::abs(h_ba - 76.17) <= 3.0;
  report(name, pass,
         "mean-RGB acc " + fmt(m_acc) + " BA " + fmt(m_ba) + ", histogram acc " + fmt(h_acc) + " BA " + fmt(h_ba));
}

void synth_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const SynthSpec signature = color_signature_spec(500, 100, 0);
  double min_gap = 1e9;
  for (std::size_t a = 0; a < signature.class_means.size(); ++a) {
    for (std::size_t b = a + 1; b < signature.class_means.size(); ++b) {
      double d2 = 0;
      for (int c = 0; c < 3; ++c) {
        const double d = double(signature.class_means[a][c]) - signature.class_means[b][c];
        d2 += d * d;
      }
      min_gap = std::min(min_gap, std::sqrt(d2));
    }
  }
  const double signal = 100 * synth_forest_accuracy(signature);
  const double control = 100 * synth_forest_accuracy(identical_means_spec(500, 100, 0));
  const double elapsed = seconds_since(start);
  const bool pass = min_gap >= 40 && signature.noise_sigma == 20.0 && signal >= 90.0 && std::abs(control - 100.0 / 9) <= 5.0 &&
                    elapsed <= 120.0;
  report("synthetic colour-signature oracle", pass,
         "min mean gap " + fmt(min_gap, 1) + ", signature acc " + fmt(signal) + "%, identical-means acc " +
             fmt(control) + "%, " + fmt(elapsed, 1) + " s");
}

double ranking_auc(const std::vector<double>& positive, const std::vector<double>& negative) {
  double wins = 0;
  for (double p : positive) {
    for (double n : negative) {
      wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
    }
  }
  return wins / (double(positive.size()) * double(negative.size()));
}

void forensics_oracle() {
  const CalibrationSettings settings;
  std::vector<double> low, high;
  for (int q : {20, 30, 40}) {
    const auto s = calibration_scores(q, settings);
    low.insert(low.end(), s.begin(), s.end());
  }
  for (int q : {85, 90, 95}) {
    const auto s = calibration_scores(q, settings);
    high.insert(high.end(), s.begin(), s.end());
  }
  const double auc = ranking_auc(low, high);

  std::vector<double> medians;
  bool monotone = true;
  std::string curve;
  for (int q : {20, 40, 60, 80, 95}) {
    medians.push_back(summarize(calibration_scores(q, settings)).median);
    curve += (curve.empty() ? "" : " ") + std::string("q") + std::to_string(q) + "=" + fmt(medians.back(), 3);
    if (medians.size() > 1 && medians.back() > medians[medians.size() - 2]) {
      monotone = false;
    }
  }

  SynthSpec spec;
  spec.n_classes = 2;
  spec.class_names = {"clean", "clipped"};
  spec.train_per_class = 60;
  spec.test_per_class = 0;
  spec.class_means = {{170, 120, 150}, {170, 120, 150}};
  spec.class_blue_clip = {std::nullopt, 0.06};
  spec.normalize();
  std::size_t clipped_flagged = 0, clean_flagged = 0;
  for (std::size_t i = 0; i < spec.train_per_class; ++i) {
    const SynthImage clean = render_synth_image(spec, 0, Split::train, i);
    const SynthImage clipped = render_synth_image(spec, 1, Split::train, i);
    clean_flagged += clipping_stats(decode_image(clean.file_bytes, "clean"), 0.05).corrupted;
    clipped_flagged += clipping_stats(decode_image(clipped.file_bytes, "clipped"), 0.05).corrupted;
  }
  const std::size_t n = spec.train_per_class;
  const bool pass = auc >= 0.95 && monotone && clipped_flagged == n && clean_flagged == 0;
  report("forensics oracle", pass,
         "AUC " + fmt(auc, 4) + ", medians " + curve + (monotone ? " (monotone)" : " (not monotone)") +
             ", clipped flagged " + std::to_string(clipped_flagged) + "/" + std::to_string(n) +
             ", clean flagged " + std::to_string(clean_flagged) + "/" + std::to_string(n));
}

void numerics() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0, 1);
  double worst_gradient = 0;
  for (int config = 0; config < 20; ++config) {
    const std::size_t classes = 2 + config % 5;
    const std::size_t dimension = 1 + config % 6;
    const double l2 = 0.05 * (config % 3);
    Design d;
    d.rows = 4 + config;
    d.cols = dimension + 1;
    for (std::size_t r = 0; r < d.rows; ++r) {
      for (std::size_t j = 0; j < dimension; ++j) {
        d.values.push_back(normal(rng));
      }
      d.values.push_back(1.0);
      d.labels.push_back(rng() % classes);
    }
    std::vector<double> w(classes * d.cols);
    for (double& v : w) {
      v = 0.5 * normal(rng);
    }
    const auto analytic = softmax_objective(w, d, classes, l2);
    const double h = 1e-5;
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto plus = w, minus = w;
      plus[i] += h;
      minus[i] -= h;
      const double numeric =
          (softmax_objective(plus, d, classes, l2).loss - softmax_objective(minus, d, classes, l2).loss) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(analytic.gradient[i]), 1e-8});
      worst_gradient = std::max(worst_gradient, std::abs(numeric - analytic.gradient[i]) / denom);
    }
  }

  double worst_sum = 0;
  std::uniform_int_distribution<int> size(1, 96), byte(0, 255), bins_pick(0, 3);
  const std::size_t bin_choices[] = {4, 8, 16, 256};
  for (int i = 0; i < 1000; ++i) {
    RgbImage image{std::size_t(size(rng)), std::size_t(size(rng)), {}};
    image.pixels.resize(image.width * image.height * 3);
    for (auto& v : image.pixels) {
      v = static_cast<std::uint8_t>(byte(rng));
    }
    const std::size_t bins = bin_choices[bins_pick(rng)];
    const auto h = color_histogram(image, bins).values;
    for (int c = 0; c < 3; ++c) {
      double sum = 0;
      for (std::size_t b = 0; b < bins; ++b) {
        sum += h[c * bins + b];
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
  }

  const ConfusionMatrix cm(std::vector<std::vector<std::uint64_t>>{{9, 1}, {1, 4}});
  const double ba = cm.balanced_accuracy();
  const bool pass = worst_gradient < 1e-4 && worst_sum <= 1e-9 && ba == 0.85;
  std::ostringstream detail;
  detail << "max gradient rel err " << worst_gradient << ", max |hist sum - 1| " << worst_sum << ", BA "
         << fmt(ba, 15);
  report("numerical properties", pass, detail.str());
}

// Shared written corpus for the determinism and perturbation criteria.
struct WrittenCorpus {
  ScratchDir dir{"synth"};
  SynthCorpus corpus;
  WrittenCorpus() { corpus = generate_corpus(color_signature_spec(40, 20, 0), dir.path() / "data"); }
};

void determinism(const WrittenCorpus& data) {
  std::vector<fs::path> outs;
  std::vector<std::string> logs;
  for (std::size_t threads : {1u, 8u, 1u}) {
    ReproOptions options;
    options.dataset_root = data.dir.path() / "data";
    options.out_dir = data.dir.path() / ("repro_" + std::to_string(outs.size()));
    options.seed = 0;
    options.threads = threads;
    std::ostringstream log;
    run_repro(options, log);
    outs.push_back(options.out_dir);
    logs.push_back(log.str());
  }
  std::vector<std::string> differing;
  std::size_t compared = 0;
  for (const char* name : {"train_manifest.csv", "test_manifest.csv", "features_mean_rgb.csv", "features_hist.csv",
                           "model_mean_rgb.json", "model_hist.json", "repro_report.json"}) {
    const auto reference = read_file_bytes(outs[0] / name);
    for (std::size_t i = 1; i < outs.size(); ++i) {
      ++compared;
      if (read_file_bytes(outs[i] / name) != reference) {
        differing.push_back(std::string(name) + "@run" + std::to_string(i));
      }
    }
  }
  const bool same_log = logs[0] == logs[1] && logs[0] == logs[2];
  std::string detail = std::to_string(compared) + " file comparisons across threads 1/8/1";
  for (const auto& d : differing) {
    detail += ", differs: " + d;
  }
  report("determinism", differing.empty() && same_log, detail + (same_log ? "" : ", console output differs"));
}

void perturbation_contract(const WrittenCorpus& data) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> byte(0, 255);
  RgbImage pixels{1000, 1, std::vector<std::uint8_t>(3000)};
  for (auto& v : pixels.pixels) {
    v = static_cast<std::uint8_t>(byte(rng));
  }
  int worst = 0;
  for (double delta : {10.0, -20.0, 37.5, 120.0, 200.0}) {
    const RgbImage back = hue_shift(hue_shift(pixels, delta), -delta);
    for (std::size_t i = 0; i < back.pixels.size(); ++i) {
      worst = std::max(worst, std::abs(int(back.pixels[i]) - int(pixels.pixels[i])));
    }
  }
  const RgbImage green = hue_shift(make_solid(1, 1, 255, 0, 0), 120.0);
  const bool red_to_green = green.pixels == std::vector<std::uint8_t>{0, 255, 0};

  ForestParams params;
  const RandomForest model = train_forest(
      featurize_corpus(data.corpus.train, Extractor{FeatureSchema::Kind::mean_rgb, 0}, LoadOptions{}), params, 0);
  const RobustnessTable sweep = robustness_sweep(model, data.corpus.test, Extractor::parse("mean-rgb"),
                                                 PerturbationSpec{{}, {-10.0, 10.0, -20.0, 20.0}}, 0);
  const auto delta = [&](const char* id) { return std::abs(sweep.find(id)->delta_accuracy); };
  const bool monotone = delta("hue_+20") >= delta("hue_+10") && delta("hue_-20") >= delta("hue_-10");
  report("perturbation contract", worst <= 2 && red_to_green && monotone,
         "round-trip max dev " + std::to_string(worst) + ", red+120 -> " + (red_to_green ? "pure green" : "other") +
             ", |delta| hue-10 " + fmt(100 * delta("hue_-10")) + " hue+10 " + fmt(100 * delta("hue_+10")) +
             " hue-20 " + fmt(100 * delta("hue_-20")) + " hue+20 " + fmt(100 * delta("hue_+20")) + " points");
}

template <typename F>
void guarded(const std::string& name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded("real-data reproduction", real_data);
  guarded("synthetic colour-signature oracle", synth_oracle);
  guarded("forensics oracle", forensics_oracle);
  guarded("numerical properties", numerics);
  try {
    const WrittenCorpus data;
    guarded("determinism", [&] { determinism(data); });
    guarded("perturbation contract", [&] { perturbation_contract(data); });
  } catch (const std::exception& e) {
    report("determinism", false, std::string("corpus generation failed: ") + e.what());
    report("perturbation contract", false, std::string("corpus generation failed: ") + e.what());
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
