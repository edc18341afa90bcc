#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "patchaudit/cli.hpp"
#include "patchaudit/corpus.hpp"
#include "patchaudit/features.hpp"

namespace patchaudit {

namespace fs = std::filesystem;

namespace {

using Json = nlohmann::ordered_json;

constexpr int kReproFormatVersion = 1;

std::pair<fs::path, fs::path> split_roots(const fs::path& root) {
  if (fs::is_directory(root / "train") && fs::is_directory(root / "test")) {
    return {root / "train", root / "test"};
  }
  if (fs::is_directory(root / "NCT-CRC-HE-100K") && fs::is_directory(root / "CRC-VAL-HE-7K")) {
    return {root / "NCT-CRC-HE-100K", root / "CRC-VAL-HE-7K"};
  }
  throw std::runtime_error(root.string() +
                           " holds neither train/ and test/ nor NCT-CRC-HE-100K/ and CRC-VAL-HE-7K/");
}

FeatureTable featurize_both(const CorpusManifest& train, const CorpusManifest& test, const Extractor& extractor,
                            const LoadOptions& load, std::vector<std::string>& warnings) {
  FeatureTable table = featurize_corpus(train, extractor, load, &warnings);
  FeatureTable test_table = featurize_corpus(test, extractor, load, &warnings);
  table.rows.insert(table.rows.end(), std::make_move_iterator(test_table.rows.begin()),
                    std::make_move_iterator(test_table.rows.end()));
  return table;
}

std::string pct(double fraction) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * fraction;
  return s.str();
}

Json evaluation_json(const std::string& features, const Evaluation& e, const std::vector<std::string>& names) {
  Json j;
  j["features"] = features;
  j["classifier"] = "random_forest";
  j["accuracy"] = e.accuracy;
  j["balanced_accuracy"] = e.balanced_accuracy;
  Json recall;
  for (std::size_t c = 0; c < names.size(); ++c) {
    recall[names[c]] = e.recall[c] ? Json(*e.recall[c]) : Json(nullptr);
  }
  j["per_class_recall"] = recall;
  Json confusion = Json::array();
  for (std::size_t t = 0; t < names.size(); ++t) {
    Json row = Json::array();
    for (std::size_t p = 0; p < names.size(); ++p) {
      row.push_back(e.confusion.at(t, p));
    }
    confusion.push_back(row);
  }
  j["confusion"] = confusion;
  return j;
}

}  // namespace

ReproResult run_repro(const ReproOptions& options, std::ostream& log) {
  const auto [train_root, test_root] = split_roots(options.dataset_root);
  fs::create_directories(options.out_dir);
  const fs::path& out = options.out_dir;

  CorpusManifest train = scan_corpus(train_root, Split::train);
  CorpusManifest test = scan_corpus(test_root, Split::test);
  if (train.class_names != test.class_names) {
    throw std::runtime_error("train and test roots hold different class directories");
  }
  write_manifest(train, out / "train_manifest.csv");
  write_manifest(test, out / "test_manifest.csv");

  const LoadOptions load{options.threads, options.strict};
  std::vector<std::string> warnings = train.warnings;
  warnings.insert(warnings.end(), test.warnings.begin(), test.warnings.end());

  const Extractor mean_extractor{FeatureSchema::Kind::mean_rgb, 0};
  const Extractor hist_extractor{FeatureSchema::Kind::histogram, options.bins};
  const FeatureTable mean_table = featurize_both(train, test, mean_extractor, load, warnings);
  const FeatureTable hist_table = featurize_both(train, test, hist_extractor, load, warnings);
  write_feature_csv(mean_table, out / "features_mean_rgb.csv");
  write_feature_csv(hist_table, out / "features_hist.csv");

  ForestParams params;
  params.n_trees = options.n_trees;
  params.seed = options.seed;
  const RandomForest mean_forest = train_forest(mean_table.filter(Split::train), params, options.threads);
  const RandomForest hist_forest = train_forest(hist_table.filter(Split::train), params, options.threads);
  save_model(mean_forest, out / "model_mean_rgb.json");
  save_model(hist_forest, out / "model_hist.json");

  ReproResult result;
  result.class_names = train.class_names;
  result.train_images = mean_table.filter(Split::train).rows.size();
  result.test_images = mean_table.filter(Split::test).rows.size();
  result.mean_rgb = evaluate(mean_forest, mean_table.filter(Split::test));
  result.histogram = evaluate(hist_forest, hist_table.filter(Split::test));

  const auto& names = result.class_names;
  Json report;
  report["format_version"] = kReproFormatVersion;
  report["seed"] = options.seed;
  report["n_trees"] = options.n_trees;
  report["bins"] = options.bins;
  report["class_names"] = names;
  report["train_images"] = result.train_images;
  report["test_images"] = result.test_images;
  report["results"] = Json::array({evaluation_json(mean_table.schema.name(), result.mean_rgb, names),
                                   evaluation_json(hist_table.schema.name(), result.histogram, names)});
  report["warnings"] = warnings;
  {
    std::ofstream file(out / "repro_report.json", std::ios::binary | std::ios::trunc);
    if (!file) {
      throw std::runtime_error("cannot write " + (out / "repro_report.json").string());
    }
    file << report.dump(2) << '\n';
  }

  for (const auto& w : warnings) {
    log << "warning: " << w << '\n';
  }
  log << "train images " << result.train_images << ", test images " << result.test_images << ", classes "
      << names.size() << "\n\n";
  log << "Per-class test accuracy (%)\n";
  log << std::left << std::setw(12) << "class" << std::right << std::setw(12) << "mean-RGB" << std::setw(12)
      << "histogram" << '\n';
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto& a = result.mean_rgb.recall[c];
    const auto& b = result.histogram.recall[c];
    log << std::left << std::setw(12) << names[c] << std::right << std::setw(12) << (a ? pct(*a) : "n/a")
        << std::setw(12) << (b ? pct(*b) : "n/a") << '\n';
  }
  log << std::left << std::setw(12) << "overall" << std::right << std::setw(12) << pct(result.mean_rgb.accuracy)
      << std::setw(12) << pct(result.histogram.accuracy) << "\n\n";
  log << std::left << std::setw(36) << "method" << std::right << std::setw(10) << "BA" << std::setw(10) << "ACC"
      << '\n';
  log << std::left << std::setw(36) << "Mean RGB + Random Forest" << std::right << std::setw(10)
      << pct(result.mean_rgb.balanced_accuracy) << std::setw(10) << pct(result.mean_rgb.accuracy) << '\n';
  log << std::left << std::setw(36) << "Color histogram + Random Forest" << std::right << std::setw(10)
      << pct(result.histogram.balanced_accuracy) << std::setw(10) << pct(result.histogram.accuracy) << '\n';
  return result;
}

}  // namespace patchaudit
