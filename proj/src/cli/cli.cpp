#include "patchaudit/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "patchaudit/corpus.hpp"
#include "patchaudit/csv.hpp"
#include "patchaudit/error.hpp"
#include "patchaudit/features.hpp"
#include "patchaudit/forensics.hpp"
#include "patchaudit/perturb.hpp"
#include "patchaudit/synth.hpp"

namespace patchaudit {

namespace fs = std::filesystem;

namespace {

// Invalid flag combinations found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  bool strict = false;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw std::runtime_error("cannot write " + path.string());
  }
  file << text;
  if (!file) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) {
    err << "warning: " << w << '\n';
  }
}

std::string percent(double fraction) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * fraction;
  return s.str();
}

Extractor make_extractor(const std::string& name, std::size_t bins) {
  try {
    return Extractor::parse(name, bins);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  if (text.empty()) {
    return out;
  }
  for (const auto& field : csv::split(text)) {
    try {
      if constexpr (std::is_same_v<T, int>) {
        std::size_t used = 0;
        const int v = std::stoi(field, &used);
        if (used != field.size()) {
          throw std::invalid_argument(field);
        }
        out.push_back(v);
      } else {
        out.push_back(csv::parse_double(field));
      }
    } catch (const std::exception&) {
      throw UsageError(std::string("bad value '") + field + "' in " + what);
    }
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audit image-patch corpora for colour, compression and clipping bias."};
  app.name("patchaudit");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Master seed")->default_val(0);
  app.add_option("--threads", common.threads, "Worker threads, 0 = all cores")->default_val(0);
  app.add_flag("--strict", common.strict, "Abort on the first undecodable image");

  // scan
  auto* scan = app.add_subcommand("scan", "List a directory-per-class corpus into a manifest");
  fs::path scan_root;
  fs::path scan_out;
  std::string scan_split = "train";
  scan->add_option("root", scan_root, "Corpus root")->required()->check(CLI::ExistingDirectory);
  scan->add_option("--split", scan_split, "Split recorded for every entry")
      ->check(CLI::IsMember({"train", "test"}));
  scan->add_option("-o,--out", scan_out, "Manifest CSV")->required();

  // featurize
  auto* featurize = app.add_subcommand("featurize", "Extract colour features for a manifest");
  fs::path feat_manifest;
  fs::path feat_out;
  std::string feat_extractor = "hist";
  std::size_t feat_bins = 16;
  featurize->add_option("manifest", feat_manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  featurize->add_option("--extractor", feat_extractor, "mean-rgb or hist")
      ->check(CLI::IsMember({"mean-rgb", "hist"}));
  featurize->add_option("--bins", feat_bins, "Histogram bins per channel")->check(CLI::Range(1, 65536));
  featurize->add_option("-o,--out", feat_out, "Feature CSV")->required();

  // audit
  auto* audit = app.add_subcommand("audit", "Run the colour, blockiness and clipping detectors");
  fs::path audit_train;
  fs::path audit_test;
  fs::path audit_out;
  fs::path audit_csv_dir;
  AuditOptions audit_options;
  audit->add_option("train_manifest", audit_train, "Training manifest")->required()->check(CLI::ExistingFile);
  audit->add_option("--test", audit_test, "Test manifest")->check(CLI::ExistingFile);
  audit->add_option("-o,--out", audit_out, "Report JSON")->required();
  audit->add_option("--csv-dir", audit_csv_dir, "Directory for histogram and per-image CSVs");
  audit->add_option("--bins", audit_options.bins, "Histogram bins per channel")->check(CLI::Range(1, 65536));
  audit->add_option("--grid", audit_options.grid, "Block grid size")->check(CLI::Range(1, 4096));
  audit->add_option("--saturation-threshold", audit_options.saturation_threshold, "Clipping flag threshold")
      ->check(CLI::Range(0.0, 1.0));

  // train
  auto* train = app.add_subcommand("train", "Train a classifier on a feature CSV");
  fs::path train_features;
  fs::path train_out;
  std::string model_kind = "forest";
  ForestParams forest_params;
  bool no_bootstrap = false;
  SoftmaxParams softmax_params;
  bool no_standardize = false;
  train->add_option("features", train_features, "Feature CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--model", model_kind, "forest or softmax")->check(CLI::IsMember({"forest", "softmax"}));
  train->add_option("-o,--out", train_out, "Model JSON")->required();
  train->add_option("--trees", forest_params.n_trees, "Forest size")->check(CLI::Range(1, 100000));
  train->add_option("--max-depth", forest_params.max_depth, "Tree depth limit, 0 = none");
  train->add_option("--min-leaf", forest_params.min_samples_leaf, "Minimum samples per leaf")
      ->check(CLI::Range(1, 1 << 30));
  train->add_option("--mtry", forest_params.features_per_split, "Features per split, 0 = round(sqrt(D))");
  train->add_flag("--no-bootstrap", no_bootstrap, "Grow every tree on the full table");
  train->add_option("--lr", softmax_params.learning_rate, "Softmax learning rate")
      ->check(CLI::PositiveNumber);
  train->add_option("--epochs", softmax_params.epochs, "Softmax epochs")->check(CLI::Range(1, 10000000));
  train->add_option("--l2", softmax_params.l2, "Softmax L2 penalty")->check(CLI::NonNegativeNumber);
  train->add_flag("--no-standardize", no_standardize, "Feed raw features to the softmax probe");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a feature CSV");
  fs::path eval_model;
  fs::path eval_features;
  fs::path eval_out;
  eval->add_option("model", eval_model, "Model JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("features", eval_features, "Feature CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("-o,--out", eval_out, "Per-class CSV");

  // perturb
  auto* perturb = app.add_subcommand("perturb", "Robustness sweep over JPEG and hue perturbations");
  fs::path perturb_model;
  fs::path perturb_manifest;
  fs::path perturb_out;
  std::string perturb_jpeg = "80,60,40,20";
  std::string perturb_hue = "-10,10,-20,20";
  perturb->add_option("model", perturb_model, "Model JSON")->required()->check(CLI::ExistingFile);
  perturb->add_option("manifest", perturb_manifest, "Test manifest")->required()->check(CLI::ExistingFile);
  perturb->add_option("-o,--out", perturb_out, "Sweep CSV")->required();
  perturb->add_option("--jpeg", perturb_jpeg, "Comma-separated JPEG qualities");
  perturb->add_option("--hue", perturb_hue, "Comma-separated hue shifts in degrees");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with injected defects");
  fs::path synth_spec_path;
  fs::path synth_out;
  std::string synth_preset;
  std::size_t synth_train = 500;
  std::size_t synth_test = 100;
  synth->add_option("--spec", synth_spec_path, "Synth spec JSON")->check(CLI::ExistingFile);
  synth->add_option("--preset", synth_preset, "color-signature or identical-means")
      ->check(CLI::IsMember({"color-signature", "identical-means"}));
  synth->add_option("--train-per-class", synth_train, "Preset training images per class");
  synth->add_option("--test-per-class", synth_test, "Preset test images per class");
  synth->add_option("out_root", synth_out, "Output directory")->required();

  // repro
  auto* repro = app.add_subcommand("repro", "Scan, featurize, train and evaluate both colour baselines");
  ReproOptions repro_options;
  repro->add_option("dataset_root", repro_options.dataset_root, "Dataset root")->required()->check(
      CLI::ExistingDirectory);
  repro->add_option("-o,--out", repro_options.out_dir, "Output directory")->default_val("repro_out");
  repro->add_option("--trees", repro_options.n_trees, "Forest size")->check(CLI::Range(1, 100000));
  repro->add_option("--bins", repro_options.bins, "Histogram bins per channel")->check(CLI::Range(1, 65536));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "patchaudit 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  LoadOptions load{common.threads, common.strict};
  try {
    if (*scan) {
      const CorpusManifest manifest = scan_corpus(scan_root, parse_split(scan_split));
      print_warnings(manifest.warnings, err);
      write_manifest(manifest, scan_out);
      out << "scanned " << manifest.entries.size() << " images in " << manifest.class_names.size()
          << " classes\n";
    } else if (*featurize) {
      const Extractor extractor = make_extractor(feat_extractor, feat_bins);
      const CorpusManifest manifest = read_manifest(feat_manifest);
      std::vector<std::string> warnings;
      const FeatureTable table = featurize_corpus(manifest, extractor, load, &warnings);
      print_warnings(warnings, err);
      write_feature_csv(table, feat_out);
      out << "wrote " << table.rows.size() << " rows of " << table.schema.name() << '\n';
    } else if (*audit) {
      audit_options.load = load;
      const CorpusManifest train_manifest = read_manifest(audit_train);
      std::optional<CorpusManifest> test_manifest;
      if (!audit_test.empty()) {
        test_manifest = read_manifest(audit_test);
      }
      const AuditReport report =
          audit_corpus(train_manifest, test_manifest ? &*test_manifest : nullptr, audit_options);
      print_warnings(report.warnings, err);
      write_text(audit_out, audit_report_json(report));
      if (!audit_csv_dir.empty()) {
        fs::create_directories(audit_csv_dir);
        write_text(audit_csv_dir / "histograms_train.csv", histogram_csv(report, Split::train));
        if (test_manifest) {
          write_text(audit_csv_dir / "histograms_test.csv", histogram_csv(report, Split::test));
        }
        write_text(audit_csv_dir / "images.csv", image_audit_csv(report));
      }
      out << "audited " << report.images.size() << " images\n";
      for (const auto& c : report.train) {
        out << report.class_names[c.class_index] << ": blockiness median "
            << csv::format_double(c.blockiness.median) << ", clipped " << c.clipped << '/' << c.images << '\n';
      }
    } else if (*train) {
      const FeatureTable table = read_feature_csv(train_features).filter(Split::train);
      if (table.rows.empty()) {
        throw std::runtime_error("no training rows in " + train_features.string());
      }
      if (model_kind == "forest") {
        forest_params.bootstrap = !no_bootstrap;
        forest_params.seed = common.seed;
        save_model(train_forest(table, forest_params, common.threads), train_out);
      } else {
        softmax_params.seed = common.seed;
        softmax_params.standardize = !no_standardize;
        const SoftmaxProbe probe = train_softmax(table, softmax_params);
        out << "softmax: " << probe.epochs_run << " epochs, loss " << csv::format_double(probe.final_loss)
            << '\n';
        save_model(probe, train_out);
      }
      out << "trained " << model_kind << " on " << table.rows.size() << " rows\n";
    } else if (*eval) {
      const Classifier model = load_model(eval_model);
      const FeatureTable table = read_feature_csv(eval_features);
      const Evaluation result = evaluate(model, table);
      print_warnings(result.warnings, err);
      const auto& names = class_names_of(model);
      out << "accuracy " << percent(result.accuracy) << '\n';
      out << "balanced_accuracy " << percent(result.balanced_accuracy) << '\n';
      std::ostringstream per_class;
      per_class << "class,support,recall\n";
      for (std::size_t c = 0; c < names.size(); ++c) {
        const auto& r = result.recall[c];
        out << "  " << names[c] << ' ' << (r ? percent(*r) : "n/a") << '\n';
        per_class << csv::escape(names[c]) << ',' << result.confusion.support(c) << ','
                  << (r ? csv::format_double(*r) : "") << '\n';
      }
      if (!eval_out.empty()) {
        write_text(eval_out, per_class.str());
      }
    } else if (*perturb) {
      PerturbationSpec spec{parse_list<int>(perturb_jpeg, "--jpeg"), parse_list<double>(perturb_hue, "--hue")};
      try {
        spec.validate();
      } catch (const ArgumentError& e) {
        throw UsageError(e.what());
      }
      const Classifier model = load_model(perturb_model);
      const Extractor extractor = Extractor::for_schema(schema_of(model));
      const CorpusManifest manifest = read_manifest(perturb_manifest);
      const RobustnessTable table = robustness_sweep(model, manifest, extractor, spec, common.threads);
      print_warnings(table.warnings, err);
      write_robustness_csv(table, perturb_out);
      for (const auto& row : table.rows) {
        out << row.perturbation << ' ' << percent(row.accuracy) << " (" << (row.delta_accuracy >= 0 ? "+" : "")
            << percent(row.delta_accuracy) << ")\n";
      }
    } else if (*synth) {
      if (synth_spec_path.empty() == synth_preset.empty()) {
        throw UsageError("synth needs exactly one of --spec and --preset");
      }
      SynthSpec spec;
      if (!synth_spec_path.empty()) {
        spec = read_synth_spec(synth_spec_path);
        if (app.get_option("--seed")->count() > 0) {
          spec.seed = common.seed;
        }
      } else if (synth_preset == "color-signature") {
        spec = color_signature_spec(synth_train, synth_test, common.seed);
      } else {
        spec = identical_means_spec(synth_train, synth_test, common.seed);
      }
      const SynthCorpus corpus = generate_corpus(spec, synth_out, common.threads);
      write_text(synth_out / "synth_spec.json", synth_spec_to_json(spec));
      out << "generated " << corpus.train.entries.size() << " train and " << corpus.test.entries.size()
          << " test images\n";
    } else if (*repro) {
      repro_options.seed = common.seed;
      repro_options.threads = common.threads;
      repro_options.strict = common.strict;
      run_repro(repro_options, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    args.emplace_back(argv[i]);
  }
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace patchaudit
