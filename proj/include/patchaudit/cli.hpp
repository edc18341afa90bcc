#pragma once

// Command-line front end. Exit codes: 0 success, 1 runtime failure, 2 usage
// error.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "patchaudit/classifier.hpp"

namespace patchaudit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

struct ReproOptions {
  std::filesystem::path dataset_root;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  bool strict = false;
  std::size_t n_trees = 200;
  std::size_t bins = 16;
};

struct ReproResult {
  std::vector<std::string> class_names;
  std::size_t train_images = 0;
  std::size_t test_images = 0;
  Evaluation mean_rgb;
  Evaluation histogram;
};

/// Train/test roots are dataset_root/{train,test} or, for the public NCT
/// release, dataset_root/{NCT-CRC-HE-100K,CRC-VAL-HE-7K}. Writes manifests,
/// feature CSVs, both models and repro_report.json into out_dir and prints
/// the comparison tables to `log`.
ReproResult run_repro(const ReproOptions& options, std::ostream& log);

}  // namespace patchaudit
