#pragma once

// Directory-per-class corpora: scanning, manifest files and image loading.
//
// Manifest CSV layout:
//
//   # classes: ADI,BACK,...
//   # warning: <text>            (zero or more)
//   path,label,split
//   ADI/ADI-0001.tif,ADI,train
//
// `path` is relative to the directory holding the manifest; `label` is the
// class name, resolved to an index through the `# classes:` line.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "patchaudit/image.hpp"

namespace patchaudit {

struct ManifestEntry {
  std::string path;  // relative to CorpusManifest::root, '/' separated
  std::size_t label = 0;
  Split split = Split::train;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct CorpusManifest {
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;
  std::filesystem::path root;
  std::vector<std::string> warnings;

  /// Absolute-or-root-relative location of an entry on disk.
  std::filesystem::path resolve(const ManifestEntry& entry) const { return root / entry.path; }

  /// Throws ArgumentError on duplicate/empty class names, labels out of
  /// range or duplicate paths.
  void validate() const;

  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

/// File extensions accepted by scan_corpus (lower-case, with dot).
bool is_image_extension(const std::filesystem::path& path);

/// Every immediate subdirectory of `root` is a class; every image file directly
/// inside it is an entry. Classes sort lexicographically, entries by
/// (label, path). Empty class directories are kept and noted in `warnings`.
/// Throws std::runtime_error when root is missing.
CorpusManifest scan_corpus(const std::filesystem::path& root, Split split);

/// Decodes one entry. Throws DecodeError naming the path on failure.
LabeledImage load_image(const CorpusManifest& manifest, const ManifestEntry& entry);

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

/// The returned manifest's root is the manifest's own directory.
/// Throws ParseError with the 1-based line number on malformed rows.
CorpusManifest read_manifest(const std::filesystem::path& path);

/// Parses "A,B,C" from a `# classes:` comment body.
std::vector<std::string> parse_class_list(const std::string& text);
std::string format_class_list(const std::vector<std::string>& class_names);

}  // namespace patchaudit
