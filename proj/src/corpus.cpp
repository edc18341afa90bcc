#include "patchaudit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "patchaudit/csv.hpp"
#include "patchaudit/error.hpp"
#include "patchaudit/image_codec.hpp"

namespace patchaudit {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kClassesPrefix = "# classes:";
constexpr std::string_view kWarningPrefix = "# warning:";

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  return std::string(text.substr(begin, end - begin));
}

}  // namespace

void CorpusManifest::validate() const {
  std::set<std::string> names;
  for (const auto& name : class_names) {
    if (name.empty()) {
      throw ArgumentError("empty class name in manifest");
    }
    if (!names.insert(name).second) {
      throw ArgumentError("duplicate class name '" + name + "'");
    }
  }
  std::set<std::string> paths;
  for (const auto& entry : entries) {
    if (entry.label >= class_names.size()) {
      throw ArgumentError("entry '" + entry.path + "' has label " + std::to_string(entry.label) +
                          " but only " + std::to_string(class_names.size()) + " classes exist");
    }
    if (!paths.insert(entry.path).second) {
      throw ArgumentError("duplicate manifest path '" + entry.path + "'");
    }
  }
}

bool is_image_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".tif" || ext == ".tiff" || ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

CorpusManifest scan_corpus(const fs::path& root, Split split) {
  if (!fs::is_directory(root)) {
    throw std::runtime_error("corpus root does not exist or is not a directory: " + root.string());
  }
  CorpusManifest manifest;
  manifest.root = root;
  for (const auto& item : fs::directory_iterator(root)) {
    if (item.is_directory()) {
      manifest.class_names.push_back(item.path().filename().string());
    }
  }
  std::sort(manifest.class_names.begin(), manifest.class_names.end());
  for (std::size_t label = 0; label < manifest.class_names.size(); ++label) {
    const std::string& name = manifest.class_names[label];
    std::vector<std::string> files;
    for (const auto& item : fs::directory_iterator(root / name)) {
      if (item.is_regular_file() && is_image_extension(item.path())) {
        files.push_back(name + "/" + item.path().filename().string());
      }
    }
    if (files.empty()) {
      manifest.warnings.push_back("class directory '" + name + "' contains no images");
    }
    std::sort(files.begin(), files.end());
    for (auto& file : files) {
      manifest.entries.push_back({std::move(file), label, split});
    }
  }
  manifest.validate();
  return manifest;
}

LabeledImage load_image(const CorpusManifest& manifest, const ManifestEntry& entry) {
  const fs::path location = manifest.resolve(entry);
  LabeledImage image;
  static_cast<RgbImage&>(image) = read_image_file(location);
  image.label = entry.label;
  image.split = entry.split;
  image.source = location.string();
  return image;
}

std::vector<std::string> parse_class_list(const std::string& text) {
  std::vector<std::string> names;
  for (auto& field : csv::split(text)) {
    names.push_back(trim(field));
  }
  if (names.size() == 1 && names.front().empty()) {
    names.clear();
  }
  return names;
}

std::string format_class_list(const std::vector<std::string>& class_names) {
  return csv::join(class_names);
}

void write_manifest(const CorpusManifest& manifest, const fs::path& path) {
  manifest.validate();
  const fs::path base = fs::absolute(path).parent_path();
  const fs::path root = fs::absolute(manifest.root);
  std::ostringstream out;
  out << kClassesPrefix << ' ' << format_class_list(manifest.class_names) << '\n';
  for (const auto& warning : manifest.warnings) {
    out << kWarningPrefix << ' ' << warning << '\n';
  }
  out << "path,label,split\n";
  for (const auto& entry : manifest.entries) {
    const std::string relative = (root / entry.path).lexically_normal().lexically_relative(base).generic_string();
    out << csv::join({relative, manifest.class_names[entry.label], std::string(to_string(entry.split))})
        << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw std::runtime_error("cannot write manifest " + path.string());
  }
  file << out.str();
}

CorpusManifest read_manifest(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open manifest " + path.string());
  }
  const std::string source = path.string();
  CorpusManifest manifest;
  manifest.root = path.parent_path();
  std::map<std::string, std::size_t> index_of;
  bool have_classes = false;
  bool have_header = false;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(file, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line.starts_with(kClassesPrefix)) {
      manifest.class_names = parse_class_list(line.substr(kClassesPrefix.size()));
      for (std::size_t i = 0; i < manifest.class_names.size(); ++i) {
        index_of[manifest.class_names[i]] = i;
      }
      have_classes = true;
      continue;
    }
    if (line.starts_with(kWarningPrefix)) {
      manifest.warnings.push_back(trim(line.substr(kWarningPrefix.size())));
      continue;
    }
    if (line.starts_with('#')) {
      continue;
    }
    if (!have_header) {
      if (line != "path,label,split") {
        throw ParseError(source, line_number, "expected header 'path,label,split'");
      }
      if (!have_classes) {
        throw ParseError(source, line_number, "missing '# classes:' line before header");
      }
      have_header = true;
      continue;
    }
    std::vector<std::string> fields;
    try {
      fields = csv::split(line);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_number, e.what());
    }
    if (fields.size() != 3) {
      throw ParseError(source, line_number, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    const auto label = index_of.find(fields[1]);
    if (label == index_of.end()) {
      throw ParseError(source, line_number, "unknown class '" + fields[1] + "'");
    }
    Split split;
    try {
      split = parse_split(fields[2]);
    } catch (const ArgumentError& e) {
      throw ParseError(source, line_number, e.what());
    }
    if (fields[0].empty()) {
      throw ParseError(source, line_number, "empty path");
    }
    manifest.entries.push_back({fields[0], label->second, split});
  }
  if (!have_header) {
    throw ParseError(source, line_number, "missing header 'path,label,split'");
  }
  try {
    manifest.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(source, line_number, e.what());
  }
  return manifest;
}

}  // namespace patchaudit
