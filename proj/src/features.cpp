#include "patchaudit/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "patchaudit/csv.hpp"
#include "patchaudit/error.hpp"
#include "patchaudit/kernels.hpp"
#include "patchaudit/parallel.hpp"

namespace patchaudit {

namespace fs = std::filesystem;

std::string FeatureSchema::name() const {
  switch (kind) {
    case Kind::mean_rgb:
      return "mean-rgb-3";
    case Kind::histogram:
      return "hist-3x" + std::to_string(bins);
    case Kind::external:
      return "external-" + std::to_string(dimension);
  }
  return "unknown";
}

namespace {

std::optional<std::size_t> parse_size(std::string_view text) {
  std::size_t value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

FeatureSchema FeatureSchema::parse(std::string_view text) {
  if (text == "mean-rgb-3") {
    return mean_rgb();
  }
  if (text.starts_with("hist-3x")) {
    if (auto bins = parse_size(text.substr(7)); bins && *bins > 0) {
      return histogram(*bins);
    }
  }
  if (text.starts_with("external-")) {
    if (auto dim = parse_size(text.substr(9)); dim && *dim > 0) {
      return external(*dim);
    }
  }
  throw ArgumentError("unknown feature schema '" + std::string(text) + "'");
}

void FeatureTable::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.values.size() != schema.dimension) {
      throw ArgumentError("row " + std::to_string(i) + " has " + std::to_string(row.values.size()) +
                          " values, schema " + schema.name() + " needs " +
                          std::to_string(schema.dimension));
    }
    if (row.label >= class_names.size()) {
      throw ArgumentError("row " + std::to_string(i) + " label out of range");
    }
    for (double v : row.values) {
      if (!std::isfinite(v)) {
        throw ArgumentError("row " + std::to_string(i) + " holds a non-finite value");
      }
    }
  }
}

FeatureTable FeatureTable::filter(Split split) const {
  FeatureTable out{schema, class_names, {}};
  for (const auto& row : rows) {
    if (row.split == split) {
      out.rows.push_back(row);
    }
  }
  return out;
}

FeatureVector mean_rgb(const RgbImage& image) {
  image.validate();
  const auto sums = kernels::active().channel_sums(image.rgb());
  const auto n = static_cast<double>(image.pixel_count());
  return {FeatureSchema::mean_rgb(),
          {static_cast<double>(sums[0]) / n, static_cast<double>(sums[1]) / n,
           static_cast<double>(sums[2]) / n}};
}

FeatureVector color_histogram(const RgbImage& image, std::size_t bins) {
  if (bins == 0) {
    throw ArgumentError("histogram bin count must be positive");
  }
  if (bins > 65536) {
    throw ArgumentError("histogram bin count must not exceed 65536");
  }
  image.validate();
  std::vector<std::uint64_t> counts(3 * bins, 0);
  kernels::active().histogram_counts(image.rgb(), static_cast<unsigned>(bins), counts);
  const auto n = static_cast<double>(image.pixel_count());
  FeatureVector fv{FeatureSchema::histogram(bins), std::vector<double>(3 * bins)};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    fv.values[i] = static_cast<double>(counts[i]) / n;
  }
  return fv;
}

FeatureSchema Extractor::schema() const {
  return kind == FeatureSchema::Kind::histogram ? FeatureSchema::histogram(bins) : FeatureSchema::mean_rgb();
}

FeatureVector Extractor::operator()(const RgbImage& image) const {
  return kind == FeatureSchema::Kind::histogram ? color_histogram(image, bins) : mean_rgb(image);
}

Extractor Extractor::parse(std::string_view text, std::size_t bins) {
  if (text == "mean-rgb") {
    return {FeatureSchema::Kind::mean_rgb, bins};
  }
  if (text == "hist") {
    if (bins == 0) {
      throw ArgumentError("histogram bin count must be positive");
    }
    return {FeatureSchema::Kind::histogram, bins};
  }
  throw ArgumentError("unknown extractor '" + std::string(text) + "' (expected mean-rgb or hist)");
}

Extractor Extractor::for_schema(const FeatureSchema& schema) {
  switch (schema.kind) {
    case FeatureSchema::Kind::mean_rgb:
      return {FeatureSchema::Kind::mean_rgb, 16};
    case FeatureSchema::Kind::histogram:
      return {FeatureSchema::Kind::histogram, schema.bins};
    case FeatureSchema::Kind::external:
      break;
  }
  throw ArgumentError("schema " + schema.name() + " cannot be computed from pixels");
}

FeatureTable featurize_corpus(const CorpusManifest& manifest, const Extractor& extractor,
                              const LoadOptions& options, std::vector<std::string>* warnings) {
  const std::size_t n = manifest.entries.size();
  std::vector<std::optional<FeatureRow>> slots(n);
  std::vector<std::string> errors(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    try {
      const LabeledImage image = load_image(manifest, entry);
      slots[i] = FeatureRow{entry.label, entry.split, extractor(image).values};
    } catch (const DecodeError& e) {
      if (options.strict) {
        throw;
      }
      errors[i] = e.what();
    }
  });
  FeatureTable table{extractor.schema(), manifest.class_names, {}};
  table.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) {
      table.rows.push_back(std::move(*slots[i]));
    } else if (warnings != nullptr) {
      warnings->push_back("skipped " + errors[i]);
    }
  }
  return table;
}

void write_feature_csv(const FeatureTable& table, const fs::path& path) {
  table.validate();
  std::ostringstream out;
  out << "# schema: " << table.schema.name() << '\n';
  out << "# classes: " << format_class_list(table.class_names) << '\n';
  out << "label,split";
  for (std::size_t d = 0; d < table.schema.dimension; ++d) {
    out << ",f" << d;
  }
  out << '\n';
  for (const auto& row : table.rows) {
    out << csv::escape(table.class_names[row.label]) << ',' << to_string(row.split);
    for (double v : row.values) {
      out << ',' << csv::format_double(v);
    }
    out << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw std::runtime_error("cannot write feature file " + path.string());
  }
  file << out.str();
}

namespace {

FeatureTable parse_feature_csv(const fs::path& path, const std::vector<std::string>* forced_classes,
                               bool external) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open feature file " + path.string());
  }
  const std::string source = path.string();
  std::optional<FeatureSchema> declared;
  std::vector<std::string> class_names;
  bool have_classes = false;
  if (forced_classes != nullptr) {
    class_names = *forced_classes;
    have_classes = true;
  }
  std::map<std::string, std::size_t> index_of;
  FeatureTable table;
  bool have_header = false;
  std::size_t dimension = 0;
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
    if (line.starts_with('#')) {
      if (line.starts_with("# schema:") && !external) {
        std::string text = line.substr(9);
        text.erase(0, text.find_first_not_of(' '));
        try {
          declared = FeatureSchema::parse(text);
        } catch (const ArgumentError& e) {
          throw ParseError(source, line_number, e.what());
        }
      } else if (line.starts_with("# classes:") && forced_classes == nullptr) {
        class_names = parse_class_list(line.substr(10));
        have_classes = true;
      }
      continue;
    }
    std::vector<std::string> fields;
    try {
      fields = csv::split(line);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_number, e.what());
    }
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "label" || fields[1] != "split") {
        throw ParseError(source, line_number, "expected header 'label,split,f0,...'");
      }
      if (!have_classes) {
        throw ParseError(source, line_number, "missing '# classes:' line before header");
      }
      dimension = fields.size() - 2;
      for (std::size_t i = 0; i < class_names.size(); ++i) {
        index_of[class_names[i]] = i;
      }
      if (external || !declared) {
        table.schema = FeatureSchema::external(dimension);
      } else {
        table.schema = *declared;
        if (table.schema.dimension != dimension) {
          throw ParseError(source, line_number,
                           "header has " + std::to_string(dimension) + " feature columns but schema " +
                               table.schema.name() + " needs " + std::to_string(table.schema.dimension));
        }
      }
      table.class_names = class_names;
      have_header = true;
      continue;
    }
    if (fields.size() != dimension + 2) {
      throw ParseError(source, line_number,
                       "expected " + std::to_string(dimension + 2) + " fields, found " +
                           std::to_string(fields.size()));
    }
    const auto label = index_of.find(fields[0]);
    if (label == index_of.end()) {
      throw ParseError(source, line_number, "unknown label '" + fields[0] + "'");
    }
    FeatureRow row;
    row.label = label->second;
    try {
      row.split = parse_split(fields[1]);
    } catch (const ArgumentError& e) {
      throw ParseError(source, line_number, e.what());
    }
    row.values.reserve(dimension);
    for (std::size_t d = 0; d < dimension; ++d) {
      double value = 0.0;
      try {
        value = csv::parse_double(fields[d + 2]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(source, line_number, e.what());
      }
      if (!std::isfinite(value)) {
        throw ParseError(source, line_number, "non-finite value in column f" + std::to_string(d));
      }
      row.values.push_back(value);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) {
    throw ParseError(source, line_number, "missing header 'label,split,f0,...'");
  }
  return table;
}

}  // namespace

FeatureTable read_feature_csv(const fs::path& path) { return parse_feature_csv(path, nullptr, false); }

FeatureTable load_external_features(const fs::path& path, const std::vector<std::string>& class_names) {
  return parse_feature_csv(path, &class_names, true);
}

}  // namespace patchaudit
