#include <sstream>

#include <json.hpp>

#include "patchaudit/csv.hpp"
#include "patchaudit/forensics.hpp"

namespace patchaudit {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kReportFormatVersion = 1;
constexpr const char* kChannels[3] = {"R", "G", "B"};

Json summary_json(const ScoreSummary& s) {
  Json j;
  j["count"] = s.count;
  j["min"] = s.min;
  j["q1"] = s.q1;
  j["median"] = s.median;
  j["q3"] = s.q3;
  j["max"] = s.max;
  j["iqr"] = s.iqr();
  return j;
}

Json color_entries_json(const ColorAudit& audit, const std::vector<std::string>& names, Split split) {
  Json out = Json::array();
  for (const auto& e : audit.entries) {
    Json j;
    j["class"] = names[e.class_index];
    j["split"] = to_string(split);
    j["samples"] = e.samples;
    j["centroid"] = e.centroid;
    j["mean_histogram"] = e.mean_histogram;
    out.push_back(std::move(j));
  }
  return out;
}

Json class_blockiness_json(const std::vector<ClassAudit>& classes, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (const auto& c : classes) {
    Json j;
    j["class"] = names[c.class_index];
    j["split"] = to_string(c.split);
    j["images"] = c.images;
    j["score"] = summary_json(c.blockiness);
    Json bands;
    for (std::size_t b = 0; b < 4; ++b) {
      bands[std::string(to_string(static_cast<QualityBand>(b)))] = c.band_counts[b];
    }
    j["bands"] = bands;
    out.push_back(std::move(j));
  }
  return out;
}

Json class_clipping_json(const std::vector<ClassAudit>& classes, const std::vector<std::string>& names) {
  Json out = Json::array();
  for (const auto& c : classes) {
    Json j;
    j["class"] = names[c.class_index];
    j["split"] = to_string(c.split);
    j["images"] = c.images;
    j["flagged"] = c.clipped;
    j["blue_top_bin_mass"] = c.blue_tail_mass;
    out.push_back(std::move(j));
  }
  return out;
}

Json split_summary_json(const std::vector<ClassAudit>& classes, const std::vector<std::string>& names) {
  Json j;
  std::size_t total = 0;
  Json per_class;
  for (const auto& c : classes) {
    per_class[names[c.class_index]] = c.images;
    total += c.images;
  }
  j["images"] = total;
  j["per_class"] = per_class;
  return j;
}

}  // namespace

std::string audit_report_json(const AuditReport& report) {
  const auto& names = report.class_names;
  Json j;
  j["format_version"] = kReportFormatVersion;

  Json corpus;
  corpus["class_names"] = names;
  corpus["train"] = split_summary_json(report.train, names);
  if (!report.test.empty()) {
    corpus["test"] = split_summary_json(report.test, names);
  }
  j["corpus"] = corpus;

  Json color = color_entries_json(report.color, names, Split::train);
  if (!report.test.empty()) {
    for (auto& e : color_entries_json(report.test_color, names, Split::test)) {
      color.push_back(std::move(e));
    }
  }
  j["color_audit"] = color;
  Json distances = Json::array();
  for (const auto& d : report.color.pairwise) {
    distances.push_back({{"a", names[d.a]}, {"b", names[d.b]}, {"l1", d.l1}});
  }
  j["class_distances"] = distances;

  Json blockiness;
  blockiness["grid"] = report.grid;
  const auto& cal = report.calibration;
  Json calibration;
  calibration["images_per_level"] = cal.settings.images_per_level;
  calibration["width"] = cal.settings.width;
  calibration["height"] = cal.settings.height;
  calibration["mean"] = cal.settings.mean;
  calibration["noise_sigma"] = cal.settings.noise_sigma;
  calibration["seed"] = cal.settings.seed;
  calibration["qualities"] = cal.qualities;
  calibration["medians"] = cal.medians;
  calibration["lossless_median"] = cal.lossless_median;
  calibration["boundaries"] = {{"severe", cal.boundaries[0]}, {"moderate", cal.boundaries[1]},
                               {"minor", cal.boundaries[2]}};
  blockiness["calibration"] = calibration;
  Json per_class = class_blockiness_json(report.train, names);
  for (auto& e : class_blockiness_json(report.test, names)) {
    per_class.push_back(std::move(e));
  }
  blockiness["per_class"] = per_class;
  j["blockiness"] = blockiness;

  Json clipping;
  clipping["threshold"] = report.saturation_threshold;
  Json clip_classes = class_clipping_json(report.train, names);
  for (auto& e : class_clipping_json(report.test, names)) {
    clip_classes.push_back(std::move(e));
  }
  clipping["per_class"] = clip_classes;
  j["clipping"] = clipping;

  Json shift = Json::array();
  for (std::size_t c = 0; c < report.color.train_test_shift.size(); ++c) {
    const auto& s = report.color.train_test_shift[c];
    shift.push_back({{"class", names[c]}, {"l1", s ? Json(*s) : Json(nullptr)}});
  }
  j["train_test_shift"] = shift;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string histogram_csv(const AuditReport& report, Split split) {
  const auto& classes = split == Split::train ? report.train : report.test;
  std::ostringstream out;
  out << "class,channel,bin,frequency\n";
  for (const auto& c : classes) {
    if (c.images == 0) {
      continue;
    }
    for (std::size_t ch = 0; ch < 3; ++ch) {
      for (std::size_t b = 0; b < report.bins; ++b) {
        out << csv::escape(report.class_names[c.class_index]) << ',' << kChannels[ch] << ',' << b << ','
            << csv::format_double(c.mean_histogram[ch * report.bins + b]) << '\n';
      }
    }
  }
  return out.str();
}

std::string image_audit_csv(const AuditReport& report) {
  std::ostringstream out;
  out << "path,class,split,mean_r,mean_g,mean_b,blockiness,band,blue_at_255,corrupted\n";
  for (const auto& img : report.images) {
    out << csv::escape(img.path) << ',' << csv::escape(report.class_names[img.label]) << ','
        << to_string(img.split);
    for (double v : img.mean_rgb) {
      out << ',' << csv::format_double(v);
    }
    out << ',' << (img.blockiness ? csv::format_double(*img.blockiness) : "") << ','
        << (img.band ? to_string(*img.band) : "") << ',' << csv::format_double(img.clipping.at_max[2]) << ','
        << (img.clipping.corrupted ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace patchaudit
