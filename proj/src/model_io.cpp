#include <fstream>
#include <sstream>

#include <json.hpp>

#include "patchaudit/classifier.hpp"
#include "patchaudit/error.hpp"

namespace patchaudit {

namespace {

using Json = nlohmann::ordered_json;

Json tree_to_json(const DecisionTree& tree) {
  Json j;
  j["feature"] = tree.feature;
  j["threshold"] = tree.threshold;
  j["left"] = tree.left;
  j["right"] = tree.right;
  j["leaf_begin"] = tree.leaf_begin;
  j["leaf_class"] = tree.leaf_class;
  j["leaf_count"] = tree.leaf_count;
  return j;
}

DecisionTree tree_from_json(const Json& j, std::size_t dimension, std::size_t n_classes) {
  DecisionTree tree;
  j.at("feature").get_to(tree.feature);
  j.at("threshold").get_to(tree.threshold);
  j.at("left").get_to(tree.left);
  j.at("right").get_to(tree.right);
  j.at("leaf_begin").get_to(tree.leaf_begin);
  j.at("leaf_class").get_to(tree.leaf_class);
  j.at("leaf_count").get_to(tree.leaf_count);
  const std::size_t n = tree.feature.size();
  if (n == 0 || tree.threshold.size() != n || tree.left.size() != n || tree.right.size() != n ||
      tree.leaf_begin.size() != n + 1 || tree.leaf_class.size() != tree.leaf_count.size() ||
      tree.leaf_begin.back() != tree.leaf_class.size()) {
    throw std::invalid_argument("inconsistent tree arrays");
  }
  for (std::size_t node = 0; node < n; ++node) {
    if (tree.leaf_begin[node] > tree.leaf_begin[node + 1]) {
      throw std::invalid_argument("leaf ranges are not monotone");
    }
    if (tree.feature[node] >= 0) {
      if (static_cast<std::size_t>(tree.feature[node]) >= dimension || tree.left[node] <= node ||
          tree.right[node] <= node || tree.left[node] >= n || tree.right[node] >= n) {
        throw std::invalid_argument("invalid internal node " + std::to_string(node));
      }
    } else if (tree.leaf_begin[node] == tree.leaf_begin[node + 1]) {
      throw std::invalid_argument("leaf " + std::to_string(node) + " has no class counts");
    }
  }
  for (auto k : tree.leaf_class) {
    if (k >= n_classes) {
      throw std::invalid_argument("leaf class out of range");
    }
  }
  return tree;
}

}  // namespace

std::string serialize_model(const Classifier& model) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = kind_of(model);
  j["schema"] = schema_of(model).name();
  j["class_names"] = class_names_of(model);
  if (const auto* forest = std::get_if<RandomForest>(&model)) {
    const ForestParams& p = forest->params;
    j["hyperparams"] = {{"n_trees", p.n_trees},
                        {"max_depth", p.max_depth},
                        {"min_samples_leaf", p.min_samples_leaf},
                        {"features_per_split", p.features_per_split},
                        {"bootstrap", p.bootstrap}};
    j["master_seed"] = p.seed;
    Json trees = Json::array();
    for (const auto& tree : forest->trees) {
      trees.push_back(tree_to_json(tree));
    }
    j["trees"] = std::move(trees);
  } else {
    const auto& probe = std::get<SoftmaxProbe>(model);
    const SoftmaxParams& p = probe.params;
    j["hyperparams"] = {{"learning_rate", p.learning_rate}, {"epochs", p.epochs},
                        {"l2", p.l2},                       {"standardize", p.standardize},
                        {"tolerance", p.tolerance}};
    j["master_seed"] = p.seed;
    j["epochs_run"] = probe.epochs_run;
    j["final_loss"] = probe.final_loss;
    j["feature_offset"] = probe.feature_offset;
    j["feature_scale"] = probe.feature_scale;
    j["weights"] = probe.weights;
  }
  return j.dump() + "\n";
}

Classifier deserialize_model(const std::string& text, const std::string& source) {
  try {
    const Json j = Json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw std::invalid_argument("unsupported model format version " + std::to_string(version));
    }
    const std::string kind = j.at("kind").get<std::string>();
    const FeatureSchema schema = FeatureSchema::parse(j.at("schema").get<std::string>());
    const auto class_names = j.at("class_names").get<std::vector<std::string>>();
    const Json& h = j.at("hyperparams");
    if (kind == "random_forest") {
      RandomForest forest;
      forest.schema = schema;
      forest.class_names = class_names;
      forest.params.n_trees = h.at("n_trees").get<std::size_t>();
      forest.params.max_depth = h.at("max_depth").get<std::size_t>();
      forest.params.min_samples_leaf = h.at("min_samples_leaf").get<std::size_t>();
      forest.params.features_per_split = h.at("features_per_split").get<std::size_t>();
      forest.params.bootstrap = h.at("bootstrap").get<bool>();
      forest.params.seed = j.at("master_seed").get<std::uint64_t>();
      for (const auto& t : j.at("trees")) {
        forest.trees.push_back(tree_from_json(t, schema.dimension, class_names.size()));
      }
      if (forest.trees.size() != forest.params.n_trees) {
        throw std::invalid_argument("tree count does not match n_trees");
      }
      return forest;
    }
    if (kind == "softmax_probe") {
      SoftmaxProbe probe;
      probe.schema = schema;
      probe.class_names = class_names;
      probe.params.learning_rate = h.at("learning_rate").get<double>();
      probe.params.epochs = h.at("epochs").get<std::size_t>();
      probe.params.l2 = h.at("l2").get<double>();
      probe.params.standardize = h.at("standardize").get<bool>();
      probe.params.tolerance = h.at("tolerance").get<double>();
      probe.params.seed = j.at("master_seed").get<std::uint64_t>();
      probe.epochs_run = j.at("epochs_run").get<std::size_t>();
      probe.final_loss = j.at("final_loss").get<double>();
      j.at("feature_offset").get_to(probe.feature_offset);
      j.at("feature_scale").get_to(probe.feature_scale);
      j.at("weights").get_to(probe.weights);
      if (probe.feature_offset.size() != schema.dimension || probe.feature_scale.size() != schema.dimension ||
          probe.weights.size() != class_names.size() * (schema.dimension + 1)) {
        throw std::invalid_argument("weight shapes do not match schema and class count");
      }
      return probe;
    }
    throw std::invalid_argument("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(source + ": malformed model file: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(source + ": malformed model file: " + e.what());
  }
}

void save_model(const Classifier& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write model " + path.string());
  }
  out << serialize_model(model);
}

Classifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open model " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return deserialize_model(text.str(), path.string());
}

}  // namespace patchaudit
