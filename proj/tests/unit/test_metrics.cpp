#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "patchaudit/classifier.hpp"
#include "patchaudit/error.hpp"
#include "test_util.hpp"

namespace patchaudit {
namespace {

using testing::TempDir;

TEST(Metrics, HandComputedConfusion) {
  const ConfusionMatrix m({{9, 1}, {1, 4}});
  EXPECT_EQ(m.total(), 15u);
  EXPECT_DOUBLE_EQ(m.accuracy(), 13.0 / 15.0);
  EXPECT_EQ(m.balanced_accuracy(), 0.85);
  EXPECT_DOUBLE_EQ(*m.recall(0), 0.9);
  EXPECT_DOUBLE_EQ(*m.recall(1), 0.8);
}

TEST(Metrics, EmptyClassExcludedFromBalancedAccuracy) {
  const ConfusionMatrix m({{3, 1, 0}, {0, 0, 0}, {0, 0, 2}});
  EXPECT_FALSE(m.recall(1).has_value());
  EXPECT_DOUBLE_EQ(m.balanced_accuracy(), (0.75 + 1.0) / 2);
}

TEST(Metrics, BalancedEqualsAccuracyOnBalancedSets) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    ConfusionMatrix m(4);
    for (std::size_t t = 0; t < 4; ++t) {
      for (int i = 0; i < 25; ++i) {
        m.add(t, rng() % 4);
      }
    }
    EXPECT_NEAR(m.balanced_accuracy(), m.accuracy(), 1e-12);
  }
}

FeatureTable blob_table(std::uint64_t seed) {
  FeatureTable t{FeatureSchema::mean_rgb(), {"a", "b", "c"}, {}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 15);
  for (int i = 0; i < 90; ++i) {
    const std::size_t label = static_cast<std::size_t>(i % 3);
    const double c = 60.0 * static_cast<double>(label + 1);
    t.rows.push_back({label, i % 4 == 0 ? Split::test : Split::train, {c + n(rng), 100 + n(rng), 200 - c + n(rng)}});
  }
  return t;
}

Classifier small_forest() {
  ForestParams p;
  p.n_trees = 15;
  p.seed = 4;
  return train_forest(blob_table(1).filter(Split::train), p, 1);
}

Classifier small_probe() {
  SoftmaxParams p;
  p.epochs = 100;
  return train_softmax(blob_table(1).filter(Split::train), p);
}

TEST(Evaluate, PerfectPredictorScoresOne) {
  FeatureTable t{FeatureSchema::external(1), {"a", "b"}, {}};
  for (int i = 0; i < 10; ++i) {
    t.rows.push_back({static_cast<std::size_t>(i % 2), Split::train, {static_cast<double>(i % 2)}});
  }
  ForestParams p;
  p.n_trees = 5;
  const Evaluation e = evaluate(train_forest(t, p, 1), t);
  EXPECT_EQ(e.accuracy, 1.0);
  EXPECT_EQ(e.balanced_accuracy, 1.0);
}

TEST(Evaluate, InvariantUnderRowPermutation) {
  const Classifier model = small_forest();
  FeatureTable t = blob_table(2);
  const Evaluation a = evaluate(model, t);
  std::mt19937_64 rng(3);
  std::shuffle(t.rows.begin(), t.rows.end(), rng);
  const Evaluation b = evaluate(model, t);
  EXPECT_EQ(a.confusion, b.confusion);
  EXPECT_EQ(a.accuracy, b.accuracy);
}

TEST(Evaluate, SchemaMismatchNamesBothSchemas) {
  const Classifier model = small_forest();
  FeatureTable hist{FeatureSchema::histogram(16), {"a", "b", "c"}, {}};
  try {
    evaluate(model, hist);
    FAIL();
  } catch (const ArgumentError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("mean-rgb-3"), std::string::npos);
    EXPECT_NE(what.find("hist-3x16"), std::string::npos);
  }
  FeatureTable renamed = blob_table(2);
  renamed.class_names = {"x", "y", "z"};
  EXPECT_THROW(evaluate(model, renamed), ArgumentError);
}

TEST(Evaluate, MissingTestClassWarns) {
  const Classifier model = small_forest();
  FeatureTable t = blob_table(2);
  std::erase_if(t.rows, [](const FeatureRow& r) { return r.label == 2; });
  const Evaluation e = evaluate(model, t);
  EXPECT_FALSE(e.recall[2].has_value());
  EXPECT_FALSE(e.warnings.empty());
}

TEST(ModelIo, RoundTripGivesIdenticalPredictions) {
  TempDir dir("model");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 255);
  for (const Classifier& model : {small_forest(), small_probe()}) {
    save_model(model, dir / "m.json");
    const Classifier back = load_model(dir / "m.json");
    EXPECT_EQ(kind_of(back), kind_of(model));
    EXPECT_EQ(serialize_model(back), serialize_model(model));
    for (int i = 0; i < 200; ++i) {
      const std::vector<double> x{u(rng), u(rng), u(rng)};
      const Prediction a = predict(model, x);
      const Prediction b = predict(back, x);
      EXPECT_EQ(a.label, b.label);
      EXPECT_EQ(a.probabilities, b.probabilities);
    }
  }
}

TEST(ModelIo, HeaderFields) {
  const std::string text = serialize_model(small_forest());
  for (const char* key : {"\"format_version\"", "\"kind\"", "\"schema\"", "\"class_names\"", "\"hyperparams\"",
                          "\"master_seed\"", "\"trees\""}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(ModelIo, MalformedFilesAreRejected) {
  EXPECT_THROW(deserialize_model("{", "m"), std::runtime_error);
  EXPECT_THROW(deserialize_model("{\"format_version\": 99}", "m"), std::runtime_error);
  std::string text = serialize_model(small_forest());
  const auto pos = text.find("\"random_forest\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 15, "\"boosted_trees\"");
  EXPECT_THROW(deserialize_model(text, "m"), std::runtime_error);
  EXPECT_THROW(load_model("/nonexistent/model.json"), std::runtime_error);
}

}  // namespace
}  // namespace patchaudit
