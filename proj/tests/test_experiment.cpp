#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "chainbalance/error.hpp"
#include "chainbalance/experiment.hpp"
#include "chainbalance/model_io.hpp"
#include "support.hpp"

namespace cb = chainbalance;
using nlohmann::json;

namespace {

cb::MultiLabelDataset small_dataset(std::uint64_t seed = 90) {
  std::mt19937_64 gen(seed);
  return testsupport::random_dataset(gen, 90, 5, 4);
}

cb::ExperimentConfig small_config() {
  cb::ExperimentConfig config;
  config.dataset_name = "small";
  config.methods = {cb::Method::kBR, cb::Method::kECC, cb::Method::kECCRU3};
  config.chains = 4;
  config.repeats = 2;
  config.folds = 2;
  config.seed = 5;
  return config;
}

}  // namespace

TEST(ExperimentConfig, Validation) {
  auto c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.repeats = 0;
  EXPECT_THROW(c.validate(), cb::Error);
  c = small_config();
  c.folds = 1;
  EXPECT_THROW(c.validate(), cb::Error);
  c = small_config();
  c.methods.clear();
  EXPECT_THROW(c.validate(), cb::Error);
  c = small_config();
  c.feature_keep_fraction = 1.5;
  EXPECT_THROW(c.validate(), cb::Error);
  c = small_config();
  c.theta_min = 0.5;
  EXPECT_FALSE(c.spec_for(cb::Method::kECCRU, 1).theta_min);
  EXPECT_EQ(c.spec_for(cb::Method::kECCRU3, 1).theta_min, 0.5);
}

TEST(RunCv, ProducesEveryFoldForEveryMethod) {
  const auto ds = small_dataset();
  const auto cv = cb::run_cv(ds, small_config());
  ASSERT_EQ(cv.methods.size(), 3u);
  for (const auto& m : cv.methods) {
    ASSERT_EQ(m.folds.size(), 4u);
    ASSERT_EQ(m.repeat_means.size(), 2u);
    for (const auto& fold : m.folds) {
      EXPECT_EQ(fold.report.per_label.size(), ds.q());
      EXPECT_GT(fold.instance_budget, 0u);
    }
    for (const auto& v : m.overall.value) ASSERT_TRUE(v.has_value());
  }
  // ECCRU3 records its per-label classifier counts in every fold.
  for (const auto& fold : cv.methods[2].folds) {
    ASSERT_EQ(fold.classifier_budget.size(), ds.q());
    for (std::size_t c : fold.classifier_budget) {
      EXPECT_GE(c, 2u);   // ceil(4 * 0.5)
      EXPECT_LE(c, 40u);  // 4 * 10
    }
  }
}

TEST(RunCv, OverallIsMeanOfFoldMacros) {
  const auto cv = cb::run_cv(small_dataset(), small_config());
  for (const auto& m : cv.methods) {
    for (std::size_t k = 0; k < cb::kMetricNames.size(); ++k) {
      double sum = 0;
      std::size_t count = 0;
      for (const auto& fold : m.folds) {
        if (fold.report.macro.value[k]) sum += *fold.report.macro.value[k], ++count;
      }
      EXPECT_NEAR(*m.overall.value[k], sum / static_cast<double>(count), 1e-12);
    }
  }
}

TEST(RunCv, MetricsJsonDeterministicAcrossExecutionModes) {
  const auto ds = small_dataset();
  auto config = small_config();
  config.exec = cb::Execution::kParallel;
  const std::string a = cb::cv_metrics_json(cb::run_cv(ds, config)).dump();
  config.exec = cb::Execution::kSerial;
  const std::string b = cb::cv_metrics_json(cb::run_cv(ds, config)).dump();
  EXPECT_EQ(a, b);
  config.seed = 6;
  EXPECT_NE(a, cb::cv_metrics_json(cb::run_cv(ds, config)).dump());
}

TEST(RunCv, JsonShapeAndUndefinedMarkers) {
  auto ds = small_dataset();
  // Label 3 gets a single positive, so some test folds have none.
  for (std::size_t i = 0; i < ds.n(); ++i) ds.labels(i, 3) = i == 4;
  auto config = small_config();
  config.feature_keep_fraction = 0.6;
  const auto cv = cb::run_cv(ds, config);
  EXPECT_EQ(cv.summary.d, 3u);
  const json doc = cb::cv_metrics_json(cv);
  EXPECT_EQ(doc["schema"], cb::kCvSchema);
  EXPECT_EQ(doc["config"]["seed"], 5);
  EXPECT_EQ(doc["methods"].size(), 3u);
  bool saw_null = false;
  for (const auto& method : doc["methods"]) {
    EXPECT_EQ(method["folds"].size(), 4u);
    for (const auto& fold : method["folds"]) {
      for (const auto& label : fold["per_label"]) {
        for (auto name : cb::kMetricNames) {
          ASSERT_TRUE(label.contains(std::string(name)));
          saw_null |= label[std::string(name)].is_null();
        }
      }
    }
    EXPECT_EQ(method["imr_buckets"]["auc_roc"].size(), 7u);
  }
  EXPECT_TRUE(saw_null);
}

TEST(RunCv, WritesReportFiles) {
  const auto dir = testsupport::temp_dir("cv_outputs");
  const auto cv = cb::run_cv(small_dataset(), small_config());
  cb::write_cv_outputs(cv, dir);
  std::ifstream metrics(dir / "metrics.json"), timing(dir / "timing.json"), csv(dir / "per_label.csv");
  ASSERT_TRUE(metrics && timing && csv);
  EXPECT_EQ(json::parse(timing)["methods"].size(), 3u);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "method,repeat,fold,label,metric,value,threshold");
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  EXPECT_EQ(lines, 3u * 4u * 4u * 5u);
}

TEST(MacroOverImr, RestrictsLabels) {
  const auto cv = cb::run_cv(small_dataset(), small_config());
  const auto all = cb::macro_over_imr(cv, cv.methods[0], 1.0);
  const auto none = cb::macro_over_imr(cv, cv.methods[0], 1e9);
  EXPECT_TRUE(all.value[3].has_value());
  EXPECT_FALSE(none.value[3].has_value());
}

TEST(StatsJson, Fields) {
  const auto doc = cb::stats_json(small_dataset(), "small");
  EXPECT_EQ(doc["n"], 90);
  EXPECT_EQ(doc["labels"].size(), 4u);
  EXPECT_TRUE(doc["labels"][0].contains("imr"));
}

TEST(RankReports, FromTwoDatasets) {
  auto report = [](const std::string& name, std::vector<double> f) {
    json methods = json::array();
    const char* names[] = {"BR", "ECC", "ECCRU"};
    for (int m = 0; m < 3; ++m) {
      json values = json::object();
      for (auto metric : cb::kMetricNames) values[std::string(metric)] = f[m];
      methods.push_back({{"method", names[m]}, {"overall", {{"values", values}}}});
    }
    return json{{"schema", cb::kCvSchema}, {"dataset", name}, {"methods", methods}};
  };
  const std::vector<json> metrics = {report("a", {0.9, 0.8, 0.7}), report("b", {0.7, 0.9, 0.8})};
  const auto table = cb::rank_reports(metrics, {std::nullopt, std::nullopt});
  EXPECT_EQ(table.methods, (std::vector<std::string>{"BR", "ECC", "ECCRU"}));
  EXPECT_EQ(table.ranks.at("f_measure"), (std::vector<double>{2.0, 1.5, 2.5}));
  EXPECT_FALSE(table.ranks.contains("training_time"));
  std::ostringstream csv;
  cb::write_rank_csv(table, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "criterion,BR,ECC,ECCRU");
}

TEST(RankDirectory, ReadsCvOutputs) {
  const auto dir = testsupport::temp_dir("rank_dir");
  auto config = small_config();
  cb::write_cv_outputs(cb::run_cv(small_dataset(1), config), dir / "one");
  config.dataset_name = "other";
  cb::write_cv_outputs(cb::run_cv(small_dataset(2), config), dir / "two");
  const auto table = cb::rank_directory(dir);
  EXPECT_EQ(table.datasets.size(), 2u);
  EXPECT_EQ(table.methods.size(), 3u);
  EXPECT_TRUE(table.ranks.contains("training_time"));
  EXPECT_THROW(cb::rank_directory(dir / "missing"), cb::Error);
}

TEST(ModelIo, RoundTrip) {
  const auto ds = small_dataset();
  for (auto method : cb::all_methods()) {
    cb::EnsembleSpec spec;
    spec.method = method;
    spec.chains = 3;
    const auto model = cb::train_ensemble(ds, spec);
    const auto back = cb::model_from_json(json::parse(cb::model_to_json(model).dump()));
    EXPECT_EQ(back, model) << cb::to_string(method);
  }
  const auto dir = testsupport::temp_dir("model_io");
  cb::EnsembleSpec spec;
  const auto model = cb::train_ensemble(ds, spec);
  cb::save_model(model, dir / "m.json");
  EXPECT_EQ(cb::load_model(dir / "m.json"), model);
  EXPECT_THROW(cb::model_from_json(json{{"schema", "other"}}), cb::Error);
}
