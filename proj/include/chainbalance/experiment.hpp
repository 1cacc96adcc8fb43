#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chainbalance/dataset.hpp"
#include "chainbalance/ensemble.hpp"
#include "chainbalance/metrics.hpp"
#include "json.hpp"

namespace chainbalance {

inline constexpr const char* kCvSchema = "chainbalance.cv/1";
inline constexpr const char* kTimingSchema = "chainbalance.timing/1";
inline constexpr const char* kStatsSchema = "chainbalance.stats/1";

struct ExperimentConfig {
  std::string dataset_name = "dataset";
  std::vector<Method> methods = all_methods();
  std::size_t chains = 10;
  double theta_max = 10.0;
  std::optional<double> theta_min;  // applied to ECCRU3 runs only
  TreeSpec tree;
  std::uint64_t seed = 0;
  std::size_t repeats = 5;
  std::size_t folds = 2;
  std::optional<double> feature_keep_fraction;
  Execution exec = Execution::kParallel;

  void validate() const;
  EnsembleSpec spec_for(Method method, std::uint64_t seed) const;
};

struct FoldOutcome {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  MetricReport report;
  std::size_t instance_budget = 0;
  std::size_t rows_fitted = 0;
  std::vector<std::size_t> classifier_budget;
  double train_seconds = 0.0;
};

struct MethodOutcome {
  Method method = Method::kBR;
  std::vector<FoldOutcome> folds;
  std::vector<MacroMetrics> repeat_means;
  MacroMetrics overall;
  // Per-label metric means over the folds where each value is defined.
  std::vector<LabelMetrics> per_label_mean;
  double train_seconds = 0.0;
};

struct CvOutcome {
  ExperimentConfig config;
  DatasetSummary summary;
  std::vector<std::string> label_names;
  std::vector<std::optional<double>> label_imr;
  std::vector<MethodOutcome> methods;
};

// Repeated stratified k-fold: thresholds tuned on each training part, metrics
// measured on the held-out part.
CvOutcome run_cv(const MultiLabelDataset& ds, const ExperimentConfig& config);

// Macro average of per-label means restricted to labels whose full-data ImR
// is at least `min_imr`.
MacroMetrics macro_over_imr(const CvOutcome& cv, const MethodOutcome& method, double min_imr);

// The deterministic part of the report (no wall-clock values).
nlohmann::json cv_metrics_json(const CvOutcome& cv);
nlohmann::json cv_timing_json(const CvOutcome& cv);
// Writes metrics.json, timing.json and per_label.csv into `dir`.
void write_cv_outputs(const CvOutcome& cv, const std::filesystem::path& dir);

nlohmann::json stats_json(const MultiLabelDataset& ds, const std::string& name);

struct RankTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  // criterion -> mean rank per method
  std::map<std::string, std::vector<double>> ranks;
};

// Ranks methods across cv reports (one per dataset). Only methods present in
// every report take part. Timing documents, when given, add a training-time
// row where lower is better.
RankTable rank_reports(const std::vector<nlohmann::json>& metrics,
                       const std::vector<std::optional<nlohmann::json>>& timings);
RankTable rank_directory(const std::filesystem::path& dir);
void write_rank_csv(const RankTable& table, std::ostream& out);

}  // namespace chainbalance
