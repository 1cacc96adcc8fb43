#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chainbalance/dataset.hpp"
#include "chainbalance/matrix.hpp"

namespace chainbalance {

struct BinaryConfusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

enum class PointMetric { kFMeasure, kGMean, kBalancedAccuracy };
std::string_view to_string(PointMetric metric);
inline constexpr std::array<PointMetric, 3> kPointMetrics = {
    PointMetric::kFMeasure, PointMetric::kGMean, PointMetric::kBalancedAccuracy};

// Empty optional means the metric is undefined for this confusion matrix.
std::optional<double> point_metric(const BinaryConfusion& conf, PointMetric metric);

// Prediction rule: positive iff score >= threshold.
BinaryConfusion confusion_at(std::span<const double> scores, std::span<const Bit> truth,
                             double threshold);

// Mann-Whitney form with half credit for tied pairs.
std::optional<double> auc_roc(std::span<const double> scores, std::span<const Bit> truth);
// Average precision; tied scores form one block evaluated at its end.
std::optional<double> auc_pr(std::span<const double> scores, std::span<const Bit> truth);

// {0, 0.05, ..., 1}, built as i / 20 so grid points compare exactly with
// vote fractions.
const std::array<double, 21>& threshold_grid();

struct ThresholdChoice {
  double threshold = 0.5;
  std::optional<double> objective;  // metric value on the scanned data
  bool fallback = false;            // no positives, or metric never defined
};

// Smallest grid point that maximises the objective on the given scores.
ThresholdChoice select_threshold(std::span<const double> scores, std::span<const Bit> truth,
                                 PointMetric objective);

struct MacroAverage {
  double value = 0.0;
  std::size_t excluded = 0;  // undefined entries left out of the mean
};

// Mean over defined entries only; throws Error(kAllUndefined) if none.
MacroAverage macro_average(std::span<const std::optional<double>> values);

// Mean rank per method over datasets. results(method, dataset); rank 1 is
// best and ties share the mean of their positions.
std::vector<double> average_ranks(const Matrix<double>& results, bool higher_is_better);

struct ImrBucket {
  double lower = 0.0;
  double upper = 0.0;  // +inf for the last bucket
  std::size_t labels = 0;
  double label_percent = 0.0;
  std::optional<double> mean_metric;  // over labels with a defined value
};

inline constexpr std::array<double, 8> kImrEdges = {1, 5, 10, 15, 25, 50, 100,
                                                     std::numeric_limits<double>::infinity()};

// Index of the half-open bucket [edge_k, edge_k+1) holding `imr`.
std::size_t imr_bucket_index(double imr);
std::vector<ImrBucket> imr_bucket_report(std::span<const double> imr,
                                         std::span<const std::optional<double>> metric);

struct LabelMetrics {
  std::optional<double> f_measure;
  std::optional<double> g_mean;
  std::optional<double> balanced_accuracy;
  std::optional<double> auc_roc;
  std::optional<double> auc_pr;
  std::array<double, 3> thresholds{};  // F, G, B order
  std::array<bool, 3> threshold_fallback{};
};

inline constexpr std::array<std::string_view, 5> kMetricNames = {
    "f_measure", "g_mean", "balanced_accuracy", "auc_roc", "auc_pr"};

struct MacroMetrics {
  std::array<std::optional<double>, 5> value{};  // kMetricNames order
  std::array<std::size_t, 5> excluded{};
};

struct MetricReport {
  std::vector<LabelMetrics> per_label;
  MacroMetrics macro;
  std::size_t skipped_labels = 0;
};

std::array<std::optional<double>, 5> metric_values(const LabelMetrics& m);
MacroMetrics macro_metrics(std::span<const LabelMetrics> labels,
                           std::span<const std::size_t> subset = {});

// Thresholds are tuned per label and per point metric on the training scores,
// then all five metrics are measured on the test scores.
MetricReport evaluate(const Matrix<double>& train_scores, const Matrix<Bit>& train_truth,
                      const Matrix<double>& test_scores, const Matrix<Bit>& test_truth);

}  // namespace chainbalance
