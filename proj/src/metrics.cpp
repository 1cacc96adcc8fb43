#include <algorithm>
#include <cmath>
#include <numeric>

#include "chainbalance/error.hpp"
#include "chainbalance/metrics.hpp"

namespace chainbalance {

std::string_view to_string(PointMetric metric) {
  switch (metric) {
    case PointMetric::kFMeasure: return "f_measure";
    case PointMetric::kGMean: return "g_mean";
    case PointMetric::kBalancedAccuracy: return "balanced_accuracy";
  }
  return "?";
}

std::optional<double> point_metric(const BinaryConfusion& conf, PointMetric metric) {
  const auto tp = static_cast<double>(conf.tp);
  const auto fp = static_cast<double>(conf.fp);
  const auto tn = static_cast<double>(conf.tn);
  const auto fn = static_cast<double>(conf.fn);
  if (metric == PointMetric::kFMeasure) {
    const double denom = 2.0 * tp + fp + fn;
    if (denom == 0.0) return std::nullopt;
    return 2.0 * tp / denom;
  }
  if (conf.tp + conf.fn == 0 || conf.tn + conf.fp == 0) return std::nullopt;
  const double tpr = tp / (tp + fn);
  const double tnr = tn / (tn + fp);
  if (metric == PointMetric::kGMean) return std::sqrt(tpr * tnr);
  return (tpr + tnr) / 2.0;
}

namespace {

void check_lengths(std::span<const double> scores, std::span<const Bit> truth) {
  if (scores.size() != truth.size()) {
    throw Error(ErrorKind::kLengthMismatch, "scores and truth differ in length");
  }
}

// Indices sorted by descending score; ties keep index order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

BinaryConfusion confusion_at(std::span<const double> scores, std::span<const Bit> truth,
                             double threshold) {
  check_lengths(scores, truth);
  BinaryConfusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (truth[i]) (predicted ? c.tp : c.fn)++;
    else (predicted ? c.fp : c.tn)++;
  }
  return c;
}

std::optional<double> auc_roc(std::span<const double> scores, std::span<const Bit> truth) {
  check_lengths(scores, truth);
  const auto order = descending_order(scores);
  // Walk from the lowest score up, counting negatives already passed.
  std::size_t positives = 0, negatives = 0;
  std::uint64_t doubled_wins = 0;  // 2 * wins + ties, exact
  std::size_t neg_below = 0;
  for (std::size_t end = order.size(); end > 0;) {
    std::size_t begin = end - 1;
    while (begin > 0 && scores[order[begin - 1]] == scores[order[end - 1]]) --begin;
    std::size_t pos_block = 0, neg_block = 0;
    for (std::size_t i = begin; i < end; ++i) (truth[order[i]] ? pos_block : neg_block)++;
    doubled_wins += 2 * static_cast<std::uint64_t>(pos_block) * neg_below +
                    static_cast<std::uint64_t>(pos_block) * neg_block;
    neg_below += neg_block;
    positives += pos_block;
    negatives += neg_block;
    end = begin;
  }
  if (positives == 0 || negatives == 0) return std::nullopt;
  return static_cast<double>(doubled_wins) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

std::optional<double> auc_pr(std::span<const double> scores, std::span<const Bit> truth) {
  check_lengths(scores, truth);
  const std::size_t positives = static_cast<std::size_t>(std::ranges::count(truth, Bit{1}));
  if (positives == 0) return std::nullopt;
  const auto order = descending_order(scores);
  std::size_t tp = 0, fp = 0;
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t begin = 0; begin < order.size();) {
    std::size_t end = begin + 1;
    while (end < order.size() && scores[order[end]] == scores[order[begin]]) ++end;
    for (std::size_t i = begin; i < end; ++i) (truth[order[i]] ? tp : fp)++;
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    begin = end;
  }
  return ap;
}

const std::array<double, 21>& threshold_grid() {
  static const std::array<double, 21> kGrid = [] {
    std::array<double, 21> g{};
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i) / 20.0;
    return g;
  }();
  return kGrid;
}

ThresholdChoice select_threshold(std::span<const double> scores, std::span<const Bit> truth,
                                 PointMetric objective) {
  check_lengths(scores, truth);
  ThresholdChoice choice;
  choice.fallback = true;
  if (std::ranges::count(truth, Bit{1}) == 0) return choice;
  for (double t : threshold_grid()) {
    const auto value = point_metric(confusion_at(scores, truth, t), objective);
    if (!value) continue;
    if (!choice.objective || *value > *choice.objective) {
      choice.objective = value;
      choice.threshold = t;
      choice.fallback = false;
    }
  }
  return choice;
}

MacroAverage macro_average(std::span<const std::optional<double>> values) {
  MacroAverage out;
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++defined;
    } else {
      ++out.excluded;
    }
  }
  if (defined == 0) throw Error(ErrorKind::kAllUndefined, "no defined values to average");
  out.value = sum / static_cast<double>(defined);
  return out;
}

std::vector<double> average_ranks(const Matrix<double>& results, bool higher_is_better) {
  const std::size_t methods = results.rows();
  const std::size_t datasets = results.cols();
  std::vector<double> mean(methods, 0.0);
  if (methods == 0 || datasets == 0) return mean;
  std::vector<std::size_t> order(methods);
  for (std::size_t ds = 0; ds < datasets; ++ds) {
    std::iota(order.begin(), order.end(), 0);
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
      return higher_is_better ? results(a, ds) > results(b, ds) : results(a, ds) < results(b, ds);
    });
    for (std::size_t begin = 0; begin < methods;) {
      std::size_t end = begin + 1;
      while (end < methods && results(order[end], ds) == results(order[begin], ds)) ++end;
      // Positions begin+1 .. end share their mean rank.
      const double rank = (static_cast<double>(begin + 1) + static_cast<double>(end)) / 2.0;
      for (std::size_t i = begin; i < end; ++i) mean[order[i]] += rank;
      begin = end;
    }
  }
  for (double& r : mean) r /= static_cast<double>(datasets);
  return mean;
}

std::size_t imr_bucket_index(double imr) {
  for (std::size_t k = 0; k + 1 < kImrEdges.size(); ++k) {
    if (imr < kImrEdges[k + 1]) return k;
  }
  return kImrEdges.size() - 2;
}

std::vector<ImrBucket> imr_bucket_report(std::span<const double> imr,
                                         std::span<const std::optional<double>> metric) {
  if (imr.size() != metric.size()) {
    throw Error(ErrorKind::kLengthMismatch, "ImR and metric vectors differ in length");
  }
  std::vector<ImrBucket> buckets(kImrEdges.size() - 1);
  std::vector<double> sums(buckets.size(), 0.0);
  std::vector<std::size_t> defined(buckets.size(), 0);
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    buckets[k].lower = kImrEdges[k];
    buckets[k].upper = kImrEdges[k + 1];
  }
  for (std::size_t i = 0; i < imr.size(); ++i) {
    const std::size_t k = imr_bucket_index(imr[i]);
    ++buckets[k].labels;
    if (metric[i]) {
      sums[k] += *metric[i];
      ++defined[k];
    }
  }
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    if (!imr.empty()) {
      buckets[k].label_percent =
          100.0 * static_cast<double>(buckets[k].labels) / static_cast<double>(imr.size());
    }
    if (defined[k] > 0) buckets[k].mean_metric = sums[k] / static_cast<double>(defined[k]);
  }
  return buckets;
}

std::array<std::optional<double>, 5> metric_values(const LabelMetrics& m) {
  return {m.f_measure, m.g_mean, m.balanced_accuracy, m.auc_roc, m.auc_pr};
}

MacroMetrics macro_metrics(std::span<const LabelMetrics> labels, std::span<const std::size_t> subset) {
  MacroMetrics out;
  std::vector<std::size_t> indices(subset.begin(), subset.end());
  if (subset.empty()) {
    indices.resize(labels.size());
    std::iota(indices.begin(), indices.end(), 0);
  }
  for (std::size_t metric = 0; metric < kMetricNames.size(); ++metric) {
    std::vector<std::optional<double>> column;
    for (std::size_t l : indices) column.push_back(metric_values(labels[l])[metric]);
    try {
      const auto avg = macro_average(column);
      out.value[metric] = avg.value;
      out.excluded[metric] = avg.excluded;
    } catch (const Error&) {
      out.excluded[metric] = column.size();
    }
  }
  return out;
}

MetricReport evaluate(const Matrix<double>& train_scores, const Matrix<Bit>& train_truth,
                      const Matrix<double>& test_scores, const Matrix<Bit>& test_truth) {
  if (train_scores.rows() != train_truth.rows() || test_scores.rows() != test_truth.rows() ||
      train_scores.cols() != test_scores.cols() || train_truth.cols() != test_truth.cols() ||
      train_scores.cols() != train_truth.cols()) {
    throw Error(ErrorKind::kLengthMismatch, "score and truth matrices do not line up");
  }
  const std::size_t q = train_scores.cols();
  auto column = [](const auto& m, std::size_t j) {
    std::vector<std::remove_cvref_t<decltype(m(0, 0))>> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, j);
    return out;
  };

  MetricReport report;
  report.per_label.resize(q);
  for (std::size_t j = 0; j < q; ++j) {
    const auto tr_s = column(train_scores, j);
    const auto tr_y = column(train_truth, j);
    const auto te_s = column(test_scores, j);
    const auto te_y = column(test_truth, j);
    LabelMetrics& m = report.per_label[j];
    std::array<std::optional<double>, 3> point{};
    for (std::size_t k = 0; k < kPointMetrics.size(); ++k) {
      const auto choice = select_threshold(tr_s, tr_y, kPointMetrics[k]);
      m.thresholds[k] = choice.threshold;
      m.threshold_fallback[k] = choice.fallback;
      point[k] = point_metric(confusion_at(te_s, te_y, choice.threshold), kPointMetrics[k]);
    }
    m.f_measure = point[0];
    m.g_mean = point[1];
    m.balanced_accuracy = point[2];
    m.auc_roc = auc_roc(te_s, te_y);
    m.auc_pr = auc_pr(te_s, te_y);
  }
  report.macro = macro_metrics(report.per_label);
  return report;
}

}  // namespace chainbalance
