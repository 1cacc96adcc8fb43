#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "chainbalance/dataset.hpp"
#include "chainbalance/error.hpp"

namespace chainbalance {

void MultiLabelDataset::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (n() == 0) fail("dataset has no rows");
  if (labels.rows() != features.rows()) fail("feature and label row counts differ");
  if (q() == 0) fail("dataset has no labels");
  if (label_names.size() != q()) fail("label name count does not match label columns");
  if (feature_info.size() != d()) fail("attribute descriptor count does not match features");
  std::unordered_set<std::string> unique(label_names.begin(), label_names.end());
  if (unique.size() != label_names.size()) fail("label names are not unique");
  for (Bit b : labels.data()) {
    if (b > 1) throw Error(ErrorKind::kNonBinaryLabel, "label matrix holds a non 0/1 value");
  }
}

MultiLabelDataset MultiLabelDataset::select_rows(std::span<const std::size_t> rows) const {
  MultiLabelDataset out;
  out.label_names = label_names;
  out.feature_info = feature_info;
  out.features = Matrix<double>(rows.size(), d());
  out.labels = Matrix<Bit>(rows.size(), q());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ranges::copy(features.row(rows[i]), out.features.row(i).begin());
    std::ranges::copy(labels.row(rows[i]), out.labels.row(i).begin());
  }
  return out;
}

std::size_t MultiLabelDataset::positives(std::size_t label) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n(); ++i) count += labels(i, label);
  return count;
}

LabelImbalanceStats compute_label_stats(const MultiLabelDataset& ds, std::size_t label) {
  if (label >= ds.q()) {
    throw Error(ErrorKind::kInvalidArgument, "label index " + std::to_string(label) + " out of range");
  }
  const std::size_t ones = ds.positives(label);
  const std::size_t zeros = ds.n() - ones;
  LabelImbalanceStats s;
  s.label_index = label;
  // Equal counts resolve to minority_class = 1.
  s.minority_class = ones <= zeros ? 1 : 0;
  s.minority_count = std::min(ones, zeros);
  s.majority_count = std::max(ones, zeros);
  if (s.minority_count > 0) {
    s.imr = static_cast<double>(s.majority_count) / static_cast<double>(s.minority_count);
  }
  return s;
}

std::vector<LabelImbalanceStats> compute_all_label_stats(const MultiLabelDataset& ds) {
  std::vector<LabelImbalanceStats> out;
  out.reserve(ds.q());
  for (std::size_t j = 0; j < ds.q(); ++j) out.push_back(compute_label_stats(ds, j));
  return out;
}

DatasetSummary summarize(const MultiLabelDataset& ds) {
  DatasetSummary s;
  s.n = ds.n();
  s.d = ds.d();
  s.q = ds.q();

  std::size_t total_positive = 0;
  for (Bit b : ds.labels.data()) total_positive += b;
  s.label_cardinality = static_cast<double>(total_positive) / static_cast<double>(ds.n());

  std::vector<double> imrs;
  for (const auto& stats : compute_all_label_stats(ds)) {
    if (stats.imr) imrs.push_back(*stats.imr);
    else ++s.degenerate_labels;
  }
  if (imrs.empty()) {
    throw Error(ErrorKind::kAllLabelsDegenerate, "every label is single-class");
  }
  const double count = static_cast<double>(imrs.size());
  s.mean_imr = std::accumulate(imrs.begin(), imrs.end(), 0.0) / count;
  s.max_imr = *std::ranges::max_element(imrs);
  double sq = 0.0;
  for (double v : imrs) sq += (v - s.mean_imr) * (v - s.mean_imr);
  // Population standard deviation, normalised by the mean.
  s.cv_imr = std::sqrt(sq / count) / s.mean_imr;
  return s;
}

MultiLabelDataset reduce_features_by_frequency(const MultiLabelDataset& ds, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "keep_fraction must lie in (0, 1]");
  }
  // The small epsilon keeps products such as 0.1 * 1000 from flooring to 99.
  const auto keep = static_cast<std::size_t>(
      std::floor(keep_fraction * static_cast<double>(ds.d()) + 1e-9));
  if (keep == 0) {
    throw Error(ErrorKind::kInvalidArgument, "keep_fraction retains no feature");
  }
  if (keep >= ds.d()) return ds;

  std::vector<std::size_t> nonzero(ds.d(), 0);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto row = ds.features.row(i);
    for (std::size_t f = 0; f < ds.d(); ++f) nonzero[f] += row[f] != 0.0;
  }
  std::vector<std::size_t> order(ds.d());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return nonzero[a] > nonzero[b]; });
  order.resize(keep);
  std::ranges::sort(order);

  MultiLabelDataset out;
  out.labels = ds.labels;
  out.label_names = ds.label_names;
  out.features = Matrix<double>(ds.n(), keep);
  for (std::size_t f : order) out.feature_info.push_back(ds.feature_info[f]);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t k = 0; k < keep; ++k) out.features(i, k) = ds.features(i, order[k]);
  }
  return out;
}

}  // namespace chainbalance
