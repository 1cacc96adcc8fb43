#include <algorithm>
#include <limits>
#include <optional>
#include <numeric>

#include "chainbalance/error.hpp"
#include "chainbalance/sampling.hpp"

namespace chainbalance {

BinaryDataset::BinaryDataset(Matrix<double> x, std::vector<Bit> y)
    : features(std::move(x)), targets(std::move(y)) {
  if (features.rows() != targets.size()) {
    throw Error(ErrorKind::kLengthMismatch, "binary dataset: feature/target row counts differ");
  }
  positive_count = static_cast<std::size_t>(std::ranges::count(targets, Bit{1}));
  negative_count = targets.size() - positive_count;
}

BinaryDataset BinaryDataset::select_rows(std::span<const std::size_t> rows) const {
  Matrix<double> x(rows.size(), features.cols());
  std::vector<Bit> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ranges::copy(features.row(rows[i]), x.row(i).begin());
    y[i] = targets[rows[i]];
  }
  return BinaryDataset(std::move(x), std::move(y));
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.uniform_index(n);
  return rows;
}

MultiLabelDataset bootstrap(const MultiLabelDataset& ds, RngStream& rng) {
  const auto rows = bootstrap_indices(ds.n(), rng);
  return ds.select_rows(rows);
}

std::vector<std::size_t> undersample_indices(std::span<const Bit> targets, RngStream& rng) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < targets.size(); ++i) (targets[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorKind::kSingleClassInput, "random undersampling needs both classes");
  }
  std::vector<std::size_t>& minority = pos.size() <= neg.size() ? pos : neg;
  std::vector<std::size_t>& majority = pos.size() <= neg.size() ? neg : pos;
  const std::size_t m = minority.size();
  // Partial Fisher-Yates: the first m slots become a uniform m-subset.
  for (std::size_t k = 0; k < m && m < majority.size(); ++k) {
    const std::size_t j = k + rng.uniform_index(majority.size() - k);
    std::swap(majority[k], majority[j]);
  }
  std::vector<std::size_t> kept = std::move(minority);
  kept.insert(kept.end(), majority.begin(), majority.begin() + static_cast<std::ptrdiff_t>(m));
  std::ranges::sort(kept);
  return kept;
}

BinaryDataset random_undersample(const BinaryDataset& bd, RngStream& rng) {
  const auto kept = undersample_indices(bd.targets, rng);
  return bd.select_rows(kept);
}

std::vector<std::vector<std::size_t>> iterative_stratified_kfold(const MultiLabelDataset& ds,
                                                                 std::size_t k, RngStream& rng) {
  const std::size_t n = ds.n();
  const std::size_t q = ds.q();
  if (k < 2) throw Error(ErrorKind::kInvalidArgument, "k-fold needs k >= 2");
  if (n < k) throw Error(ErrorKind::kInvalidArgument, "k-fold needs at least k rows");

  const double share = 1.0 / static_cast<double>(k);
  std::vector<std::size_t> label_remaining(q);
  for (std::size_t l = 0; l < q; ++l) label_remaining[l] = ds.positives(l);

  std::vector<std::vector<double>> wanted(k, std::vector<double>(q));
  for (auto& fold : wanted) {
    for (std::size_t l = 0; l < q; ++l) fold[l] = static_cast<double>(label_remaining[l]) * share;
  }
  std::vector<double> wanted_total(k, static_cast<double>(n) * share);

  // Capacity: every fold gets n/k rows, n%k of them one extra.
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t extra_used = 0;
  std::vector<std::vector<std::size_t>> folds(k);
  auto open = [&](std::size_t f) {
    return folds[f].size() < base || (folds[f].size() == base && extra_used < extra);
  };

  std::vector<bool> assigned(n, false);
  auto assign = [&](std::size_t row, std::size_t f) {
    if (folds[f].size() == base) ++extra_used;
    folds[f].push_back(row);
    assigned[row] = true;
    wanted_total[f] -= 1.0;
    for (std::size_t l = 0; l < q; ++l) {
      if (ds.labels(row, l)) {
        --label_remaining[l];
        wanted[f][l] -= 1.0;
      }
    }
  };

  std::vector<std::size_t> ties;
  auto pick_fold = [&](std::optional<std::size_t> label) {
    ties.clear();
    double best_label = -std::numeric_limits<double>::infinity();
    double best_total = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < k; ++f) {
      if (!open(f)) continue;
      const double lw = label ? wanted[f][*label] : 0.0;
      const double tw = wanted_total[f];
      if (lw > best_label || (lw == best_label && tw > best_total)) {
        best_label = lw;
        best_total = tw;
        ties.assign(1, f);
      } else if (lw == best_label && tw == best_total) {
        ties.push_back(f);
      }
    }
    return ties.size() == 1 ? ties.front() : ties[rng.uniform_index(ties.size())];
  };

  std::vector<std::size_t> rarest;
  for (;;) {
    // Rarest label among the unassigned rows; ties broken at random.
    rarest.clear();
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (std::size_t l = 0; l < q; ++l) {
      if (label_remaining[l] == 0) continue;
      if (label_remaining[l] < fewest) {
        fewest = label_remaining[l];
        rarest.assign(1, l);
      } else if (label_remaining[l] == fewest) {
        rarest.push_back(l);
      }
    }
    if (rarest.empty()) break;
    const std::size_t label =
        rarest.size() == 1 ? rarest.front() : rarest[rng.uniform_index(rarest.size())];
    for (std::size_t row = 0; row < n; ++row) {
      if (!assigned[row] && ds.labels(row, label)) assign(row, pick_fold(label));
    }
  }
  for (std::size_t row = 0; row < n; ++row) {
    if (!assigned[row]) assign(row, pick_fold(std::nullopt));
  }
  for (auto& fold : folds) std::ranges::sort(fold);
  return folds;
}

}  // namespace chainbalance
