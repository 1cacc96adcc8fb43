#pragma once

#include <cstddef>
#include <vector>

#include "chainbalance/dataset.hpp"
#include "chainbalance/rng.hpp"

namespace chainbalance {

// Single-target training set for one link of a chain: the original features,
// possibly extended by augmented prediction columns.
struct BinaryDataset {
  Matrix<double> features;
  std::vector<Bit> targets;
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;

  BinaryDataset() = default;
  BinaryDataset(Matrix<double> x, std::vector<Bit> y);

  std::size_t rows() const noexcept { return targets.size(); }
  BinaryDataset select_rows(std::span<const std::size_t> rows) const;
};

std::vector<std::size_t> bootstrap_indices(std::size_t n, RngStream& rng);
MultiLabelDataset bootstrap(const MultiLabelDataset& ds, RngStream& rng);

// Rows kept by random undersampling, ascending. Minority rows are all kept and
// an equal number of majority rows is drawn uniformly without replacement.
std::vector<std::size_t> undersample_indices(std::span<const Bit> targets, RngStream& rng);
BinaryDataset random_undersample(const BinaryDataset& bd, RngStream& rng);

// Iterative stratification for multi-label data. Each fold is returned as an
// ascending list of row indices. Fold sizes differ by at most one.
std::vector<std::vector<std::size_t>> iterative_stratified_kfold(const MultiLabelDataset& ds,
                                                                 std::size_t k, RngStream& rng);

}  // namespace chainbalance
