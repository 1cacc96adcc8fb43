#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "chainbalance/dataset.hpp"

namespace testsupport {

namespace cb = chainbalance;

inline cb::MultiLabelDataset make_dataset(const std::vector<std::vector<double>>& x,
                                          const std::vector<std::vector<int>>& y) {
  cb::MultiLabelDataset ds;
  const std::size_t n = x.size();
  const std::size_t d = n ? x[0].size() : 0;
  const std::size_t q = n ? y[0].size() : 0;
  ds.features = cb::Matrix<double>(n, d);
  ds.labels = cb::Matrix<cb::Bit>(n, q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) ds.features(i, f) = x[i][f];
    for (std::size_t j = 0; j < q; ++j) ds.labels(i, j) = static_cast<cb::Bit>(y[i][j]);
  }
  for (std::size_t f = 0; f < d; ++f) ds.feature_info.push_back({"f" + std::to_string(f), false, {}});
  for (std::size_t j = 0; j < q; ++j) ds.label_names.push_back("L" + std::to_string(j));
  return ds;
}

// Labels depend on features through noisy thresholds with per-label rates,
// so rare and common labels coexist. Every label is guaranteed two classes.
inline cb::MultiLabelDataset random_dataset(std::mt19937_64& gen, std::size_t n, std::size_t d,
                                            std::size_t q) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 4);
  cb::MultiLabelDataset ds;
  ds.features = cb::Matrix<double>(n, d);
  ds.labels = cb::Matrix<cb::Bit>(n, q);
  std::vector<double> rate(q);
  for (auto& r : rate) r = 0.05 + 0.45 * unit(gen);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) {
      // Mix of continuous and small-integer columns to produce value ties.
      ds.features(i, f) = f % 3 == 2 ? small(gen) : unit(gen);
    }
    for (std::size_t j = 0; j < q; ++j) {
      const double signal = ds.features(i, j % d);
      ds.labels(i, j) = (0.7 * signal + 0.3 * unit(gen)) < rate[j] ? 1 : 0;
    }
  }
  for (std::size_t j = 0; j < q; ++j) {
    ds.labels(j % n, j) = 1;
    ds.labels((j + 1) % n, j) = 0;
  }
  for (std::size_t f = 0; f < d; ++f) ds.feature_info.push_back({"f" + std::to_string(f), false, {}});
  for (std::size_t j = 0; j < q; ++j) ds.label_names.push_back("L" + std::to_string(j));
  return ds;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("chainbalance_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
