#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainbalance/matrix.hpp"

namespace chainbalance {

using Bit = std::uint8_t;

// Descriptor of one input attribute. Nominal attributes are stored as the
// integer position of the value in `categories`.
struct AttributeInfo {
  std::string name;
  bool nominal = false;
  std::vector<std::string> categories;

  bool operator==(const AttributeInfo&) const = default;
};

struct MultiLabelDataset {
  Matrix<double> features;  // n x d
  Matrix<Bit> labels;       // n x q, entries 0/1
  std::vector<std::string> label_names;
  std::vector<AttributeInfo> feature_info;

  std::size_t n() const noexcept { return features.rows(); }
  std::size_t d() const noexcept { return features.cols(); }
  std::size_t q() const noexcept { return labels.cols(); }

  // Throws Error(kInvalidArgument) if any structural invariant is broken.
  void validate() const;

  // Rows in the given order (duplicates allowed, as in a bootstrap).
  MultiLabelDataset select_rows(std::span<const std::size_t> rows) const;

  std::size_t positives(std::size_t label) const;
};

struct LabelImbalanceStats {
  std::size_t label_index = 0;
  std::size_t minority_count = 0;
  std::size_t majority_count = 0;
  Bit minority_class = 1;
  std::optional<double> imr;  // empty when the label is single-class
};

struct DatasetSummary {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t q = 0;
  double label_cardinality = 0.0;
  double mean_imr = 0.0;
  double max_imr = 0.0;
  double cv_imr = 0.0;
  std::size_t degenerate_labels = 0;
};

// Mulan layout: ARFF holding features and labels plus an XML header naming
// which attributes are labels. Label columns follow XML order.
MultiLabelDataset load_mulan(std::istream& arff, std::istream& xml);
MultiLabelDataset load_mulan_files(const std::filesystem::path& arff,
                                   const std::filesystem::path& xml);

std::vector<std::string> parse_label_names(std::istream& xml);

// Dense ARFF with features first and labels last; reloads to identical matrices.
void write_arff(const MultiLabelDataset& ds, std::ostream& out,
                const std::string& relation = "chainbalance");
void write_mulan_xml(const MultiLabelDataset& ds, std::ostream& out);

LabelImbalanceStats compute_label_stats(const MultiLabelDataset& ds, std::size_t label);
std::vector<LabelImbalanceStats> compute_all_label_stats(const MultiLabelDataset& ds);

DatasetSummary summarize(const MultiLabelDataset& ds);

// Keeps floor(keep_fraction * d) columns with the most non-zero entries.
// Ties go to the lower column index; survivors keep their original order.
MultiLabelDataset reduce_features_by_frequency(const MultiLabelDataset& ds,
                                               double keep_fraction);

}  // namespace chainbalance
