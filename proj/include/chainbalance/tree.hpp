#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chainbalance/sampling.hpp"

namespace chainbalance {

struct TreeSpec {
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_leaf = 2;
};

// Fitted CART tree over Gini impurity. Internal nodes route a row left iff
// x[feature] <= threshold.
class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    Bit prediction = 0;
    double positive_fraction = 0.0;
    std::size_t samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  DecisionTree() = default;
  DecisionTree(std::size_t arity, std::vector<Node> nodes);

  // Throws Error(kArityMismatch) when x is not the training width.
  Bit predict(std::span<const double> x) const;
  // Reads only the first arity() entries of x.
  Bit predict_prefix(std::span<const double> x) const;

  std::size_t arity() const noexcept { return arity_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::size_t arity_ = 0;
  std::vector<Node> nodes_;
};

// Training rows given as a view: the listed rows of `features`, restricted to
// the leading `columns` columns.
struct TrainingView {
  const Matrix<double>& features;
  std::size_t columns;
  std::span<const std::size_t> rows;
  std::span<const Bit> targets;  // one per entry of `rows`
};

DecisionTree fit_tree(const TrainingView& view, const TreeSpec& spec);
DecisionTree fit_tree(const BinaryDataset& bd, const TreeSpec& spec);

}  // namespace chainbalance
