#include <algorithm>
#include <numeric>

#include "chainbalance/error.hpp"
#include "chainbalance/tree.hpp"

namespace chainbalance {

DecisionTree::DecisionTree(std::size_t arity, std::vector<Node> nodes)
    : arity_(arity), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error(ErrorKind::kInvalidArgument, "tree without nodes");
  const auto count = static_cast<std::int32_t>(nodes_.size());
  for (const Node& node : nodes_) {
    if (node.is_leaf()) continue;
    if (static_cast<std::size_t>(node.feature) >= arity_ || node.left <= 0 || node.right <= 0 ||
        node.left >= count || node.right >= count) {
      throw Error(ErrorKind::kInvalidArgument, "tree node references are inconsistent");
    }
  }
}

Bit DecisionTree::predict(std::span<const double> x) const {
  if (x.size() != arity_) {
    throw Error(ErrorKind::kArityMismatch, "tree expects " + std::to_string(arity_) +
                                               " features, got " + std::to_string(x.size()));
  }
  return predict_prefix(x);
}

Bit DecisionTree::predict_prefix(std::span<const double> x) const {
  std::size_t at = 0;
  while (!nodes_[at].is_leaf()) {
    const Node& node = nodes_[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes_[at].prediction;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  // Children are always stored after their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::ranges::count_if(nodes_, [](const Node& n) { return n.is_leaf(); }));
}

namespace {

// Twice the Gini impurity times the node size: 2 p (n - p) / n.
inline double weighted_gini(std::size_t pos, std::size_t total) {
  if (total == 0) return 0.0;
  return 2.0 * static_cast<double>(pos) * static_cast<double>(total - pos) /
         static_cast<double>(total);
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingView& view, const TreeSpec& spec)
      : spec_(spec), m_(view.rows.size()), d_(view.columns), y_(view.targets.begin(), view.targets.end()) {
    values_.resize(d_ * m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto row = view.features.row(view.rows[i]);
      for (std::size_t f = 0; f < d_; ++f) values_[f * m_ + i] = row[f];
    }
    sorted_.resize(d_ * m_);
    for (std::size_t f = 0; f < d_; ++f) {
      auto first = sorted_.begin() + static_cast<std::ptrdiff_t>(f * m_);
      std::iota(first, first + static_cast<std::ptrdiff_t>(m_), 0u);
      const double* col = &values_[f * m_];
      std::stable_sort(first, first + static_cast<std::ptrdiff_t>(m_),
                       [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
    goes_left_.resize(m_);
    scratch_.resize(m_);
  }

  std::vector<DecisionTree::Node> build() {
    nodes_.emplace_back();
    if (d_ == 0) {
      make_leaf(0, static_cast<std::size_t>(std::ranges::count(y_, Bit{1})), m_);
    } else {
      grow(0, 0, m_, 0);
    }
    return std::move(nodes_);
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left_size = 0;
    double score = 0.0;
  };

  void make_leaf(std::size_t node, std::size_t pos, std::size_t total) {
    auto& n = nodes_[node];
    n.feature = -1;
    n.samples = total;
    n.prediction = 2 * pos >= total ? 1 : 0;  // equal counts predict 1
    n.positive_fraction = static_cast<double>(pos) / static_cast<double>(total);
  }

  std::optional<Split> best_split(std::size_t begin, std::size_t end, std::size_t pos) const {
    const std::size_t total = end - begin;
    const std::size_t min_leaf = std::max<std::size_t>(spec_.min_samples_leaf, 1);
    std::optional<Split> best;
    for (std::size_t f = 0; f < d_; ++f) {
      const std::uint32_t* order = &sorted_[f * m_];
      const double* col = &values_[f * m_];
      std::size_t left_pos = 0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        left_pos += y_[order[i]];
        const double a = col[order[i]];
        const double b = col[order[i + 1]];
        if (!(a < b)) continue;
        const std::size_t left = i + 1 - begin;
        if (left < min_leaf || total - left < min_leaf) continue;
        const double score =
            weighted_gini(left_pos, left) + weighted_gini(pos - left_pos, total - left);
        if (!best || score < best->score) {
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = Split{f, mid, left, score};
        }
      }
    }
    return best;
  }

  void grow(std::size_t node, std::size_t begin, std::size_t end, std::size_t depth) {
    const std::size_t total = end - begin;
    std::size_t pos = 0;
    for (std::size_t i = begin; i < end; ++i) pos += y_[sorted_[i]];
    const bool pure = pos == 0 || pos == total;
    const bool depth_reached = spec_.max_depth && depth >= *spec_.max_depth;
    if (pure || depth_reached || total < 2 * std::max<std::size_t>(spec_.min_samples_leaf, 1)) {
      make_leaf(node, pos, total);
      return;
    }
    const auto split = best_split(begin, end, pos);
    // Zero-gain splits are accepted (XOR-like targets need them); only a
    // split that makes impurity worse ends the branch.
    if (!split || split->score > weighted_gini(pos, total) + 1e-12) {
      make_leaf(node, pos, total);
      return;
    }

    const double* split_col = &values_[split->feature * m_];
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t r = sorted_[split->feature * m_ + i];
      goes_left_[r] = split_col[r] <= split->threshold;
    }
    for (std::size_t f = 0; f < d_; ++f) {
      std::uint32_t* seg = &sorted_[f * m_];
      std::size_t l = begin;
      std::size_t r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        if (goes_left_[seg[i]]) seg[l++] = seg[i];
        else scratch_[r++] = seg[i];
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r), seg + l);
    }

    const std::size_t mid = begin + split->left_size;
    const auto left = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    const auto right = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    auto& n = nodes_[node];
    n.feature = static_cast<std::int32_t>(split->feature);
    n.threshold = split->threshold;
    n.left = left;
    n.right = right;
    n.samples = total;
    n.positive_fraction = static_cast<double>(pos) / static_cast<double>(total);
    n.prediction = 2 * pos >= total ? 1 : 0;
    grow(static_cast<std::size_t>(left), begin, mid, depth + 1);
    grow(static_cast<std::size_t>(right), mid, end, depth + 1);
  }

  const TreeSpec& spec_;
  std::size_t m_;
  std::size_t d_;
  std::vector<Bit> y_;
  std::vector<double> values_;      // column-major copy of the view
  std::vector<std::uint32_t> sorted_;  // per-column row order; node segments align
  std::vector<bool> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

DecisionTree fit_tree(const TrainingView& view, const TreeSpec& spec) {
  if (view.rows.empty()) throw Error(ErrorKind::kInvalidArgument, "cannot fit a tree on no rows");
  if (view.rows.size() != view.targets.size()) {
    throw Error(ErrorKind::kLengthMismatch, "tree rows and targets differ in length");
  }
  if (view.columns > view.features.cols()) {
    throw Error(ErrorKind::kArityMismatch, "training view is wider than the feature matrix");
  }
  TreeBuilder builder(view, spec);
  return DecisionTree(view.columns, builder.build());
}

DecisionTree fit_tree(const BinaryDataset& bd, const TreeSpec& spec) {
  std::vector<std::size_t> rows(bd.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(TrainingView{bd.features, bd.features.cols(), rows, bd.targets}, spec);
}

}  // namespace chainbalance
