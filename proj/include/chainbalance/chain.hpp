#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "chainbalance/dataset.hpp"
#include "chainbalance/rng.hpp"
#include "chainbalance/tree.hpp"

namespace chainbalance {

// Ordered, duplicate-free list of label indices.
using ChainSpec = std::vector<std::size_t>;

struct ChainLink {
  std::size_t label = 0;
  DecisionTree model;
  // Size and positives of the set the model was fitted on.
  std::size_t fit_rows = 0;
  std::size_t fit_positives = 0;

  bool operator==(const ChainLink&) const = default;
};

// Link j (0-based) consumes the d base features followed by the predictions
// of links 0..j-1, so its model has arity d + j.
struct ChainModel {
  std::vector<ChainLink> links;
  std::size_t base_arity = 0;

  bool operator==(const ChainModel&) const = default;
};

// Classic chain: augmented columns carry the true values of earlier labels.
ChainModel train_cc(const MultiLabelDataset& ds, const ChainSpec& chain, const TreeSpec& spec);

// Each link is fitted on a randomly undersampled, exactly balanced subset,
// and augmented columns carry the link's predictions on every row.
ChainModel train_ccru(const MultiLabelDataset& ds, const ChainSpec& chain, const TreeSpec& spec,
                      const RngStream& rng);

using LabelVote = std::pair<std::size_t, Bit>;

std::vector<LabelVote> predict_chain(const ChainModel& model, std::span<const double> x);

// Allocation-free variant for hot loops. `scratch` must hold at least
// base_arity + links.size() values; `on_vote(label, bit)` is called per link.
template <typename OnVote>
void predict_chain_into(const ChainModel& model, std::span<const double> x,
                        std::span<double> scratch, OnVote&& on_vote) {
  std::copy(x.begin(), x.end(), scratch.begin());
  for (std::size_t j = 0; j < model.links.size(); ++j) {
    const Bit vote = model.links[j].model.predict_prefix(scratch);
    scratch[model.base_arity + j] = vote;
    on_vote(model.links[j].label, vote);
  }
}

void validate_chain(const ChainSpec& chain, std::size_t q);

}  // namespace chainbalance
