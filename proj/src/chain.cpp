#include <cassert>
#include <unordered_set>

#include "chainbalance/chain.hpp"
#include "chainbalance/error.hpp"

namespace chainbalance {
namespace {

// Base features with room for one augmented column per link except the last.
Matrix<double> augmented_copy(const MultiLabelDataset& ds, std::size_t chain_length) {
  Matrix<double> x(ds.n(), ds.d() + (chain_length > 0 ? chain_length - 1 : 0));
  for (std::size_t i = 0; i < ds.n(); ++i) {
    std::ranges::copy(ds.features.row(i), x.row(i).begin());
  }
  return x;
}

std::vector<Bit> label_column(const MultiLabelDataset& ds, std::size_t label) {
  std::vector<Bit> y(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) y[i] = ds.labels(i, label);
  return y;
}

}  // namespace

void validate_chain(const ChainSpec& chain, std::size_t q) {
  if (chain.empty()) throw Error(ErrorKind::kInvalidArgument, "chain is empty");
  std::unordered_set<std::size_t> seen;
  for (std::size_t label : chain) {
    if (label >= q) throw Error(ErrorKind::kInvalidArgument, "chain label out of range");
    if (!seen.insert(label).second) {
      throw Error(ErrorKind::kInvalidArgument, "chain repeats a label");
    }
  }
}

ChainModel train_cc(const MultiLabelDataset& ds, const ChainSpec& chain, const TreeSpec& spec) {
  validate_chain(chain, ds.q());
  if (ds.n() == 0) throw Error(ErrorKind::kInvalidArgument, "cannot train a chain on no rows");
  const std::size_t d = ds.d();
  Matrix<double> x = augmented_copy(ds, chain.size());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) x(i, d + j) = ds.labels(i, chain[j]);
  }
  std::vector<std::size_t> all(ds.n());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  ChainModel model;
  model.base_arity = d;
  for (std::size_t j = 0; j < chain.size(); ++j) {
    const auto y = label_column(ds, chain[j]);
    ChainLink link;
    link.label = chain[j];
    link.model = fit_tree(TrainingView{x, d + j, all, y}, spec);
    link.fit_rows = all.size();
    link.fit_positives = static_cast<std::size_t>(std::ranges::count(y, Bit{1}));
    model.links.push_back(std::move(link));
  }
  return model;
}

ChainModel train_ccru(const MultiLabelDataset& ds, const ChainSpec& chain, const TreeSpec& spec,
                      const RngStream& rng) {
  validate_chain(chain, ds.q());
  for (std::size_t label : chain) {
    const std::size_t pos = ds.positives(label);
    if (pos == 0 || pos == ds.n()) {
      throw Error(ErrorKind::kSingleClassLabel,
                  "label " + std::to_string(label) + " is single-class in the chain's training set");
    }
  }
  const std::size_t d = ds.d();
  Matrix<double> x = augmented_copy(ds, chain.size());

  ChainModel model;
  model.base_arity = d;
  for (std::size_t j = 0; j < chain.size(); ++j) {
    const auto y = label_column(ds, chain[j]);
    RngStream link_rng = rng.derive({chain[j]});
    const auto kept = undersample_indices(y, link_rng);
    std::vector<Bit> kept_y(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) kept_y[k] = y[kept[k]];

    ChainLink link;
    link.label = chain[j];
    link.model = fit_tree(TrainingView{x, d + j, kept, kept_y}, spec);
    link.fit_rows = kept.size();
    link.fit_positives = static_cast<std::size_t>(std::ranges::count(kept_y, Bit{1}));
    assert(2 * link.fit_positives == link.fit_rows);

    if (j + 1 < chain.size()) {
      // Predictions on every row, including majority rows the link never saw.
      for (std::size_t i = 0; i < ds.n(); ++i) {
        x(i, d + j) = link.model.predict_prefix(x.row(i));
      }
    }
    model.links.push_back(std::move(link));
  }
  return model;
}

std::vector<LabelVote> predict_chain(const ChainModel& model, std::span<const double> x) {
  if (x.size() != model.base_arity) {
    throw Error(ErrorKind::kArityMismatch, "chain expects " + std::to_string(model.base_arity) +
                                               " features, got " + std::to_string(x.size()));
  }
  std::vector<double> scratch(model.base_arity + model.links.size());
  std::vector<LabelVote> votes;
  votes.reserve(model.links.size());
  predict_chain_into(model, x, scratch,
                     [&](std::size_t label, Bit vote) { votes.emplace_back(label, vote); });
  return votes;
}

}  // namespace chainbalance
