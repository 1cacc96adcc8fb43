#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "chainbalance/chain.hpp"
#include "chainbalance/error.hpp"
#include "support.hpp"

namespace cb = chainbalance;
using testsupport::make_dataset;

namespace {

// Features are noise; label 1 is an exact copy of label 0.
cb::MultiLabelDataset copied_label_dataset(std::size_t n, std::size_t positives, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> x(n, std::vector<double>(3));
  std::vector<std::vector<int>> y(n, {0, 0});
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x[i]) v = unit(gen);
    if (i % (n / positives) == 0 && i / (n / positives) < positives) y[i] = {1, 1};
  }
  return make_dataset(x, y);
}

std::vector<cb::Bit> column(const cb::MultiLabelDataset& ds, std::size_t label) {
  std::vector<cb::Bit> out(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) out[i] = ds.labels(i, label);
  return out;
}

cb::DecisionTree constant_tree(std::size_t arity, cb::Bit value) {
  cb::DecisionTree::Node leaf;
  leaf.prediction = value;
  return cb::DecisionTree(arity, {leaf});
}

}  // namespace

TEST(TrainCc, SingleLinkIsPlainBinaryTraining) {
  const auto ds = copied_label_dataset(60, 10, 1);
  const auto model = cb::train_cc(ds, {0}, {});
  ASSERT_EQ(model.links.size(), 1u);
  EXPECT_EQ(model.links[0].model.arity(), ds.d());
  const auto direct = cb::fit_tree(cb::BinaryDataset(ds.features, column(ds, 0)), {});
  EXPECT_EQ(model.links[0].model, direct);
  EXPECT_EQ(model.links[0].fit_rows, ds.n());
}

TEST(TrainCc, AugmentedColumnHoldsTrueLabels) {
  const auto ds = copied_label_dataset(60, 10, 2);
  cb::TreeSpec spec;
  spec.min_samples_leaf = 1;
  const auto model = cb::train_cc(ds, {0, 1}, spec);
  ASSERT_EQ(model.links.size(), 2u);
  EXPECT_EQ(model.links[0].model.arity(), ds.d());
  EXPECT_EQ(model.links[1].model.arity(), ds.d() + 1);
  // The copied label is learned from the augmented column alone: one split
  // on column d.
  const auto& tree = model.links[1].model;
  EXPECT_EQ(tree.depth(), 1u);
  EXPECT_EQ(tree.nodes()[0].feature, static_cast<int>(ds.d()));
  for (std::size_t i = 0; i < ds.n(); ++i) {
    std::vector<double> x(ds.features.row(i).begin(), ds.features.row(i).end());
    x.push_back(ds.labels(i, 0));
    EXPECT_EQ(tree.predict(x), ds.labels(i, 1));
  }
}

TEST(TrainCcru, MatchesHandBuiltAlgorithm) {
  // Independent rebuild: undersample, fit on d + j columns, then write the
  // link's predictions for all rows into the next column.
  std::mt19937_64 gen(3);
  const auto ds = testsupport::random_dataset(gen, 80, 4, 3);
  const cb::ChainSpec chain = {2, 0, 1};
  const cb::RngStream rng(17, {9});
  const auto model = cb::train_ccru(ds, chain, {}, rng);

  cb::Matrix<double> x(ds.n(), ds.d() + chain.size());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t f = 0; f < ds.d(); ++f) x(i, f) = ds.features(i, f);
  }
  for (std::size_t j = 0; j < chain.size(); ++j) {
    const auto y = column(ds, chain[j]);
    cb::RngStream link_rng = rng.derive({chain[j]});
    const auto kept = cb::undersample_indices(y, link_rng);
    cb::Matrix<double> fit_x(kept.size(), ds.d() + j);
    std::vector<cb::Bit> fit_y;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      for (std::size_t f = 0; f < ds.d() + j; ++f) fit_x(k, f) = x(kept[k], f);
      fit_y.push_back(y[kept[k]]);
    }
    const auto tree = cb::fit_tree(cb::BinaryDataset(fit_x, fit_y), {});
    EXPECT_EQ(model.links[j].model, tree) << "link " << j;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      std::vector<double> prefix(x.row(i).begin(), x.row(i).begin() + static_cast<long>(ds.d() + j));
      x(i, ds.d() + j) = tree.predict(prefix);
    }
  }
}

TEST(TrainCcru, LinksFitOnBalancedSets) {
  const auto ds = copied_label_dataset(100, 10, 4);
  const auto model = cb::train_ccru(ds, {0, 1}, {}, cb::RngStream(5));
  ASSERT_EQ(model.links.size(), 2u);
  EXPECT_EQ(model.links[0].fit_rows, 20u);
  EXPECT_EQ(model.links[0].fit_positives, 10u);
  EXPECT_EQ(model.links[1].fit_rows, 20u);
  EXPECT_EQ(model.links[1].model.arity(), ds.d() + 1);
}

TEST(TrainCcru, UsesPredictionsNotTruth) {
  // With noise features the first link cannot reproduce label 0 on rows it
  // never saw, so a chain trained on true values must differ somewhere.
  const auto ds = copied_label_dataset(200, 20, 6);
  cb::TreeSpec spec;
  spec.min_samples_leaf = 1;
  const auto ccru = cb::train_ccru(ds, {0, 1}, spec, cb::RngStream(8));
  std::size_t disagreements = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    disagreements += ccru.links[0].model.predict(ds.features.row(i)) != ds.labels(i, 0);
  }
  EXPECT_GT(disagreements, 0u);
}

TEST(TrainCcru, CopiedLabelsOfALearnableLabelVoteAlike) {
  // Label 0 is x0 itself; labels 1 and 2 copy it.
  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> y;
  for (int i = 0; i < 50; ++i) {
    const int bit = i % 5 == 0;
    x.push_back({static_cast<double>(bit), static_cast<double>(i % 7)});
    y.push_back({bit, bit, bit});
  }
  const auto ds = make_dataset(x, y);
  const auto model = cb::train_ccru(ds, {0, 1, 2}, {}, cb::RngStream(2));
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto votes = cb::predict_chain(model, ds.features.row(i));
    EXPECT_EQ(votes[0].second, votes[1].second);
    EXPECT_EQ(votes[1].second, votes[2].second);
  }
}

TEST(TrainCcru, SingleClassLabelThrows) {
  const auto ds = make_dataset({{0}, {1}, {2}}, {{1, 0}, {0, 0}, {1, 0}});
  try {
    cb::train_ccru(ds, {0, 1}, {}, cb::RngStream(1));
    FAIL();
  } catch (const cb::Error& e) {
    EXPECT_EQ(e.kind(), cb::ErrorKind::kSingleClassLabel);
  }
}

TEST(TrainCcru, Deterministic) {
  std::mt19937_64 gen(9);
  const auto ds = testsupport::random_dataset(gen, 70, 3, 4);
  const cb::RngStream rng(4, {1, 2});
  EXPECT_EQ(cb::train_ccru(ds, {3, 1, 0, 2}, {}, rng), cb::train_ccru(ds, {3, 1, 0, 2}, {}, rng));
}

TEST(ChainSpecValidation, RejectsDuplicatesAndRange) {
  EXPECT_THROW(cb::validate_chain({0, 0}, 2), cb::Error);
  EXPECT_THROW(cb::validate_chain({0, 2}, 2), cb::Error);
  EXPECT_THROW(cb::validate_chain({}, 2), cb::Error);
  EXPECT_NO_THROW(cb::validate_chain({1, 0}, 2));
}

TEST(PredictChain, ConstantLinks) {
  cb::ChainModel model;
  model.base_arity = 2;
  model.links.push_back({0, constant_tree(2, 1), 0, 0});
  model.links.push_back({1, constant_tree(3, 0), 0, 0});
  const auto votes = cb::predict_chain(model, std::vector<double>{0.3, 0.4});
  ASSERT_EQ(votes.size(), 2u);
  EXPECT_EQ(votes[0], cb::LabelVote(0, 1));
  EXPECT_EQ(votes[1], cb::LabelVote(1, 0));
}

TEST(PredictChain, LaterLinksSeeEarlierPredictions) {
  // Link 1 copies the augmented column: left (<= 0.5) predicts 0.
  cb::DecisionTree::Node root;
  root.feature = 1;
  root.threshold = 0.5;
  root.left = 1;
  root.right = 2;
  cb::DecisionTree::Node zero, one;
  one.prediction = 1;
  cb::ChainModel model;
  model.base_arity = 1;
  model.links.push_back({4, constant_tree(1, 1), 0, 0});
  model.links.push_back({2, cb::DecisionTree(2, {root, zero, one}), 0, 0});
  const auto votes = cb::predict_chain(model, std::vector<double>{7.0});
  EXPECT_EQ(votes, (std::vector<cb::LabelVote>{{4, 1}, {2, 1}}));
}

TEST(PredictChain, PartialChainVotesOnlyForItsLabels) {
  std::mt19937_64 gen(10);
  const auto ds = testsupport::random_dataset(gen, 60, 3, 5);
  const auto model = cb::train_ccru(ds, {3, 1}, {}, cb::RngStream(1));
  const auto votes = cb::predict_chain(model, ds.features.row(0));
  ASSERT_EQ(votes.size(), 2u);
  EXPECT_EQ(votes[0].first, 3u);
  EXPECT_EQ(votes[1].first, 1u);
}

TEST(PredictChain, ArityMismatch) {
  std::mt19937_64 gen(11);
  const auto ds = testsupport::random_dataset(gen, 30, 3, 2);
  const auto model = cb::train_cc(ds, {0, 1}, {});
  try {
    cb::predict_chain(model, std::vector<double>{1.0, 2.0});
    FAIL();
  } catch (const cb::Error& e) {
    EXPECT_EQ(e.kind(), cb::ErrorKind::kArityMismatch);
  }
}

TEST(ChainProperties, CcruLinksAlwaysBalancedAndArityLaw) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = testsupport::random_dataset(gen, 30 + trial, 2 + trial % 3, 2 + trial % 4);
    cb::ChainSpec chain(ds.q());
    std::iota(chain.begin(), chain.end(), 0);
    std::shuffle(chain.begin(), chain.end(), gen);
    const auto model = cb::train_ccru(ds, chain, {}, cb::RngStream(trial));
    for (std::size_t j = 0; j < model.links.size(); ++j) {
      const auto& link = model.links[j];
      ASSERT_EQ(link.label, chain[j]);
      ASSERT_EQ(2 * link.fit_positives, link.fit_rows);
      const std::size_t pos = ds.positives(link.label);
      ASSERT_EQ(link.fit_positives, std::min(pos, ds.n() - pos));
      ASSERT_EQ(link.model.arity(), ds.d() + j);
    }
  }
}
