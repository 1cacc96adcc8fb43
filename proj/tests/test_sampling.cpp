#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "chainbalance/error.hpp"
#include "chainbalance/rng.hpp"
#include "chainbalance/sampling.hpp"
#include "support.hpp"

namespace cb = chainbalance;
using testsupport::make_dataset;

namespace {

std::vector<std::uint64_t> draw(cb::RngStream rng, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(rng.engine()());
  return out;
}

cb::BinaryDataset binary(std::size_t positives, std::size_t negatives) {
  const std::size_t n = positives + negatives;
  cb::Matrix<double> x(n, 1);
  std::vector<cb::Bit> y(n, 0);
  for (std::size_t i = 0; i < n; ++i) x(i, 0) = static_cast<double>(i);
  // Interleave so that order preservation is observable.
  for (std::size_t i = 0; i < positives; ++i) y[(i * n) / positives] = 1;
  return cb::BinaryDataset(std::move(x), std::move(y));
}

}  // namespace

TEST(RngStream, SameIdentitySameSequence) {
  EXPECT_EQ(draw(cb::RngStream(5, {1, 2}), 8), draw(cb::RngStream(5, {1, 2}), 8));
  EXPECT_EQ(draw(cb::RngStream(5, {1}).derive({2}), 8), draw(cb::RngStream(5, {1, 2}), 8));
  EXPECT_NE(draw(cb::RngStream(5, {1, 2}), 8), draw(cb::RngStream(5, {2, 1}), 8));
  EXPECT_NE(draw(cb::RngStream(5, {1, 2}), 8), draw(cb::RngStream(6, {1, 2}), 8));
  EXPECT_NE(draw(cb::RngStream(5, {}), 8), draw(cb::RngStream(5, {0}), 8));
}

TEST(RngStream, DerivingDoesNotDependOnConsumption) {
  cb::RngStream a(9, {4});
  const cb::RngStream b(9, {4});
  a.engine()();
  a.uniform01();
  EXPECT_EQ(draw(a.derive({3}), 4), draw(b.derive({3}), 4));
}

TEST(RngStream, UniformRanges) {
  cb::RngStream rng(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++hist[rng.uniform_index(7)];
  }
  for (int h : hist) EXPECT_NEAR(h, 1000, 150);
}

TEST(Bootstrap, SingleRow) {
  const auto ds = make_dataset({{3.0}}, {{1}});
  cb::RngStream rng(1);
  const auto out = cb::bootstrap(ds, rng);
  EXPECT_EQ(out.n(), 1u);
  EXPECT_EQ(out.features, ds.features);
}

TEST(Bootstrap, ReproducibleAndPairsPreserved) {
  std::mt19937_64 gen(2);
  const auto ds = testsupport::random_dataset(gen, 40, 3, 3);
  cb::RngStream r1(77, {1}), r2(77, {1});
  const auto a = cb::bootstrap(ds, r1);
  const auto b = cb::bootstrap(ds, r2);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  // Each drawn row is an original row, features and labels together.
  for (std::size_t i = 0; i < a.n(); ++i) {
    bool found = false;
    for (std::size_t r = 0; r < ds.n() && !found; ++r) {
      found = std::ranges::equal(a.features.row(i), ds.features.row(r)) &&
              std::ranges::equal(a.labels.row(i), ds.labels.row(r));
    }
    EXPECT_TRUE(found);
  }
}

TEST(Bootstrap, DistinctFractionMatchesInclusionProbability) {
  // Oracle: 1 - (1 - 1/n)^n for n = 1000.
  const std::size_t n = 1000;
  const double expected = 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(n), static_cast<double>(n));
  double total = 0.0;
  std::vector<char> seen(n);
  for (std::uint64_t b = 0; b < 10000; ++b) {
    cb::RngStream rng(123, {b});
    std::ranges::fill(seen, 0);
    for (std::size_t idx : cb::bootstrap_indices(n, rng)) seen[idx] = 1;
    total += static_cast<double>(std::ranges::count(seen, 1)) / static_cast<double>(n);
  }
  EXPECT_NEAR(total / 10000.0, expected, 0.01);
  EXPECT_NEAR(expected, 0.632, 0.001);
}

TEST(Undersample, TenVersusNinety) {
  const auto bd = binary(10, 90);
  cb::RngStream rng(4);
  const auto rows = cb::undersample_indices(bd.targets, rng);
  ASSERT_EQ(rows.size(), 20u);
  EXPECT_TRUE(std::ranges::is_sorted(rows));
  std::size_t pos = 0;
  for (std::size_t r : rows) pos += bd.targets[r];
  EXPECT_EQ(pos, 10u);
  for (std::size_t i = 0; i < bd.rows(); ++i) {
    if (bd.targets[i]) EXPECT_TRUE(std::ranges::binary_search(rows, i));
  }
  cb::RngStream rng2(4);
  const auto out = cb::random_undersample(bd, rng2);
  EXPECT_EQ(out.positive_count, 10u);
  EXPECT_EQ(out.negative_count, 10u);
  // Original relative order survives (feature 0 is the original row index).
  for (std::size_t i = 1; i < out.rows(); ++i) EXPECT_LT(out.features(i - 1, 0), out.features(i, 0));
}

TEST(Undersample, BalancedInputUnchanged) {
  const auto bd = binary(50, 50);
  cb::RngStream rng(4);
  const auto out = cb::random_undersample(bd, rng);
  EXPECT_EQ(out.features, bd.features);
  EXPECT_EQ(out.targets, bd.targets);
}

TEST(Undersample, PositivesCanBeTheMajority) {
  const auto bd = binary(30, 5);
  cb::RngStream rng(8);
  const auto out = cb::random_undersample(bd, rng);
  EXPECT_EQ(out.positive_count, 5u);
  EXPECT_EQ(out.negative_count, 5u);
}

TEST(Undersample, SingleClassInputThrows) {
  const auto bd = binary(0, 100);
  cb::RngStream rng(4);
  try {
    cb::random_undersample(bd, rng);
    FAIL();
  } catch (const cb::Error& e) {
    EXPECT_EQ(e.kind(), cb::ErrorKind::kSingleClassInput);
  }
}

TEST(Undersample, MajorityRowsAreDrawnUniformly) {
  // 2 positives, 8 negatives: each negative kept with probability 2/8.
  const auto bd = binary(2, 8);
  std::vector<int> kept(bd.rows(), 0);
  const int trials = 8000;
  for (int t = 0; t < trials; ++t) {
    cb::RngStream rng(31, {static_cast<std::uint64_t>(t)});
    for (std::size_t r : cb::undersample_indices(bd.targets, rng)) ++kept[r];
  }
  for (std::size_t i = 0; i < bd.rows(); ++i) {
    if (bd.targets[i]) EXPECT_EQ(kept[i], trials);
    else EXPECT_NEAR(kept[i] / static_cast<double>(trials), 0.25, 0.025);
  }
}

TEST(UndersampleProperties, AlwaysExactlyBalanced) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<std::size_t> count(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t p = count(gen), m = count(gen);
    auto bd = binary(p, m);
    std::shuffle(bd.targets.begin(), bd.targets.end(), gen);
    cb::RngStream rng(trial);
    const auto rows = cb::undersample_indices(bd.targets, rng);
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += bd.targets[r];
    ASSERT_EQ(pos, std::min(p, m));
    ASSERT_EQ(rows.size() - pos, std::min(p, m));
    ASSERT_EQ(std::set<std::size_t>(rows.begin(), rows.end()).size(), rows.size());
  }
}

TEST(StratifiedKFold, FourRowsTwoPositives) {
  const auto ds = make_dataset({{0}, {1}, {2}, {3}}, {{1}, {1}, {0}, {0}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cb::RngStream rng(seed);
    const auto folds = cb::iterative_stratified_kfold(ds, 2, rng);
    ASSERT_EQ(folds.size(), 2u);
    for (const auto& fold : folds) {
      EXPECT_EQ(fold.size(), 2u);
      EXPECT_EQ(std::ranges::count_if(fold, [&](std::size_t r) { return ds.labels(r, 0) == 1; }), 1);
    }
  }
}

TEST(StratifiedKFold, KEqualsNGivesSingletons) {
  std::mt19937_64 gen(6);
  const auto ds = testsupport::random_dataset(gen, 7, 2, 2);
  cb::RngStream rng(1);
  const auto folds = cb::iterative_stratified_kfold(ds, 7, rng);
  for (const auto& fold : folds) EXPECT_EQ(fold.size(), 1u);
}

TEST(StratifiedKFold, ExactProportionalSplit) {
  std::vector<std::vector<double>> x(100, {0.0});
  std::vector<std::vector<int>> y(100, {0});
  for (int i = 0; i < 100; i += 10) y[i][0] = 1;
  const auto ds = make_dataset(x, y);
  cb::RngStream rng(3);
  const auto folds = cb::iterative_stratified_kfold(ds, 5, rng);
  for (const auto& fold : folds) {
    EXPECT_EQ(fold.size(), 20u);
    EXPECT_EQ(std::ranges::count_if(fold, [&](std::size_t r) { return ds.labels(r, 0) == 1; }), 2);
  }
}

TEST(StratifiedKFold, RejectsBadK) {
  const auto ds = make_dataset({{0}, {1}}, {{1}, {0}});
  cb::RngStream rng(1);
  EXPECT_THROW(cb::iterative_stratified_kfold(ds, 1, rng), cb::Error);
  EXPECT_THROW(cb::iterative_stratified_kfold(ds, 3, rng), cb::Error);
}

TEST(StratifiedKFoldProperties, PartitionBalancedSizesAndReproducible) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + trial * 3;
    const std::size_t k = 2 + trial % 5;
    const auto ds = testsupport::random_dataset(gen, n, 3, 1 + trial % 6);
    cb::RngStream r1(trial), r2(trial);
    const auto folds = cb::iterative_stratified_kfold(ds, k, r1);
    ASSERT_EQ(folds, cb::iterative_stratified_kfold(ds, k, r2));
    std::vector<std::size_t> all;
    std::size_t smallest = n, largest = 0;
    for (const auto& fold : folds) {
      all.insert(all.end(), fold.begin(), fold.end());
      smallest = std::min(smallest, fold.size());
      largest = std::max(largest, fold.size());
    }
    std::ranges::sort(all);
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), 0);
    ASSERT_EQ(all, expected);
    ASSERT_LE(largest - smallest, 1u);
    // Every label's positives spread within two of the proportional share.
    for (std::size_t l = 0; l < ds.q(); ++l) {
      const double ideal = static_cast<double>(ds.positives(l)) / static_cast<double>(k);
      for (const auto& fold : folds) {
        const auto pos = std::ranges::count_if(fold, [&](std::size_t r) { return ds.labels(r, l) == 1; });
        EXPECT_LE(std::abs(static_cast<double>(pos) - ideal), 2.0) << "trial " << trial << " label " << l;
      }
    }
  }
}
