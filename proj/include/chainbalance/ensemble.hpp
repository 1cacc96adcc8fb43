#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chainbalance/chain.hpp"
#include "chainbalance/dataset.hpp"
#include "chainbalance/parallel.hpp"
#include "chainbalance/tree.hpp"

namespace chainbalance {

enum class Method { kBR, kBRUS, kEBRUS, kECC, kECCRU, kECCRU2, kECCRU3 };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);  // throws Error(kInvalidArgument)
const std::vector<Method>& all_methods();

struct EnsembleSpec {
  Method method = Method::kECCRU3;
  std::size_t chains = 10;      // c
  double theta_max = 10.0;
  std::optional<double> theta_min;  // ECCRU3 only; 0.5 when unset
  TreeSpec tree;
  std::uint64_t seed = 0;

  static constexpr double kDefaultThetaMin = 0.5;

  // Throws Error(kInvalidArgument) on an inconsistent spec.
  void validate() const;
  double effective_theta_min() const { return theta_min.value_or(kDefaultThetaMin); }
  // Largest / smallest per-label classifier counts allowed by the clamps.
  std::size_t max_classifiers() const;
  std::size_t min_classifiers() const;
};

// Per-label classifier counts. `raw` is floor(c * sum(m) / (q * m_j)); `clamped`
// applies the method's bounds (upper only for ECCRU2, both for ECCRU3; for
// every other method it equals raw).
struct ClassifierBudget {
  std::vector<std::size_t> raw;
  std::vector<std::size_t> clamped;
  std::size_t total_minority = 0;
};

ClassifierBudget compute_classifier_budget(std::span<const std::size_t> minority_counts,
                                           const EnsembleSpec& spec);

// Label subsets (positions into the budget vector, ascending) of the partial
// chains built from per-label counters; stops once fewer than two labels remain
// or max_chains chains have been planned.
std::vector<std::vector<std::size_t>> plan_partial_chains(std::span<const std::size_t> budget,
                                                          std::size_t max_chains);

struct EnsembleModel {
  Method method = Method::kECCRU3;
  std::size_t q = 0;
  std::size_t d = 0;
  std::vector<ChainModel> chains;
  std::vector<std::size_t> vote_counts;  // cc: fitted classifiers per label
  // Labels answered by a constant instead of votes (single-class labels, or
  // labels no classifier ended up covering).
  std::vector<std::optional<Bit>> constant;
  std::vector<std::size_t> skipped_labels;
  // Per-label counts c_j for ECCRU2/ECCRU3 (clamped), empty otherwise.
  std::vector<std::size_t> classifier_budget;
  std::size_t rows_fitted = 0;  // total rows over all tree fits

  bool operator==(const EnsembleModel&) const = default;
};

EnsembleModel train_ensemble(const MultiLabelDataset& ds, const EnsembleSpec& spec,
                             Execution exec = Execution::kParallel);

// Relevance degree per label: positive votes over cc_k.
std::vector<double> predict_relevance(const EnsembleModel& model, std::span<const double> x);

// Relevance for every row of `features` (n x q). The serial variant is the
// reference kernel; the parallel one splits rows across threads.
Matrix<double> predict_relevance_batch(const EnsembleModel& model, const Matrix<double>& features,
                                       Execution exec = Execution::kParallel);

// Training rows consumed by all classifier fits, from label statistics alone.
std::size_t instance_budget(const MultiLabelDataset& ds, const EnsembleSpec& spec);

}  // namespace chainbalance
