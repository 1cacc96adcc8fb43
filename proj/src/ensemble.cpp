#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "chainbalance/ensemble.hpp"
#include "chainbalance/error.hpp"
#include "chainbalance/sampling.hpp"

namespace chainbalance {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kBR: return "BR";
    case Method::kBRUS: return "BRUS";
    case Method::kEBRUS: return "EBRUS";
    case Method::kECC: return "ECC";
    case Method::kECCRU: return "ECCRU";
    case Method::kECCRU2: return "ECCRU2";
    case Method::kECCRU3: return "ECCRU3";
  }
  return "?";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> kAll = {Method::kBR,    Method::kBRUS,   Method::kEBRUS,
                                           Method::kECC,   Method::kECCRU,  Method::kECCRU2,
                                           Method::kECCRU3};
  return kAll;
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

void EnsembleSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (chains < 1) fail("ensemble.c must be at least 1");
  if (!(theta_max >= 1.0)) fail("ensemble.theta_max must be at least 1");
  if (theta_min && method != Method::kECCRU3) fail("ensemble.theta_min only applies to ECCRU3");
  if (method == Method::kECCRU3) {
    const double lo = effective_theta_min() * static_cast<double>(chains);
    if (lo < 1.0 - 1e-9 || effective_theta_min() > 1.0 + 1e-9) {
      fail("ensemble.theta_min must lie in [1/c, 1]");
    }
  }
  if (tree.min_samples_leaf < 1) fail("tree.min_samples_leaf must be at least 1");
  if (tree.max_depth && *tree.max_depth < 1) fail("tree.max_depth must be positive");
}

std::size_t EnsembleSpec::max_classifiers() const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(chains) * theta_max + 1e-9));
}

std::size_t EnsembleSpec::min_classifiers() const {
  return static_cast<std::size_t>(
      std::ceil(static_cast<double>(chains) * effective_theta_min() - 1e-9));
}

ClassifierBudget compute_classifier_budget(std::span<const std::size_t> minority_counts,
                                           const EnsembleSpec& spec) {
  if (minority_counts.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "classifier budget needs at least one label");
  }
  ClassifierBudget budget;
  for (std::size_t m : minority_counts) {
    if (m == 0) throw Error(ErrorKind::kZeroMinorityCount, "a label has no minority examples");
    budget.total_minority += m;
  }
  const std::size_t q = minority_counts.size();
  const std::size_t numerator = spec.chains * budget.total_minority;
  for (std::size_t m : minority_counts) {
    budget.raw.push_back(numerator / (q * m));  // integer division is the floor
  }
  budget.clamped = budget.raw;
  if (spec.method == Method::kECCRU2 || spec.method == Method::kECCRU3) {
    const std::size_t hi = spec.max_classifiers();
    const std::size_t lo = spec.method == Method::kECCRU3 ? spec.min_classifiers() : 0;
    for (auto& c : budget.clamped) c = std::min(std::max(c, lo), hi);
  }
  return budget;
}

std::vector<std::vector<std::size_t>> plan_partial_chains(std::span<const std::size_t> budget,
                                                          std::size_t max_chains) {
  std::vector<std::size_t> remaining(budget.begin(), budget.end());
  std::vector<std::vector<std::size_t>> plan;
  for (std::size_t i = 0; i < max_chains; ++i) {
    std::vector<std::size_t> members;
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      if (remaining[j] > 0) {
        members.push_back(j);
        --remaining[j];
      }
    }
    if (members.size() < 2) break;
    plan.push_back(std::move(members));
  }
  return plan;
}

namespace {

struct LabelPlan {
  std::vector<std::size_t> eligible;  // labels with both classes present
  std::vector<std::size_t> minority;  // m_j of each eligible label
  std::vector<std::optional<Bit>> constant;
  std::vector<std::size_t> skipped;
};

LabelPlan plan_labels(const MultiLabelDataset& ds) {
  LabelPlan plan;
  plan.constant.assign(ds.q(), std::nullopt);
  for (std::size_t j = 0; j < ds.q(); ++j) {
    const auto stats = compute_label_stats(ds, j);
    if (stats.minority_count == 0) {
      plan.constant[j] = static_cast<Bit>(1 - stats.minority_class);
      plan.skipped.push_back(j);
    } else {
      plan.eligible.push_back(j);
      plan.minority.push_back(stats.minority_count);
    }
  }
  return plan;
}

// One unit of parallel work: a chain, or for EBRUS one bagging round.
struct Job {
  std::vector<std::size_t> labels;
  bool bootstrap = false;
  bool permute = false;
  bool undersample = false;
  bool one_chain_per_label = false;
};

std::vector<Job> plan_jobs(const EnsembleSpec& spec, const LabelPlan& labels,
                           std::vector<std::size_t>& classifier_budget) {
  std::vector<Job> jobs;
  const std::size_t c = spec.chains;
  switch (spec.method) {
    case Method::kBR:
    case Method::kBRUS:
      for (std::size_t label : labels.eligible) {
        jobs.push_back(Job{{label}, false, false, spec.method == Method::kBRUS, false});
      }
      break;
    case Method::kEBRUS:
      for (std::size_t i = 0; i < c; ++i) jobs.push_back(Job{labels.eligible, true, false, true, true});
      break;
    case Method::kECC:
    case Method::kECCRU:
      for (std::size_t i = 0; i < c; ++i) {
        jobs.push_back(Job{labels.eligible, true, true, spec.method == Method::kECCRU, false});
      }
      break;
    case Method::kECCRU2:
    case Method::kECCRU3: {
      if (labels.eligible.size() < 2) {
        // Partial chains need two labels; a lone label gets the ECCRU build.
        for (std::size_t i = 0; i < c; ++i) jobs.push_back(Job{labels.eligible, true, true, true, false});
        break;
      }
      const auto budget = compute_classifier_budget(labels.minority, spec);
      classifier_budget.assign(labels.constant.size(), 0);
      for (std::size_t k = 0; k < labels.eligible.size(); ++k) {
        classifier_budget[labels.eligible[k]] = budget.clamped[k];
      }
      for (const auto& members : plan_partial_chains(budget.clamped, spec.max_classifiers())) {
        Job job{{}, true, true, true, false};
        for (std::size_t k : members) job.labels.push_back(labels.eligible[k]);
        jobs.push_back(std::move(job));
      }
      break;
    }
  }
  return jobs;
}

std::vector<ChainModel> run_job(const MultiLabelDataset& ds, const EnsembleSpec& spec,
                                const Job& job, std::size_t index) {
  const RngStream rng(spec.seed, {stream_tag::kChain, index});
  MultiLabelDataset resampled;
  const MultiLabelDataset* data = &ds;
  if (job.bootstrap) {
    RngStream boot_rng = rng.derive({0});
    resampled = bootstrap(ds, boot_rng);
    data = &resampled;
  }
  std::vector<std::size_t> labels = job.labels;
  if (job.permute) {
    RngStream perm_rng = rng.derive({1});
    for (std::size_t i = labels.size(); i > 1; --i) {
      std::swap(labels[i - 1], labels[perm_rng.uniform_index(i)]);
    }
  }
  if (job.undersample) {
    // A bootstrap can lose every minority row of a rare label; such labels
    // sit out this chain and cc reflects it.
    std::erase_if(labels, [&](std::size_t label) {
      const std::size_t pos = data->positives(label);
      return pos == 0 || pos == data->n();
    });
  }

  std::vector<ChainModel> out;
  const RngStream fit_rng = rng.derive({2});
  auto train = [&](const ChainSpec& chain) {
    out.push_back(job.undersample ? train_ccru(*data, chain, spec.tree, fit_rng)
                                  : train_cc(*data, chain, spec.tree));
  };
  if (labels.empty()) return out;
  if (job.one_chain_per_label) {
    for (std::size_t label : labels) train({label});
  } else {
    train(labels);
  }
  return out;
}

}  // namespace

EnsembleModel train_ensemble(const MultiLabelDataset& ds, const EnsembleSpec& spec, Execution exec) {
  spec.validate();
  ds.validate();
  const LabelPlan labels = plan_labels(ds);
  if (labels.eligible.empty()) {
    throw Error(ErrorKind::kNoTrainableLabels, "every label is single-class");
  }

  EnsembleModel model;
  model.method = spec.method;
  model.q = ds.q();
  model.d = ds.d();
  model.constant = labels.constant;
  model.skipped_labels = labels.skipped;
  const std::vector<Job> jobs = plan_jobs(spec, labels, model.classifier_budget);

  std::vector<std::vector<ChainModel>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto job_count = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) if (exec == Execution::kParallel)
  for (std::ptrdiff_t i = 0; i < job_count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      results[k] = run_job(ds, spec, jobs[k], k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  model.vote_counts.assign(ds.q(), 0);
  for (auto& chains : results) {
    for (auto& chain : chains) {
      for (const auto& link : chain.links) {
        ++model.vote_counts[link.label];
        model.rows_fitted += link.fit_rows;
      }
      model.chains.push_back(std::move(chain));
    }
  }
  for (std::size_t label : labels.eligible) {
    if (model.vote_counts[label] == 0) {
      model.constant[label] = compute_label_stats(ds, label).minority_class == 1 ? 0 : 1;
      model.skipped_labels.push_back(label);
    }
  }
  std::ranges::sort(model.skipped_labels);
  return model;
}

namespace {

void relevance_into(const EnsembleModel& model, std::span<const double> x,
                    std::span<double> scratch, std::span<std::size_t> votes,
                    std::span<double> out) {
  std::ranges::fill(votes, 0);
  for (const ChainModel& chain : model.chains) {
    predict_chain_into(chain, x, scratch, [&](std::size_t label, Bit vote) { votes[label] += vote; });
  }
  for (std::size_t k = 0; k < model.q; ++k) {
    if (model.constant[k]) {
      out[k] = static_cast<double>(*model.constant[k]);
    } else {
      out[k] = static_cast<double>(votes[k]) / static_cast<double>(model.vote_counts[k]);
    }
  }
}

std::size_t scratch_size(const EnsembleModel& model) {
  std::size_t longest = 0;
  for (const auto& chain : model.chains) longest = std::max(longest, chain.links.size());
  return model.d + longest;
}

}  // namespace

std::vector<double> predict_relevance(const EnsembleModel& model, std::span<const double> x) {
  if (x.size() != model.d) {
    throw Error(ErrorKind::kArityMismatch, "ensemble expects " + std::to_string(model.d) +
                                               " features, got " + std::to_string(x.size()));
  }
  std::vector<double> scratch(scratch_size(model));
  std::vector<std::size_t> votes(model.q);
  std::vector<double> out(model.q);
  relevance_into(model, x, scratch, votes, out);
  return out;
}

Matrix<double> predict_relevance_batch(const EnsembleModel& model, const Matrix<double>& features,
                                       Execution exec) {
  if (features.cols() != model.d) {
    throw Error(ErrorKind::kArityMismatch, "ensemble expects " + std::to_string(model.d) +
                                               " features, got " + std::to_string(features.cols()));
  }
  Matrix<double> out(features.rows(), model.q);
  const auto rows = static_cast<std::ptrdiff_t>(features.rows());
  const std::size_t width = scratch_size(model);
#pragma omp parallel if (exec == Execution::kParallel)
  {
    std::vector<double> scratch(width);
    std::vector<std::size_t> votes(model.q);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      const auto r = static_cast<std::size_t>(i);
      relevance_into(model, features.row(r), scratch, votes, out.row(r));
    }
  }
  return out;
}

std::size_t instance_budget(const MultiLabelDataset& ds, const EnsembleSpec& spec) {
  spec.validate();
  const LabelPlan labels = plan_labels(ds);
  if (labels.eligible.empty()) {
    throw Error(ErrorKind::kNoTrainableLabels, "every label is single-class");
  }
  const std::size_t c = spec.chains;
  const std::size_t balanced = 2 * std::accumulate(labels.minority.begin(), labels.minority.end(),
                                                   std::size_t{0});
  const std::size_t q = labels.eligible.size();
  switch (spec.method) {
    case Method::kBR: return q * ds.n();
    case Method::kECC: return c * q * ds.n();
    case Method::kBRUS: return balanced;
    case Method::kEBRUS:
    case Method::kECCRU: return c * balanced;
    case Method::kECCRU2:
    case Method::kECCRU3: {
      if (q < 2) return c * balanced;
      const auto budget = compute_classifier_budget(labels.minority, spec);
      std::size_t total = 0;
      for (const auto& members : plan_partial_chains(budget.clamped, spec.max_classifiers())) {
        for (std::size_t k : members) total += 2 * labels.minority[k];
      }
      return total;
    }
  }
  return 0;
}

}  // namespace chainbalance
