#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "chainbalance/error.hpp"
#include "chainbalance/experiment.hpp"
#include "chainbalance/sampling.hpp"

namespace chainbalance {

using nlohmann::json;

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (methods.empty()) fail("no methods configured");
  if (repeats < 1) fail("cv.repeats must be at least 1");
  if (folds < 2) fail("cv.folds must be at least 2");
  if (feature_keep_fraction && !(*feature_keep_fraction > 0.0 && *feature_keep_fraction <= 1.0)) {
    fail("feature_keep_fraction must lie in (0, 1]");
  }
  for (Method m : methods) spec_for(m, seed).validate();
}

EnsembleSpec ExperimentConfig::spec_for(Method method, std::uint64_t run_seed) const {
  EnsembleSpec spec;
  spec.method = method;
  spec.chains = chains;
  spec.theta_max = theta_max;
  if (method == Method::kECCRU3) spec.theta_min = theta_min;
  spec.tree = tree;
  spec.seed = run_seed;
  return spec;
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// Mean of each macro metric over the reports that define it; `excluded`
// counts the reports that do not.
MacroMetrics mean_of(const std::vector<const MacroMetrics*>& reports) {
  MacroMetrics out;
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    double sum = 0.0;
    std::size_t defined = 0;
    for (const MacroMetrics* r : reports) {
      if (r->value[k]) {
        sum += *r->value[k];
        ++defined;
      }
    }
    out.excluded[k] = reports.size() - defined;
    if (defined > 0) out.value[k] = sum / static_cast<double>(defined);
  }
  return out;
}

std::vector<LabelMetrics> per_label_means(const std::vector<FoldOutcome>& folds, std::size_t q) {
  std::vector<LabelMetrics> out(q);
  for (std::size_t j = 0; j < q; ++j) {
    std::array<double, 5> sum{};
    std::array<std::size_t, 5> defined{};
    std::array<double, 3> threshold_sum{};
    for (const auto& fold : folds) {
      const auto values = metric_values(fold.report.per_label[j]);
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k]) {
          sum[k] += *values[k];
          ++defined[k];
        }
      }
      for (std::size_t k = 0; k < 3; ++k) threshold_sum[k] += fold.report.per_label[j].thresholds[k];
    }
    std::array<std::optional<double>, 5> mean{};
    for (std::size_t k = 0; k < 5; ++k) {
      if (defined[k] > 0) mean[k] = sum[k] / static_cast<double>(defined[k]);
    }
    out[j].f_measure = mean[0];
    out[j].g_mean = mean[1];
    out[j].balanced_accuracy = mean[2];
    out[j].auc_roc = mean[3];
    out[j].auc_pr = mean[4];
    for (std::size_t k = 0; k < 3; ++k) {
      out[j].thresholds[k] = folds.empty() ? 0.0 : threshold_sum[k] / static_cast<double>(folds.size());
    }
  }
  return out;
}

json macro_json(const MacroMetrics& m) {
  json values = json::object();
  json excluded = json::object();
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    values[std::string(kMetricNames[k])] = opt(m.value[k]);
    excluded[std::string(kMetricNames[k])] = m.excluded[k];
  }
  return {{"values", std::move(values)}, {"excluded", std::move(excluded)}};
}

json label_json(const LabelMetrics& m) {
  json out = json::object();
  const auto values = metric_values(m);
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    out[std::string(kMetricNames[k])] = opt(values[k]);
  }
  json thresholds = json::object();
  for (std::size_t k = 0; k < kPointMetrics.size(); ++k) {
    thresholds[std::string(to_string(kPointMetrics[k]))] = m.thresholds[k];
  }
  out["thresholds"] = std::move(thresholds);
  return out;
}

}  // namespace

CvOutcome run_cv(const MultiLabelDataset& input, const ExperimentConfig& config) {
  config.validate();
  input.validate();
  const MultiLabelDataset ds = config.feature_keep_fraction
                                   ? reduce_features_by_frequency(input, *config.feature_keep_fraction)
                                   : input;
  CvOutcome cv;
  cv.config = config;
  cv.summary = summarize(ds);
  cv.label_names = ds.label_names;
  for (const auto& s : compute_all_label_stats(ds)) cv.label_imr.push_back(s.imr);
  for (Method m : config.methods) cv.methods.push_back(MethodOutcome{m, {}, {}, {}, {}, 0.0});

  for (std::size_t r = 0; r < config.repeats; ++r) {
    RngStream fold_rng(config.seed, {stream_tag::kFolds, r});
    const auto folds = iterative_stratified_kfold(ds, config.folds, fold_rng);
    for (std::size_t f = 0; f < config.folds; ++f) {
      std::vector<std::size_t> train_rows;
      for (std::size_t g = 0; g < config.folds; ++g) {
        if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
      }
      std::ranges::sort(train_rows);
      const MultiLabelDataset train = ds.select_rows(train_rows);
      const MultiLabelDataset test = ds.select_rows(folds[f]);
      RngStream seed_rng(config.seed, {stream_tag::kRound, r, f});
      const std::uint64_t run_seed = seed_rng.engine()();

      for (auto& outcome : cv.methods) {
        const EnsembleSpec spec = config.spec_for(outcome.method, run_seed);
        const auto start = std::chrono::steady_clock::now();
        const EnsembleModel model = train_ensemble(train, spec, config.exec);
        const auto stop = std::chrono::steady_clock::now();

        FoldOutcome fold;
        fold.repeat = r;
        fold.fold = f;
        fold.train_seconds = std::chrono::duration<double>(stop - start).count();
        fold.rows_fitted = model.rows_fitted;
        fold.classifier_budget = model.classifier_budget;
        fold.instance_budget = instance_budget(train, spec);
        const auto train_scores = predict_relevance_batch(model, train.features, config.exec);
        const auto test_scores = predict_relevance_batch(model, test.features, config.exec);
        fold.report = evaluate(train_scores, train.labels, test_scores, test.labels);
        fold.report.skipped_labels = model.skipped_labels.size();
        outcome.train_seconds += fold.train_seconds;
        outcome.folds.push_back(std::move(fold));
      }
    }
  }

  for (auto& outcome : cv.methods) {
    std::vector<const MacroMetrics*> all;
    for (std::size_t r = 0; r < config.repeats; ++r) {
      std::vector<const MacroMetrics*> in_repeat;
      for (const auto& fold : outcome.folds) {
        if (fold.repeat == r) in_repeat.push_back(&fold.report.macro);
      }
      outcome.repeat_means.push_back(mean_of(in_repeat));
      all.insert(all.end(), in_repeat.begin(), in_repeat.end());
    }
    outcome.overall = mean_of(all);
    outcome.per_label_mean = per_label_means(outcome.folds, ds.q());
  }
  return cv;
}

MacroMetrics macro_over_imr(const CvOutcome& cv, const MethodOutcome& method, double min_imr) {
  std::vector<std::size_t> subset;
  for (std::size_t j = 0; j < cv.label_imr.size(); ++j) {
    if (cv.label_imr[j] && *cv.label_imr[j] >= min_imr) subset.push_back(j);
  }
  if (subset.empty()) {
    MacroMetrics none;
    return none;
  }
  return macro_metrics(method.per_label_mean, subset);
}

json cv_metrics_json(const CvOutcome& cv) {
  const ExperimentConfig& c = cv.config;
  json methods = json::array();
  for (const auto& outcome : cv.methods) {
    json folds = json::array();
    for (const auto& fold : outcome.folds) {
      json labels = json::array();
      for (const auto& m : fold.report.per_label) labels.push_back(label_json(m));
      folds.push_back({{"repeat", fold.repeat},
                       {"fold", fold.fold},
                       {"macro", macro_json(fold.report.macro)},
                       {"per_label", std::move(labels)},
                       {"skipped_labels", fold.report.skipped_labels},
                       {"instance_budget", fold.instance_budget},
                       {"rows_fitted", fold.rows_fitted},
                       {"classifier_budget", fold.classifier_budget}});
    }
    json repeats = json::array();
    for (const auto& m : outcome.repeat_means) repeats.push_back(macro_json(m));
    json per_label = json::array();
    for (const auto& m : outcome.per_label_mean) per_label.push_back(label_json(m));

    json buckets = json::object();
    std::vector<double> imr;
    std::vector<std::size_t> with_imr;
    for (std::size_t j = 0; j < cv.label_imr.size(); ++j) {
      if (cv.label_imr[j]) {
        imr.push_back(*cv.label_imr[j]);
        with_imr.push_back(j);
      }
    }
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      std::vector<std::optional<double>> values;
      for (std::size_t j : with_imr) values.push_back(metric_values(outcome.per_label_mean[j])[k]);
      json rows = json::array();
      for (const auto& b : imr_bucket_report(imr, values)) {
        rows.push_back({{"lower", b.lower},
                        {"upper", std::isinf(b.upper) ? json(nullptr) : json(b.upper)},
                        {"labels", b.labels},
                        {"label_percent", b.label_percent},
                        {"mean", opt(b.mean_metric)}});
      }
      buckets[std::string(kMetricNames[k])] = std::move(rows);
    }

    methods.push_back({{"method", std::string(to_string(outcome.method))},
                       {"overall", macro_json(outcome.overall)},
                       {"repeat_means", std::move(repeats)},
                       {"per_label_mean", std::move(per_label)},
                       {"imr_buckets", std::move(buckets)},
                       {"folds", std::move(folds)}});
  }
  json imr = json::array();
  for (const auto& v : cv.label_imr) imr.push_back(opt(v));
  return {{"schema", kCvSchema},
          {"dataset", c.dataset_name},
          {"n", cv.summary.n},
          {"d", cv.summary.d},
          {"q", cv.summary.q},
          {"label_names", cv.label_names},
          {"label_imr", std::move(imr)},
          {"config",
           {{"seed", c.seed},
            {"ensemble.c", c.chains},
            {"ensemble.theta_max", c.theta_max},
            {"ensemble.theta_min", c.theta_min.value_or(EnsembleSpec::kDefaultThetaMin)},
            {"tree.max_depth", c.tree.max_depth ? json(*c.tree.max_depth) : json(nullptr)},
            {"tree.min_samples_leaf", c.tree.min_samples_leaf},
            {"cv.repeats", c.repeats},
            {"cv.folds", c.folds},
            {"feature_keep_fraction", opt(c.feature_keep_fraction)}}},
          {"methods", std::move(methods)}};
}

json cv_timing_json(const CvOutcome& cv) {
  json methods = json::array();
  for (const auto& outcome : cv.methods) {
    std::vector<double> per_fold;
    for (const auto& fold : outcome.folds) per_fold.push_back(fold.train_seconds);
    methods.push_back({{"method", std::string(to_string(outcome.method))},
                       {"fold_seconds", per_fold},
                       {"total_seconds", outcome.train_seconds}});
  }
  return {{"schema", kTimingSchema}, {"dataset", cv.config.dataset_name}, {"methods", methods}};
}

void write_cv_outputs(const CvOutcome& cv, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + (dir / name).string());
    return out;
  };
  open("metrics.json") << cv_metrics_json(cv).dump(2) << '\n';
  open("timing.json") << cv_timing_json(cv).dump(2) << '\n';

  auto csv = open("per_label.csv");
  csv << "method,repeat,fold,label,metric,value,threshold\n";
  csv.precision(17);
  for (const auto& outcome : cv.methods) {
    for (const auto& fold : outcome.folds) {
      for (std::size_t j = 0; j < fold.report.per_label.size(); ++j) {
        const auto& m = fold.report.per_label[j];
        const auto values = metric_values(m);
        for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
          csv << to_string(outcome.method) << ',' << fold.repeat << ',' << fold.fold << ','
              << cv.label_names[j] << ',' << kMetricNames[k] << ',';
          if (values[k]) csv << *values[k];
          else csv << "UNDEFINED";
          csv << ',';
          if (k < 3) csv << m.thresholds[k];
          csv << '\n';
        }
      }
    }
  }
}

json stats_json(const MultiLabelDataset& ds, const std::string& name) {
  const DatasetSummary s = summarize(ds);
  json labels = json::array();
  for (const auto& st : compute_all_label_stats(ds)) {
    labels.push_back({{"name", ds.label_names[st.label_index]},
                      {"minority_class", st.minority_class},
                      {"minority", st.minority_count},
                      {"majority", st.majority_count},
                      {"imr", opt(st.imr)}});
  }
  return {{"schema", kStatsSchema},
          {"dataset", name},
          {"n", s.n},
          {"d", s.d},
          {"q", s.q},
          {"label_cardinality", s.label_cardinality},
          {"mean_imr", s.mean_imr},
          {"max_imr", s.max_imr},
          {"cv_imr", s.cv_imr},
          {"degenerate_labels", s.degenerate_labels},
          {"labels", std::move(labels)}};
}

RankTable rank_reports(const std::vector<json>& metrics,
                       const std::vector<std::optional<json>>& timings) {
  RankTable table;
  if (metrics.empty()) throw Error(ErrorKind::kInvalidArgument, "no cv reports to rank");
  for (const auto& m : metrics.front().at("methods")) table.methods.push_back(m.at("method"));
  for (const auto& doc : metrics) {
    if (doc.at("schema") != kCvSchema) throw Error(ErrorKind::kInvalidArgument, "not a cv report");
    std::set<std::string> present;
    for (const auto& m : doc.at("methods")) present.insert(m.at("method").get<std::string>());
    std::erase_if(table.methods, [&](const std::string& m) { return !present.contains(m); });
    table.datasets.push_back(doc.at("dataset").get<std::string>());
  }
  if (table.methods.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "ranking needs two methods shared by all reports");
  }

  auto method_entry = [](const json& doc, const std::string& method) -> const json& {
    for (const auto& m : doc.at("methods")) {
      if (m.at("method") == method) return m;
    }
    throw Error(ErrorKind::kInvalidArgument, "method missing from report");
  };
  auto rank_rows = [&](const std::string& criterion, bool higher_is_better, auto&& value_of,
                       std::size_t docs) {
    std::vector<std::size_t> usable;
    for (std::size_t ds = 0; ds < docs; ++ds) {
      bool complete = true;
      for (const auto& method : table.methods) complete = complete && value_of(ds, method).has_value();
      if (complete) usable.push_back(ds);
    }
    if (usable.empty()) return;
    Matrix<double> results(table.methods.size(), usable.size());
    for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
      for (std::size_t k = 0; k < usable.size(); ++k) {
        results(mi, k) = *value_of(usable[k], table.methods[mi]);
      }
    }
    table.ranks[criterion] = average_ranks(results, higher_is_better);
  };

  for (std::string_view metric : kMetricNames) {
    rank_rows(
        std::string(metric), true,
        [&](std::size_t ds, const std::string& method) -> std::optional<double> {
          const json& v = method_entry(metrics[ds], method).at("overall").at("values").at(std::string(metric));
          return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
        },
        metrics.size());
  }
  const bool all_timed =
      timings.size() == metrics.size() && std::ranges::all_of(timings, [](const auto& t) { return t.has_value(); });
  if (all_timed) {
    rank_rows(
        "training_time", false,
        [&](std::size_t ds, const std::string& method) -> std::optional<double> {
          return method_entry(*timings[ds], method).at("total_seconds").get<double>();
        },
        metrics.size());
  }
  return table;
}

RankTable rank_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::kIo, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.json") files.push_back(entry.path());
  }
  std::ranges::sort(files);
  std::vector<json> metrics;
  std::vector<std::optional<json>> timings;
  for (const auto& file : files) {
    std::ifstream in(file);
    metrics.push_back(json::parse(in));
    const auto timing = file.parent_path() / "timing.json";
    if (std::filesystem::exists(timing)) {
      std::ifstream tin(timing);
      timings.emplace_back(json::parse(tin));
    } else {
      timings.emplace_back(std::nullopt);
    }
  }
  return rank_reports(metrics, timings);
}

void write_rank_csv(const RankTable& table, std::ostream& out) {
  out << "criterion";
  for (const auto& m : table.methods) out << ',' << m;
  out << '\n';
  const auto old = out.precision(6);
  auto row = [&](const std::string& name) {
    const auto it = table.ranks.find(name);
    if (it == table.ranks.end()) return;
    out << name;
    for (double r : it->second) out << ',' << r;
    out << '\n';
  };
  for (std::string_view metric : kMetricNames) row(std::string(metric));
  row("training_time");
  out.precision(old);
}

}  // namespace chainbalance
