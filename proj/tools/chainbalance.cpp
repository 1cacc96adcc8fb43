// chainbalance: dataset statistics, cross-validated experiments, probability
// sweeps, rank tables, and single-model train/evaluate.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "chainbalance/error.hpp"
#include "chainbalance/experiment.hpp"
#include "chainbalance/model_io.hpp"
#include "chainbalance/simulate.hpp"
#include "config.hpp"

namespace cb = chainbalance;
using chainbalance::cli::ConfigError;
using chainbalance::cli::Settings;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Raised around dataset/model loading so failures there map to the data exit
// code whatever their kind.
struct DataError : std::runtime_error {
  DataError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind(std::move(kind)) {}
  std::string kind;
};

struct FlagDef {
  std::string flag;  // without leading dashes
  std::string key;   // config key
  std::string help;
  bool is_switch = false;
};

const std::vector<FlagDef> kDataFlags = {
    {"arff", "arff", "ARFF file with features and labels"},
    {"xml", "xml", "Mulan XML file naming the label attributes"},
    {"name", "name", "dataset name used in reports"},
};
const std::vector<FlagDef> kEnsembleFlags = {
    {"c", "ensemble.c", "ensemble size c"},
    {"theta-max", "ensemble.theta_max", "upper clamp factor for ECCRU2/ECCRU3"},
    {"theta-min", "ensemble.theta_min", "lower clamp factor for ECCRU3"},
    {"tree-max-depth", "tree.max_depth", "maximum tree depth (unlimited when absent)"},
    {"tree-min-samples-leaf", "tree.min_samples_leaf", "minimum rows per tree leaf"},
};
const std::vector<FlagDef> kRunFlags = {
    {"seed", "seed", "master seed"},
    {"threads", "threads", "OpenMP thread count"},
    {"serial", "serial", "use the serial reference kernels", true},
};

std::vector<FlagDef> concat(std::initializer_list<std::vector<FlagDef>> parts) {
  std::vector<FlagDef> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

struct Command {
  CLI::App* app = nullptr;
  std::vector<FlagDef> flags;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, bool> switches;
  std::string config_path;
  std::function<int(const Settings&)> run;
};

Command& add_command(CLI::App& root, std::vector<std::unique_ptr<Command>>& commands,
                     const std::string& name, const std::string& description,
                     std::vector<FlagDef> flags, std::function<int(const Settings&)> run) {
  auto cmd = std::make_unique<Command>();
  cmd->app = root.add_subcommand(name, description);
  cmd->flags = std::move(flags);
  cmd->run = std::move(run);
  cmd->app->add_option("--config", cmd->config_path, "key = value file; flags override it");
  for (const auto& f : cmd->flags) {
    if (f.is_switch) {
      cmd->app->add_flag("--" + f.flag, cmd->switches[f.key], f.help);
    } else {
      cmd->app->add_option("--" + f.flag, cmd->flag_values[f.key], f.help);
    }
  }
  commands.push_back(std::move(cmd));
  return *commands.back();
}

Settings resolve(const Command& cmd, const std::set<std::string>& known_keys) {
  Settings settings;
  if (!cmd.config_path.empty()) {
    settings = Settings::from_file(cmd.config_path);
    for (const auto& [key, value] : settings.values()) {
      if (!known_keys.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }
  Settings flags;
  for (const auto& f : cmd.flags) {
    if (f.is_switch) {
      if (cmd.app->count("--" + f.flag) > 0) flags.set(f.key, "true");
    } else if (cmd.app->count("--" + f.flag) > 0) {
      flags.set(f.key, cmd.flag_values.at(f.key));
    }
  }
  settings.merge(flags);
  return settings;
}

std::string required(const Settings& s, const std::string& key) {
  auto v = s.text(key);
  if (!v || v->empty()) throw ConfigError("missing required setting '" + key + "'");
  return *v;
}

cb::Execution execution(const Settings& s) {
  if (auto threads = s.size("threads")) {
    if (*threads == 0) throw ConfigError("threads must be at least 1");
    cb::set_threads(static_cast<int>(*threads));
  }
  return s.boolean("serial").value_or(false) ? cb::Execution::kSerial : cb::Execution::kParallel;
}

std::vector<cb::Method> parse_methods(const std::string& list) {
  std::vector<cb::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const cb::Method m = cb::parse_method(item);
      if (std::ranges::find(out, m) != out.end()) {
        throw ConfigError("method " + item + " listed twice");
      }
      out.push_back(m);
    } catch (const cb::Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (out.empty()) throw ConfigError("methods list is empty");
  return out;
}

cb::TreeSpec tree_spec(const Settings& s) {
  cb::TreeSpec tree;
  if (auto depth = s.size("tree.max_depth")) tree.max_depth = *depth;
  if (auto leaf = s.size("tree.min_samples_leaf")) tree.min_samples_leaf = *leaf;
  return tree;
}

std::string dataset_name(const Settings& s) {
  if (auto name = s.text("name")) return *name;
  return std::filesystem::path(required(s, "arff")).stem().string();
}

cb::MultiLabelDataset load_dataset(const Settings& s) {
  const std::string arff = required(s, "arff");
  const std::string xml = required(s, "xml");
  try {
    return cb::load_mulan_files(arff, xml);
  } catch (const cb::Error& e) {
    throw DataError(std::string(cb::to_string(e.kind())), e.what());
  }
}

// Writes to `out` when set, stdout otherwise.
void emit(const Settings& s, const std::string& text) {
  if (auto path = s.text("out")) {
    std::ofstream out(*path);
    if (!out) throw DataError("Io", "cannot write " + *path);
    out << text;
  } else {
    std::cout << text;
  }
}

int run_stats(const Settings& s) {
  const std::string name = dataset_name(s);
  const auto ds = load_dataset(s);
  json doc;
  try {
    doc = cb::stats_json(ds, name);
  } catch (const cb::Error& e) {
    throw DataError(std::string(cb::to_string(e.kind())), e.what());
  }
  emit(s, doc.dump(2) + "\n");
  return 0;
}

cb::ExperimentConfig cv_config(const Settings& s) {
  cb::ExperimentConfig config;
  config.dataset_name = dataset_name(s);
  if (auto methods = s.text("methods")) config.methods = parse_methods(*methods);
  if (auto c = s.size("ensemble.c")) config.chains = *c;
  if (auto t = s.real("ensemble.theta_max")) config.theta_max = *t;
  if (auto t = s.real("ensemble.theta_min")) {
    if (std::ranges::find(config.methods, cb::Method::kECCRU3) == config.methods.end()) {
      throw ConfigError("ensemble.theta_min applies only to ECCRU3, which is not selected");
    }
    config.theta_min = *t;
  }
  config.tree = tree_spec(s);
  if (auto seed = s.u64("seed")) config.seed = *seed;
  if (auto r = s.size("cv.repeats")) config.repeats = *r;
  if (auto f = s.size("cv.folds")) config.folds = *f;
  if (auto k = s.real("feature_keep_fraction")) config.feature_keep_fraction = *k;
  config.exec = execution(s);
  try {
    config.validate();
  } catch (const cb::Error& e) {
    throw ConfigError(e.what());
  }
  return config;
}

int run_cv_command(const Settings& s) {
  const cb::ExperimentConfig config = cv_config(s);
  const std::filesystem::path out_dir = s.text("out").value_or("cv_" + config.dataset_name);
  const auto ds = load_dataset(s);
  cb::CvOutcome cv;
  try {
    cv = cb::run_cv(ds, config);
  } catch (const cb::Error& e) {
    if (e.kind() == cb::ErrorKind::kInvalidArgument) throw ConfigError(e.what());
    throw DataError(std::string(cb::to_string(e.kind())), e.what());
  }
  try {
    cb::write_cv_outputs(cv, out_dir);
  } catch (const cb::Error& e) {
    throw DataError(std::string(cb::to_string(e.kind())), e.what());
  }

  std::cout << "dataset " << config.dataset_name << ": n=" << cv.summary.n << " d=" << cv.summary.d
            << " q=" << cv.summary.q << ", " << config.repeats << "x" << config.folds << " cv\n";
  std::cout << std::left << std::setw(8) << "method";
  for (auto name : cb::kMetricNames) std::cout << ' ' << std::setw(18) << name;
  std::cout << ' ' << "train_s\n" << std::fixed << std::setprecision(4);
  for (const auto& m : cv.methods) {
    std::cout << std::setw(8) << cb::to_string(m.method);
    for (const auto& v : m.overall.value) {
      std::cout << ' ' << std::setw(18);
      if (v) std::cout << *v;
      else std::cout << "UNDEFINED";
    }
    std::cout << ' ' << m.train_seconds << '\n';
  }
  std::cout << "reports written to " << out_dir.string() << '\n';
  return 0;
}

int run_simulate(const Settings& s) {
  cb::SweepConfig sweep;
  if (auto v = s.size("simulate.n")) sweep.total = *v;
  if (auto v = s.size("ensemble.c")) sweep.chains = *v;
  if (auto v = s.size("simulate.m_start")) sweep.m_start = *v;
  if (auto v = s.size("simulate.m_end")) sweep.m_end = *v;
  if (auto v = s.size("simulate.m_step")) sweep.m_step = *v;
  if (auto v = s.size("simulate.runs")) sweep.runs = *v;
  const std::uint64_t seed = s.u64("seed").value_or(0);
  const cb::Execution exec = execution(s);
  std::vector<cb::SweepRow> rows;
  try {
    rows = cb::sweep(sweep, cb::RngStream(seed, {cb::stream_tag::kSimulation}), exec);
  } catch (const cb::Error& e) {
    throw ConfigError(e.what());
  }
  std::ostringstream csv;
  cb::write_sweep_csv(rows, csv);
  emit(s, csv.str());
  return 0;
}

int run_rank(const Settings& s) {
  const std::string dir = required(s, "dir");
  cb::RankTable table;
  try {
    table = cb::rank_directory(dir);
  } catch (const cb::Error& e) {
    throw DataError(std::string(cb::to_string(e.kind())), e.what());
  } catch (const json::exception& e) {
    throw DataError("MalformedReport", e.what());
  }
  std::ostringstream csv;
  cb::write_rank_csv(table, csv);
  emit(s, csv.str());
  return 0;
}

int run_train(const Settings& s) {
  cb::EnsembleSpec spec;
  try {
    spec.method = cb::parse_method(required(s, "method"));
  } catch (const cb::Error& e) {
    throw ConfigError(e.what());
  }
  if (auto c = s.size("ensemble.c")) spec.chains = *c;
  if (auto t = s.real("ensemble.theta_max")) spec.theta_max = *t;
  if (auto t = s.real("ensemble.theta_min")) spec.theta_min = *t;
  spec.tree = tree_spec(s);
  if (auto seed = s.u64("seed")) spec.seed = *seed;
  try {
    spec.validate();
  } catch (const cb::Error& e) {
    throw ConfigError(e.what());
  }
  const std::string model_path = required(s, "model");
  const cb::Execution exec = execution(s);
  const auto ds = load_dataset(s);
  try {
    const cb::EnsembleModel model = cb::train_ensemble(ds, spec, exec);
    cb::save_model(model, model_path);
    std::cout << "trained " << cb::to_string(spec.method) << " with " << model.chains.size()
              << " chains on " << ds.n() << " rows; model written to " << model_path << '\n';
  } catch (const cb::Error& e) {
    throw DataError(std::string(cb::to_string(e.kind())), e.what());
  }
  return 0;
}

int run_evaluate(const Settings& s) {
  const std::string model_path = required(s, "model");
  const double threshold = s.real("threshold").value_or(0.5);
  const cb::Execution exec = execution(s);
  cb::EnsembleModel model;
  try {
    model = cb::load_model(model_path);
  } catch (const cb::Error& e) {
    throw DataError(std::string(cb::to_string(e.kind())), e.what());
  } catch (const json::exception& e) {
    throw DataError("MalformedModel", e.what());
  }
  const auto ds = load_dataset(s);
  if (ds.d() != model.d || ds.q() != model.q) {
    throw DataError("ArityMismatch", "dataset shape does not match the model");
  }
  const cb::Matrix<double> scores = cb::predict_relevance_batch(model, ds.features, exec);

  std::vector<cb::LabelMetrics> labels(ds.q());
  json per_label = json::array();
  for (std::size_t j = 0; j < ds.q(); ++j) {
    std::vector<double> col(ds.n());
    std::vector<cb::Bit> truth(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
      col[i] = scores(i, j);
      truth[i] = ds.labels(i, j);
    }
    const cb::BinaryConfusion conf = cb::confusion_at(col, truth, threshold);
    labels[j].f_measure = cb::point_metric(conf, cb::PointMetric::kFMeasure);
    labels[j].g_mean = cb::point_metric(conf, cb::PointMetric::kGMean);
    labels[j].balanced_accuracy = cb::point_metric(conf, cb::PointMetric::kBalancedAccuracy);
    labels[j].auc_roc = cb::auc_roc(col, truth);
    labels[j].auc_pr = cb::auc_pr(col, truth);
    json entry = {{"label", ds.label_names[j]}};
    const auto values = cb::metric_values(labels[j]);
    for (std::size_t k = 0; k < values.size(); ++k) {
      entry[std::string(cb::kMetricNames[k])] = values[k] ? json(*values[k]) : json(nullptr);
    }
    per_label.push_back(std::move(entry));
  }
  const cb::MacroMetrics macro = cb::macro_metrics(labels);
  json macro_doc = json::object();
  for (std::size_t k = 0; k < cb::kMetricNames.size(); ++k) {
    macro_doc[std::string(cb::kMetricNames[k])] = macro.value[k] ? json(*macro.value[k]) : json(nullptr);
  }
  const json doc = {{"method", std::string(cb::to_string(model.method))},
                    {"threshold", threshold},
                    {"n", ds.n()},
                    {"macro", std::move(macro_doc)},
                    {"per_label", std::move(per_label)}};
  emit(s, doc.dump(2) + "\n");
  return 0;
}

void report_error(const std::string& kind, const std::string& message, int code) {
  const json record = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << record.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensembles of classifier chains with random undersampling for imbalanced multi-label data"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;

  const std::vector<FlagDef> out_flag = {{"out", "out", "output path"}};
  add_command(app, commands, "stats", "label imbalance statistics of a dataset",
              concat({kDataFlags, out_flag}), run_stats);
  add_command(app, commands, "cv", "repeated stratified cross-validation of several methods",
              concat({kDataFlags,
                      {{"methods", "methods", "comma-separated methods (BR,BRUS,EBRUS,ECC,ECCRU,ECCRU2,ECCRU3)"}},
                      kEnsembleFlags,
                      {{"repeats", "cv.repeats", "cv repeats"},
                       {"folds", "cv.folds", "folds per repeat"},
                       {"keep-fraction", "feature_keep_fraction", "keep this fraction of the densest features"},
                       {"out", "out", "output directory"}},
                      kRunFlags}),
              run_cv_command);
  add_command(app, commands, "simulate", "probability that a majority example is used",
              concat({{{"n", "simulate.n", "examples per label"},
                       {"c", "ensemble.c", "number of undersamplings"},
                       {"m-start", "simulate.m_start", "first minority count"},
                       {"m-end", "simulate.m_end", "last minority count"},
                       {"m-step", "simulate.m_step", "minority count step"},
                       {"runs", "simulate.runs", "Monte Carlo runs per point"},
                       {"out", "out", "CSV output path"}},
                      kRunFlags}),
              run_simulate);
  add_command(app, commands, "rank", "average ranks over a directory of cv reports",
              {{"dir", "dir", "directory searched for metrics.json files"}, {"out", "out", "CSV output path"}},
              run_rank);
  add_command(app, commands, "train", "train one model and save it as JSON",
              concat({kDataFlags, {{"method", "method", "method name"}}, kEnsembleFlags,
                      {{"model", "model", "output model path"}}, kRunFlags}),
              run_train);
  add_command(app, commands, "evaluate", "score a saved model on a dataset",
              concat({kDataFlags,
                      {{"model", "model", "model path"},
                       {"threshold", "threshold", "decision threshold on relevance (default 0.5)"},
                       {"out", "out", "JSON output path"}},
                      kRunFlags}),
              run_evaluate);

  std::set<std::string> known_keys;
  for (const auto& cmd : commands) {
    for (const auto& f : cmd->flags) known_keys.insert(f.key);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("ConfigError", e.what(), kExitConfig);
    return kExitConfig;
  }

  for (const auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    try {
      return cmd->run(resolve(*cmd, known_keys));
    } catch (const ConfigError& e) {
      report_error("ConfigError", e.what(), kExitConfig);
      return kExitConfig;
    } catch (const DataError& e) {
      report_error(e.kind, e.what(), kExitData);
      return kExitData;
    } catch (const cb::Error& e) {
      const int code = e.kind() == cb::ErrorKind::kInvalidArgument ? kExitConfig : kExitData;
      report_error(std::string(cb::to_string(e.kind())), e.what(), code);
      return code;
    } catch (const std::exception& e) {
      report_error("Internal", e.what(), 1);
      return 1;
    }
  }
  return 0;
}
