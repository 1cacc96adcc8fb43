#include <fstream>

#include "chainbalance/error.hpp"
#include "chainbalance/model_io.hpp"

namespace chainbalance {

using nlohmann::json;

namespace {

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", n.prediction}, {"p", n.positive_fraction}, {"n", n.samples}});
    } else {
      nodes.push_back({{"f", n.feature},
                       {"t", n.threshold},
                       {"l", n.left},
                       {"r", n.right},
                       {"p", n.positive_fraction},
                       {"n", n.samples},
                       {"y", n.prediction}});
    }
  }
  return {{"arity", tree.arity()}, {"nodes", std::move(nodes)}};
}

DecisionTree tree_from_json(const json& doc) {
  std::vector<DecisionTree::Node> nodes;
  for (const auto& j : doc.at("nodes")) {
    DecisionTree::Node n;
    n.positive_fraction = j.at("p").get<double>();
    n.samples = j.at("n").get<std::size_t>();
    if (j.contains("leaf")) {
      n.prediction = j.at("leaf").get<Bit>();
    } else {
      n.feature = j.at("f").get<std::int32_t>();
      n.threshold = j.at("t").get<double>();
      n.left = j.at("l").get<std::int32_t>();
      n.right = j.at("r").get<std::int32_t>();
      n.prediction = j.at("y").get<Bit>();
    }
    nodes.push_back(n);
  }
  return DecisionTree(doc.at("arity").get<std::size_t>(), std::move(nodes));
}

}  // namespace

json model_to_json(const EnsembleModel& model) {
  json chains = json::array();
  for (const auto& chain : model.chains) {
    json links = json::array();
    for (const auto& link : chain.links) {
      links.push_back({{"label", link.label},
                       {"fit_rows", link.fit_rows},
                       {"fit_positives", link.fit_positives},
                       {"tree", tree_to_json(link.model)}});
    }
    chains.push_back({{"base_arity", chain.base_arity}, {"links", std::move(links)}});
  }
  json constant = json::array();
  for (const auto& c : model.constant) {
    constant.push_back(c ? json(*c) : json(nullptr));
  }
  return {{"schema", kModelSchema},
          {"method", std::string(to_string(model.method))},
          {"q", model.q},
          {"d", model.d},
          {"vote_counts", model.vote_counts},
          {"constant", std::move(constant)},
          {"skipped_labels", model.skipped_labels},
          {"classifier_budget", model.classifier_budget},
          {"rows_fitted", model.rows_fitted},
          {"chains", std::move(chains)}};
}

EnsembleModel model_from_json(const json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != kModelSchema) {
      throw Error(ErrorKind::kInvalidArgument, "unsupported model schema");
    }
    EnsembleModel model;
    model.method = parse_method(doc.at("method").get<std::string>());
    model.q = doc.at("q").get<std::size_t>();
    model.d = doc.at("d").get<std::size_t>();
    model.vote_counts = doc.at("vote_counts").get<std::vector<std::size_t>>();
    for (const auto& c : doc.at("constant")) {
      model.constant.push_back(c.is_null() ? std::nullopt : std::optional<Bit>(c.get<Bit>()));
    }
    model.skipped_labels = doc.at("skipped_labels").get<std::vector<std::size_t>>();
    model.classifier_budget = doc.at("classifier_budget").get<std::vector<std::size_t>>();
    model.rows_fitted = doc.at("rows_fitted").get<std::size_t>();
    for (const auto& c : doc.at("chains")) {
      ChainModel chain;
      chain.base_arity = c.at("base_arity").get<std::size_t>();
      for (const auto& l : c.at("links")) {
        ChainLink link;
        link.label = l.at("label").get<std::size_t>();
        link.fit_rows = l.at("fit_rows").get<std::size_t>();
        link.fit_positives = l.at("fit_positives").get<std::size_t>();
        link.model = tree_from_json(l.at("tree"));
        if (link.label >= model.q || link.model.arity() != chain.base_arity + chain.links.size()) {
          throw Error(ErrorKind::kInvalidArgument, "model link is inconsistent with its chain");
        }
        chain.links.push_back(std::move(link));
      }
      model.chains.push_back(std::move(chain));
    }
    if (model.vote_counts.size() != model.q || model.constant.size() != model.q) {
      throw Error(ErrorKind::kInvalidArgument, "model label vectors do not match q");
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const EnsembleModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
}

EnsembleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("model is not JSON: ") + e.what());
  }
  return model_from_json(doc);
}

}  // namespace chainbalance
