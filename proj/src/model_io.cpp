#include <json.hpp>

#include "sfca/common.hpp"
#include "sfca/learners.hpp"

namespace sfca {
namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;

std::string_view link_name(Link l) {
  switch (l) {
    case Link::identity: return "identity";
    case Link::logistic: return "logistic";
    case Link::calibrated_margin: return "calibrated_margin";
  }
  return "identity";
}

Link parse_link(const std::string& s) {
  if (s == "identity") return Link::identity;
  if (s == "logistic") return Link::logistic;
  if (s == "calibrated_margin") return Link::calibrated_margin;
  throw Error("model json: unknown link '" + s + "'");
}

std::string_view aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::mean: return "mean";
    case Aggregation::vote: return "vote";
    case Aggregation::additive: return "additive";
    case Aggregation::additive_logistic: return "additive_logistic";
  }
  return "mean";
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "vote") return Aggregation::vote;
  if (s == "additive") return Aggregation::additive;
  if (s == "additive_logistic") return Aggregation::additive_logistic;
  throw Error("model json: unknown aggregation '" + s + "'");
}

json spec_json(const ModelSpec& s) {
  return {{"family", std::string(family_id(s.family))},
          {"lambda", s.lambda},
          {"n_trees", s.n_trees},
          {"max_depth", s.max_depth},
          {"min_leaf", s.min_leaf},
          {"learning_rate", s.learning_rate},
          {"subsample", s.subsample},
          {"max_features", s.max_features},
          {"max_bins", s.max_bins},
          {"svm_iterations", s.svm_iterations},
          {"weighted", s.weighted},
          {"seed", s.seed}};
}

ModelSpec spec_from(const json& j) {
  ModelSpec s;
  s.family = parse_family(j.at("family").get<std::string>());
  s.lambda = j.at("lambda").get<double>();
  s.n_trees = j.at("n_trees").get<int>();
  s.max_depth = j.at("max_depth").get<int>();
  s.min_leaf = j.at("min_leaf").get<double>();
  s.learning_rate = j.at("learning_rate").get<double>();
  s.subsample = j.at("subsample").get<double>();
  s.max_features = j.at("max_features").get<int>();
  s.max_bins = j.at("max_bins").get<int>();
  s.svm_iterations = j.at("svm_iterations").get<int>();
  s.weighted = j.at("weighted").get<bool>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.validate();
  return s;
}

}  // namespace

std::string save_model_json(const FittedModel& model) {
  json j;
  j["format"] = "sfca-model";
  j["version"] = kModelVersion;
  j["spec"] = spec_json(model.spec());
  j["features"] = model.feature_names();
  j["warnings"] = model.warnings();
  if (const auto* lp = std::get_if<LinearParams>(&model.params())) {
    j["kind"] = "linear";
    j["intercept"] = lp->intercept;
    j["coef"] = std::vector<double>(lp->coef.data(), lp->coef.data() + lp->coef.size());
    j["link"] = std::string(link_name(lp->link));
    j["calib_slope"] = lp->calib_slope;
    j["calib_offset"] = lp->calib_offset;
  } else {
    const auto& e = std::get<TreeEnsemble>(model.params());
    j["kind"] = "trees";
    j["aggregation"] = std::string(aggregation_name(e.aggregation));
    j["base"] = e.base;
    j["learning_rate"] = e.learning_rate;
    j["loss_history"] = e.loss_history;
    json trees = json::array();
    for (const auto& t : e.trees) {
      // Parallel arrays per tree: feature, threshold, left, right, value.
      json feature = json::array(), threshold = json::array(), left = json::array(),
           right = json::array(), value = json::array(), bin = json::array();
      for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        bin.push_back(n.bin);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
      }
      trees.push_back({{"feature", feature},
                       {"bin", bin},
                       {"threshold", threshold},
                       {"left", left},
                       {"right", right},
                       {"value", value}});
    }
    j["trees"] = trees;
  }
  return j.dump(1);
}

FittedModel load_model_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model json: ") + e.what());
  }
  try {
    if (j.at("format") != "sfca-model") throw Error("model json: not an sfca model");
    if (j.at("version").get<int>() != kModelVersion)
      throw Error("model json: unsupported version " + j.at("version").dump());
    const ModelSpec spec = spec_from(j.at("spec"));
    auto features = j.at("features").get<std::vector<std::string>>();
    auto warnings = j.at("warnings").get<std::vector<std::string>>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      LinearParams lp;
      lp.intercept = j.at("intercept").get<double>();
      const auto coef = j.at("coef").get<std::vector<double>>();
      lp.coef = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
      lp.link = parse_link(j.at("link").get<std::string>());
      lp.calib_slope = j.at("calib_slope").get<double>();
      lp.calib_offset = j.at("calib_offset").get<double>();
      return FittedModel(spec, std::move(features), lp, std::move(warnings));
    }
    if (kind != "trees") throw Error("model json: unknown kind '" + kind + "'");
    TreeEnsemble e;
    e.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
    e.base = j.at("base").get<double>();
    e.learning_rate = j.at("learning_rate").get<double>();
    e.loss_history = j.at("loss_history").get<std::vector<double>>();
    for (const auto& jt : j.at("trees")) {
      const auto feature = jt.at("feature").get<std::vector<int>>();
      const auto bin = jt.at("bin").get<std::vector<int>>();
      const auto threshold = jt.at("threshold").get<std::vector<double>>();
      const auto left = jt.at("left").get<std::vector<int>>();
      const auto right = jt.at("right").get<std::vector<int>>();
      const auto value = jt.at("value").get<std::vector<double>>();
      const std::size_t n = feature.size();
      if (bin.size() != n || threshold.size() != n || left.size() != n || right.size() != n ||
          value.size() != n || n == 0)
        throw Error("model json: malformed tree");
      Tree t;
      t.nodes.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        t.nodes[k] = {feature[k], bin[k], threshold[k], left[k], right[k], value[k]};
        if (feature[k] >= 0 && (left[k] <= static_cast<int>(k) || right[k] <= static_cast<int>(k) ||
                                left[k] >= static_cast<int>(n) || right[k] >= static_cast<int>(n)))
          throw Error("model json: malformed tree links");
      }
      e.trees.push_back(std::move(t));
    }
    return FittedModel(spec, std::move(features), std::move(e), std::move(warnings));
  } catch (const json::exception& ex) {
    throw Error(std::string("model json: ") + ex.what());
  }
}

}  // namespace sfca
