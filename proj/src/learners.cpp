#include "sfca/learners.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "sfca/common.hpp"
#include "sfca/linear.hpp"
#include "sfca/tree.hpp"

namespace sfca {
namespace {

struct FamilyInfo {
  Family family;
  std::string_view id;
  std::string_view label;
  std::string_view type;
  bool classifier;
};

constexpr std::array<FamilyInfo, 11> kFamilies{{
    {Family::ols, "ols", "ols", "REG", false},
    {Family::ridge, "ridge", "ridge", "pREG", false},
    {Family::lasso, "lasso", "lasso", "pREG", false},
    {Family::r_tree, "r-tree", "r-tree", "REG-T", false},
    {Family::r_tree_bag, "r-tree-bag", "r-tree(bg)", "REG-T", false},
    {Family::r_tree_boost, "r-tree-boost", "r-tree(bs)", "REG-T", false},
    {Family::c_tree_bag, "c-tree-bag", "c-tree(bg)", "SFCA-T", true},
    {Family::c_tree_boost, "c-tree-boost", "c-tree(bs)", "SFCA-T", true},
    {Family::logr_ridge, "logr-ridge", "logr(ridge)", "SFCA-pREG", true},
    {Family::logr_lasso, "logr-lasso", "logr(lasso)", "SFCA-pREG", true},
    {Family::svm_linear, "svm-linear", "svm", "SFCA-SVM", true},
}};

const FamilyInfo& info(Family f) {
  for (const auto& i : kFamilies)
    if (i.family == f) return i;
  throw Error("unknown family");
}

}  // namespace

std::string_view family_id(Family f) { return info(f).id; }
std::string_view family_label(Family f) { return info(f).label; }
std::string_view family_type(Family f) { return info(f).type; }
bool is_classifier(Family f) { return info(f).classifier; }

Family parse_family(std::string_view s) {
  for (const auto& i : kFamilies)
    if (i.id == s || i.label == s) return i.family;
  throw Error("unknown learner family '" + std::string(s) + "'");
}

std::vector<Family> all_families() {
  std::vector<Family> out;
  for (const auto& i : kFamilies) out.push_back(i.family);
  return out;
}

ModelSpec ModelSpec::defaults(Family f) {
  ModelSpec s;
  s.family = f;
  switch (f) {
    case Family::ols:
      break;
    case Family::ridge:
      s.lambda = 1.0;
      break;
    case Family::lasso:
      s.lambda = 2.0;
      break;
    case Family::r_tree:
      break;
    case Family::r_tree_bag:
      s.n_trees = 200;
      break;
    case Family::c_tree_bag:
      s.n_trees = 200;
      s.min_leaf = 1.0;  // fully grown voting trees
      break;
    case Family::r_tree_boost:
    case Family::c_tree_boost:
      s.n_trees = 300;
      s.max_depth = 4;
      s.learning_rate = 0.1;
      s.subsample = 0.8;
      break;
    case Family::logr_ridge:
    case Family::logr_lasso:
      s.lambda = 1e-3;
      break;
    case Family::svm_linear:
      s.lambda = 1e-2;
      break;
  }
  return s;
}

ModelSpec ModelSpec::from_label(std::string_view label) {
  bool weighted = false;
  for (std::string_view suffix : {"(w)", "+w"}) {
    if (label.size() > suffix.size() && label.substr(label.size() - suffix.size()) == suffix) {
      weighted = true;
      label.remove_suffix(suffix.size());
      break;
    }
  }
  ModelSpec s = defaults(parse_family(label));
  s.weighted = weighted;
  return s;
}

std::string ModelSpec::label() const {
  std::string out(family_label(family));
  if (weighted) out += "(w)";
  return out;
}

void ModelSpec::validate() const {
  auto bad = [&](const std::string& what) { throw Error(label() + ": " + what); };
  if (!(lambda >= 0) || !std::isfinite(lambda)) bad("lambda must be >= 0");
  if (family == Family::svm_linear && !(lambda > 0)) bad("svm lambda must be > 0");
  if (n_trees < 1) bad("tree count must be >= 1");
  if (max_depth < 0) bad("max depth must be >= 1, or 0 for unlimited");
  if (!(min_leaf > 0)) bad("min leaf must be > 0");
  if (!(learning_rate > 0 && learning_rate <= 1)) bad("learning rate must lie in (0, 1]");
  if (!(subsample > 0 && subsample <= 1)) bad("subsample must lie in (0, 1]");
  if (max_features < 0) bad("max features must be >= 0");
  if (max_bins < 2 || max_bins > 256) bad("max bins must lie in [2, 256]");
  if (svm_iterations < 1) bad("svm iterations must be >= 1");
}

FittedModel::FittedModel(ModelSpec spec, std::vector<std::string> feature_names, Params params,
                         std::vector<std::string> warnings)
    : spec_(std::move(spec)),
      features_(std::move(feature_names)),
      params_(std::move(params)),
      warnings_(std::move(warnings)) {}

std::size_t FittedModel::feature_count() const {
  if (!features_.empty()) return features_.size();
  if (const auto* lp = std::get_if<LinearParams>(&params_)) return static_cast<std::size_t>(lp->coef.size());
  return 0;
}

Standardized standardize(const Eigen::MatrixXd& x, std::span<const double> weights) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!weights.empty()) {
    if (static_cast<Eigen::Index>(weights.size()) != n) throw Error("weights length differs from rows");
    for (Eigen::Index i = 0; i < n; ++i) w[i] = weights[i];
  }
  const double sw = w.sum();
  Standardized s;
  s.mean.resize(p);
  s.scale.resize(p);
  s.constant.assign(static_cast<std::size_t>(p), false);
  s.x.resize(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double m = n > 0 ? w.dot(x.col(j)) / sw : 0.0;
    const Eigen::VectorXd c = x.col(j).array() - m;
    const double sd = n > 0 ? std::sqrt(w.dot(c.cwiseAbs2()) / sw) : 0.0;
    s.mean[j] = m;
    if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
      s.scale[j] = 1.0;
      s.constant[static_cast<std::size_t>(j)] = true;
      s.x.col(j).setZero();
    } else {
      s.scale[j] = sd;
      s.x.col(j) = c / sd;
    }
  }
  return s;
}

Eigen::MatrixXd destandardize(const Standardized& s) {
  Eigen::MatrixXd x = s.x * s.scale.asDiagonal();
  x.rowwise() += s.mean.transpose();
  return x;
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        std::span<const double> weights) {
  const Standardized s = standardize(x, weights);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(x.rows());
  for (std::size_t i = 0; i < weights.size(); ++i) w[static_cast<Eigen::Index>(i)] = weights[i];
  const double sw = w.sum();
  const Eigen::VectorXd yc = y.array() - w.dot(y) / sw;
  return (s.x.transpose() * w.cwiseProduct(yc)).cwiseAbs().maxCoeff() / sw;
}

FittedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                std::span<const double> weights, std::vector<std::string> feature_names,
                Execution exec) {
  spec.validate();
  if (design.rows() != target.size()) throw Error("design and target differ in row count");
  if (design.rows() == 0) throw Error("empty training set");
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != design.rows())
    throw Error("weights length differs from rows");
  for (double v : weights)
    if (!(v > 0) || !std::isfinite(v)) throw Error("weights must be positive and finite");
  if (!target.allFinite()) throw Error("target contains non-finite values");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != design.cols())
    throw Error("feature names differ from design width");
  const bool classifier = is_classifier(spec.family);
  if (classifier)
    for (Eigen::Index i = 0; i < target.size(); ++i)
      if (target[i] != 0.0 && target[i] != 1.0) throw Error("classification targets must be 0 or 1");

  std::vector<std::string> warnings;
  FittedModel::Params params;
  switch (spec.family) {
    case Family::ols:
      params = linear::fit_ols(design, target, weights, warnings);
      break;
    case Family::ridge:
      params = linear::fit_ridge(design, target, weights, spec.lambda);
      break;
    case Family::lasso:
      params = linear::fit_lasso(design, target, weights, spec.lambda).params;
      break;
    case Family::logr_ridge:
      params = linear::fit_logistic(design, target, weights, spec.lambda, linear::Penalty::ridge);
      break;
    case Family::logr_lasso:
      params = linear::fit_logistic(design, target, weights, spec.lambda, linear::Penalty::lasso);
      break;
    case Family::svm_linear:
      params = linear::fit_svm(design, target, weights, spec.lambda, spec.svm_iterations);
      break;
    case Family::r_tree:
    case Family::r_tree_bag:
    case Family::r_tree_boost:
    case Family::c_tree_bag:
    case Family::c_tree_boost: {
      const auto binned = tree::BinnedMatrix::build(design, spec.max_bins);
      if (spec.family == Family::r_tree)
        params = tree::fit_single(binned, target, weights, spec);
      else if (spec.family == Family::r_tree_bag || spec.family == Family::c_tree_bag)
        params = tree::fit_bagging(binned, target, weights, spec, classifier, exec);
      else
        params = tree::fit_boosting(binned, target, weights, spec, classifier);
      break;
    }
  }
  return FittedModel(spec, std::move(feature_names), std::move(params), std::move(warnings));
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& design, Execution exec) {
  const std::size_t width = model.feature_count();
  if (width != 0 && static_cast<std::size_t>(design.cols()) != width)
    throw Error("schema mismatch: model expects " + std::to_string(width) + " columns, got " +
                std::to_string(design.cols()));
  const Eigen::Index n = design.rows();
  Eigen::VectorXd out(n);
  if (const auto* lp = std::get_if<LinearParams>(&model.params())) {
    out = (design * lp->coef).array() + lp->intercept;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (lp->link == Link::logistic) out[i] = linear::sigmoid(out[i]);
      else if (lp->link == Link::calibrated_margin)
        out[i] = linear::sigmoid(lp->calib_slope * out[i] + lp->calib_offset);
    }
    return out;
  }
  const auto& e = std::get<TreeEnsemble>(model.params());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) out[i] = tree::predict_row(e, design.row(i));
  } else {
    for (Eigen::Index i = 0; i < n; ++i) out[i] = tree::predict_row(e, design.row(i));
  }
  return out;
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& design,
                        std::span<const std::string> columns, Execution exec) {
  const auto& names = model.feature_names();
  if (!std::equal(names.begin(), names.end(), columns.begin(), columns.end())) {
    std::string detail = "schema mismatch";
    for (std::size_t i = 0; i < std::min(names.size(), columns.size()); ++i)
      if (names[i] != columns[i]) {
        detail += ": column " + std::to_string(i) + " is '" + columns[i] + "', model expects '" +
                  names[i] + "'";
        break;
      }
    if (names.size() != columns.size())
      detail += " (" + std::to_string(columns.size()) + " columns, model expects " +
                std::to_string(names.size()) + ")";
    throw Error(detail);
  }
  return predict(model, design, exec);
}

}  // namespace sfca
