#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sfca/parallel.hpp"

namespace sfca {

enum class Family {
  ols,
  ridge,
  lasso,
  r_tree,
  r_tree_bag,
  r_tree_boost,
  c_tree_bag,
  c_tree_boost,
  logr_ridge,
  logr_lasso,
  svm_linear,
};

/// Machine id, e.g. "c-tree-bag".
std::string_view family_id(Family f);
/// Report label, e.g. "c-tree(bg)".
std::string_view family_label(Family f);
/// Report type column: REG, pREG, REG-T, SFCA-T, SFCA-pREG, SFCA-SVM.
std::string_view family_type(Family f);
/// Accepts either the id or the label.
Family parse_family(std::string_view s);
bool is_classifier(Family f);
std::vector<Family> all_families();

struct ModelSpec {
  Family family = Family::ols;
  double lambda = 0.0;
  int n_trees = 1;
  int max_depth = 0;  // 0: unlimited
  double min_leaf = 5.0;
  double learning_rate = 0.1;
  double subsample = 1.0;
  int max_features = 0;  // 0: family default (sqrt(M) classification, M/3 regression bagging)
  int max_bins = 256;
  int svm_iterations = 1000;
  bool weighted = false;
  std::uint64_t seed = 42;

  /// Family defaults: bagging 200 trees, unlimited depth, min leaf 5 (1 for
  /// classification bagging);
  /// boosting 300 rounds, depth 4, learning rate 0.1, subsample 0.8.
  static ModelSpec defaults(Family f);
  /// Parses a method label such as "c-tree(bg)(w)" or "lasso+w".
  static ModelSpec from_label(std::string_view label);

  std::string label() const;
  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  int bin = 0;       // binned split: code <= bin goes left
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int depth() const;
};

enum class Aggregation { mean, vote, additive, additive_logistic };

struct TreeEnsemble {
  Aggregation aggregation = Aggregation::mean;
  double base = 0.0;
  double learning_rate = 1.0;
  std::vector<Tree> trees;
  /// Training loss after each boosting round (empty for bagging).
  std::vector<double> loss_history;
};

enum class Link { identity, logistic, calibrated_margin };

struct LinearParams {
  double intercept = 0.0;
  Eigen::VectorXd coef;
  Link link = Link::identity;
  double calib_slope = 1.0;
  double calib_offset = 0.0;
};

/// A trained learner. Immutable once built; `predict` is deterministic.
class FittedModel {
 public:
  using Params = std::variant<LinearParams, TreeEnsemble>;

  FittedModel(ModelSpec spec, std::vector<std::string> feature_names, Params params,
              std::vector<std::string> warnings = {});

  const ModelSpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  const std::vector<std::string>& feature_names() const { return features_; }
  const Params& params() const { return params_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t feature_count() const;

 private:
  ModelSpec spec_;
  std::vector<std::string> features_;
  Params params_;
  std::vector<std::string> warnings_;
};

/// Trains `spec` on (design, target). Classifier families expect 0/1
/// targets. Empty `weights` means unit weights.
FittedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& design,
                const Eigen::VectorXd& target, std::span<const double> weights = {},
                std::vector<std::string> feature_names = {},
                Execution exec = Execution::parallel);

/// Scores per row; classifiers return class-1 scores in [0, 1].
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& design,
                        Execution exec = Execution::parallel);
/// As above, after checking column names against the training metadata.
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& design,
                        std::span<const std::string> columns,
                        Execution exec = Execution::parallel);

struct Standardized {
  Eigen::MatrixXd x;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<bool> constant;
};

/// Column-wise centring and scaling to unit (population) standard
/// deviation. Zero-variance columns are centred, keep scale 1, and are
/// flagged. With weights, moments are weighted.
Standardized standardize(const Eigen::MatrixXd& x, std::span<const double> weights = {});
Eigen::MatrixXd destandardize(const Standardized& s);

/// Per-column lasso threshold max_j |sum w x_j (y - ybar)| / sum w on the
/// standardized design; every slope is zero for lambda >= this value.
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        std::span<const double> weights = {});

std::string save_model_json(const FittedModel& model);
FittedModel load_model_json(std::string_view text);

}  // namespace sfca
