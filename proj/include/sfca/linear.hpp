#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "sfca/learners.hpp"

namespace sfca::linear {

/// Weighted least squares with intercept via the normal equations; falls
/// back to the minimum-norm pseudo-inverse when the system is singular or
/// under-determined (and records a warning).
LinearParams fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     std::span<const double> w, std::vector<std::string>& warnings);

/// Minimises (1/2W) sum w r^2 + (lambda/2) |b|^2 on standardized columns;
/// the intercept is not penalised. Solved through a thin SVD.
LinearParams fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       std::span<const double> w, double lambda);

struct CoordinateDescentOptions {
  double tolerance = 1e-7;
  int max_sweeps = 10000;
};

struct LassoFit {
  LinearParams params;
  Eigen::VectorXd standardized_coef;
  double standardized_intercept = 0.0;
  int sweeps = 0;
};

/// Minimises (1/2W) sum w r^2 + lambda |b|_1 on standardized columns by
/// cyclic coordinate descent with active-set passes.
LassoFit fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> w,
                   double lambda, const CoordinateDescentOptions& opts = {});

enum class Penalty { ridge, lasso };

/// Penalised logistic regression on 0/1 targets. Ridge uses damped Newton
/// steps; lasso uses proximal Newton with an inner coordinate descent.
LinearParams fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          std::span<const double> w, double lambda, Penalty penalty,
                          const CoordinateDescentOptions& opts = {});

/// Linear SVM by full-batch projected subgradient descent on the hinge
/// loss, followed by a logistic calibration of the training margins.
LinearParams fit_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     std::span<const double> w, double lambda, int iterations);

double sigmoid(double z);

}  // namespace sfca::linear
