#include "sfca/linear.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "sfca/common.hpp"

namespace sfca::linear {
namespace {

Eigen::VectorXd weight_vector(std::span<const double> w, Eigen::Index n) {
  if (w.empty()) return Eigen::VectorXd::Ones(n);
  if (static_cast<Eigen::Index>(w.size()) != n) throw Error("weights length differs from rows");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw Error("weights must be positive and finite");
    out[i] = w[i];
  }
  return out;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

double softplus(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

// Maps standardized coefficients back to the original column scale.
LinearParams to_original(const Standardized& s, double intercept, const Eigen::VectorXd& beta) {
  LinearParams p;
  p.coef = beta.cwiseQuotient(s.scale);
  p.intercept = intercept - s.mean.dot(p.coef);
  return p;
}

double logistic_objective(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& w, double sw, double b0,
                          const Eigen::VectorXd& beta, double lambda, Penalty pen) {
  const Eigen::VectorXd eta = (xs * beta).array() + b0;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) loss += w[i] * (softplus(eta[i]) - y[i] * eta[i]);
  loss /= sw;
  return loss + (pen == Penalty::ridge ? 0.5 * lambda * beta.squaredNorm() : lambda * beta.lpNorm<1>());
}

void check_binary(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0) throw Error("classification targets must be 0 or 1");
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LinearParams fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> w_in,
                     std::vector<std::string>& warnings) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0) throw Error("ols: empty design");
  const Eigen::VectorXd w = weight_vector(w_in, n);
  const double sw = w.sum();
  const Eigen::RowVectorXd xm = (w.transpose() * x) / sw;
  const double ym = w.dot(y) / sw;
  const Eigen::MatrixXd xc = x.rowwise() - xm;
  const Eigen::VectorXd yc = y.array() - ym;

  Eigen::VectorXd beta;
  bool solved = false;
  if (p < n) {
    const Eigen::MatrixXd a = xc.transpose() * w.asDiagonal() * xc;
    const Eigen::VectorXd b = xc.transpose() * w.cwiseProduct(yc);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-12) {
      beta = ldlt.solve(b);
      solved = beta.allFinite();
    }
  }
  if (!solved) {
    warnings.push_back("ols: singular or under-determined system, pseudo-inverse used");
    const Eigen::VectorXd sq = w.cwiseSqrt();
    const Eigen::MatrixXd a = sq.asDiagonal() * xc;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    beta = cod.solve(sq.cwiseProduct(yc));
  }
  LinearParams out;
  out.coef = beta;
  out.intercept = ym - xm.dot(beta);
  return out;
}

LinearParams fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> w_in,
                       double lambda) {
  const Eigen::Index n = x.rows();
  if (n == 0) throw Error("ridge: empty design");
  if (lambda < 0) throw Error("ridge: lambda must be non-negative");
  const Eigen::VectorXd w = weight_vector(w_in, n);
  const double sw = w.sum();
  const Standardized s = standardize(x, as_span(w));
  const double ym = w.dot(y) / sw;
  const Eigen::VectorXd sq = w.cwiseSqrt();
  const Eigen::MatrixXd a = sq.asDiagonal() * s.x;
  const Eigen::VectorXd b = sq.cwiseProduct((y.array() - ym).matrix());

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? sv[0] * 1e-12 * std::max(a.rows(), a.cols()) : 0.0;
  Eigen::VectorXd shrink(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double denom = sv[i] * sv[i] + sw * lambda;
    shrink[i] = (sv[i] <= cutoff && lambda == 0.0) || denom == 0.0 ? 0.0 : sv[i] / denom;
  }
  const Eigen::VectorXd beta = svd.matrixV() * shrink.cwiseProduct(svd.matrixU().transpose() * b);
  return to_original(s, ym, beta);
}

LassoFit fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> w_in,
                   double lambda, const CoordinateDescentOptions& opts) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0) throw Error("lasso: empty design");
  if (lambda < 0) throw Error("lasso: lambda must be non-negative");
  const Eigen::VectorXd w = weight_vector(w_in, n);
  const double sw = w.sum();
  const Standardized s = standardize(x, as_span(w));
  const double ym = w.dot(y) / sw;
  Eigen::VectorXd r = y.array() - ym;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

  auto update = [&](Eigen::Index j) {
    if (s.constant[static_cast<std::size_t>(j)]) return 0.0;
    const auto col = s.x.col(j);
    const double g = col.dot(w.cwiseProduct(r)) / sw;
    const double old = beta[j];
    const double next = soft_threshold(g + old, lambda);
    if (next != old) {
      r -= (next - old) * col;
      beta[j] = next;
    }
    return std::abs(next - old);
  };

  int sweeps = 0;
  bool converged = false;
  while (sweeps < opts.max_sweeps) {
    double delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) delta = std::max(delta, update(j));
    ++sweeps;
    if (delta < opts.tolerance) {
      converged = true;
      break;
    }
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j)
      if (beta[j] != 0.0) active.push_back(j);
    while (sweeps < opts.max_sweeps) {
      double d = 0.0;
      for (Eigen::Index j : active) d = std::max(d, update(j));
      ++sweeps;
      if (d < opts.tolerance) break;
    }
  }
  if (!converged)
    throw Error("lasso coordinate descent did not converge after " + std::to_string(sweeps) +
                " sweeps");
  LassoFit fit;
  fit.params = to_original(s, ym, beta);
  fit.standardized_coef = beta;
  fit.standardized_intercept = ym;
  fit.sweeps = sweeps;
  return fit;
}

LinearParams fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          std::span<const double> w_in, double lambda, Penalty penalty,
                          const CoordinateDescentOptions& opts) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0) throw Error("logistic: empty design");
  if (lambda < 0) throw Error("logistic: lambda must be non-negative");
  check_binary(y);
  const Eigen::VectorXd w = weight_vector(w_in, n);
  const double sw = w.sum();
  const Standardized s = standardize(x, as_span(w));
  const double ybar = std::clamp(w.dot(y) / sw, 1e-6, 1.0 - 1e-6);
  double b0 = std::log(ybar / (1.0 - ybar));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double obj = logistic_objective(s.x, y, w, sw, b0, beta, lambda, penalty);

  for (int outer = 0; outer < 200; ++outer) {
    const Eigen::VectorXd eta = (s.x * beta).array() + b0;
    Eigen::VectorXd prob(n), h(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = sigmoid(eta[i]);
      h[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-5);
    }
    double nb0 = b0;
    Eigen::VectorXd nbeta = beta;
    if (penalty == Penalty::ridge) {
      const Eigen::VectorXd resid = w.cwiseProduct(prob - y) / sw;
      const Eigen::VectorXd hw = w.cwiseProduct(h) / sw;
      Eigen::MatrixXd hess(p + 1, p + 1);
      hess(0, 0) = hw.sum();
      const Eigen::VectorXd cross = s.x.transpose() * hw;
      hess.block(1, 0, p, 1) = cross;
      hess.block(0, 1, 1, p) = cross.transpose();
      hess.block(1, 1, p, p) = s.x.transpose() * hw.asDiagonal() * s.x;
      hess.block(1, 1, p, p).diagonal().array() += lambda;
      hess.diagonal().array() += 1e-10;
      Eigen::VectorXd grad(p + 1);
      grad[0] = resid.sum();
      grad.tail(p) = s.x.transpose() * resid + lambda * beta;
      const Eigen::VectorXd step = hess.ldlt().solve(grad);
      nb0 = b0 - step[0];
      nbeta = beta - step.tail(p);
    } else {
      // Quadratic approximation: working response z, weights v.
      const Eigen::VectorXd v = w.cwiseProduct(h);
      const Eigen::VectorXd z = eta + (y - prob).cwiseQuotient(h);
      Eigen::VectorXd r = z - (s.x * nbeta);
      r.array() -= nb0;
      Eigen::VectorXd curv(p);
      for (Eigen::Index j = 0; j < p; ++j) curv[j] = s.x.col(j).cwiseAbs2().dot(v) / sw;
      const double vsum = v.sum();
      for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double delta = 0.0;
        const double db0 = v.dot(r) / vsum;
        nb0 += db0;
        r.array() -= db0;
        delta = std::abs(db0);
        for (Eigen::Index j = 0; j < p; ++j) {
          if (curv[j] <= 0.0) continue;
          const auto col = s.x.col(j);
          const double g = col.dot(v.cwiseProduct(r)) / sw;
          const double old = nbeta[j];
          const double next = soft_threshold(g + curv[j] * old, lambda) / curv[j];
          if (next != old) {
            r -= (next - old) * col;
            nbeta[j] = next;
            delta = std::max(delta, std::abs(next - old));
          }
        }
        if (delta < opts.tolerance) break;
      }
    }
    // Damped step along the proposed direction.
    double t = 1.0;
    double cand = logistic_objective(s.x, y, w, sw, b0 + t * (nb0 - b0), beta + t * (nbeta - beta),
                                     lambda, penalty);
    while (cand > obj + 1e-14 && t > 1e-6) {
      t *= 0.5;
      cand = logistic_objective(s.x, y, w, sw, b0 + t * (nb0 - b0), beta + t * (nbeta - beta),
                                lambda, penalty);
    }
    if (cand > obj + 1e-14) break;
    const double change =
        std::max(std::abs(t * (nb0 - b0)), (t * (nbeta - beta)).lpNorm<Eigen::Infinity>());
    b0 += t * (nb0 - b0);
    beta += t * (nbeta - beta);
    obj = cand;
    if (change < opts.tolerance) break;
  }
  LinearParams out = to_original(s, b0, beta);
  out.link = Link::logistic;
  return out;
}

LinearParams fit_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> w_in,
                     double lambda, int iterations) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0) throw Error("svm: empty design");
  if (!(lambda > 0)) throw Error("svm: lambda must be positive");
  if (iterations < 1) throw Error("svm: iterations must be positive");
  check_binary(y);
  const Eigen::VectorXd w = weight_vector(w_in, n);
  const double sw = w.sum();
  const Standardized s = standardize(x, as_span(w));
  const Eigen::VectorXd ys = 2.0 * y.array() - 1.0;

  // Bias handled as an extra constant feature.
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(p + 1);
  int averaged = 0;
  const double radius = 1.0 / std::sqrt(lambda);
  Eigen::VectorXd coeff(n);
  for (int t = 1; t <= iterations; ++t) {
    const Eigen::VectorXd margin =
        ys.cwiseProduct((s.x * theta.head(p)).array().matrix() + Eigen::VectorXd::Constant(n, theta[p]));
    for (Eigen::Index i = 0; i < n; ++i) coeff[i] = margin[i] < 1.0 ? w[i] * ys[i] / sw : 0.0;
    Eigen::VectorXd grad(p + 1);
    grad.head(p) = lambda * theta.head(p) - s.x.transpose() * coeff;
    grad[p] = lambda * theta[p] - coeff.sum();
    theta -= grad / (lambda * t);
    const double norm = theta.norm();
    if (norm > radius) theta *= radius / norm;
    if (t > iterations / 2) {
      avg += theta;
      ++averaged;
    }
  }
  avg /= std::max(1, averaged);

  // Logistic calibration of margins (two-parameter Newton).
  const Eigen::VectorXd m = (s.x * avg.head(p)).array() + avg[p];
  double a = 1.0, c = 0.0;
  for (int it = 0; it < 100; ++it) {
    double g0 = 0, g1 = 0, h00 = 1e-9, h01 = 0, h11 = 1e-9;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double q = sigmoid(a * m[i] + c);
      const double r = w[i] * (q - y[i]);
      const double hh = w[i] * q * (1 - q);
      g0 += r * m[i];
      g1 += r;
      h00 += hh * m[i] * m[i];
      h01 += hh * m[i];
      h11 += hh;
    }
    const double det = h00 * h11 - h01 * h01;
    if (std::abs(det) < 1e-300) break;
    const double da = (h11 * g0 - h01 * g1) / det;
    const double dc = (h00 * g1 - h01 * g0) / det;
    a -= da;
    c -= dc;
    if (std::max(std::abs(da), std::abs(dc)) < 1e-10) break;
  }
  LinearParams out = to_original(s, avg[p], avg.head(p));
  out.link = Link::calibrated_margin;
  out.calib_slope = a;
  out.calib_offset = c;
  return out;
}

}  // namespace sfca::linear
