#include <doctest.h>

#include <cmath>
#include <random>

#include "sfca/common.hpp"
#include "sfca/learners.hpp"
#include "sfca/linear.hpp"

using namespace sfca;

namespace {

struct Data {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Data regression_50x5() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  Data d{Eigen::MatrixXd(50, 5), Eigen::VectorXd(50)};
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 5; ++j) d.x(i, j) = n01(rng) * (j + 1);
    d.y[i] = 2.0 + d.x(i, 0) - 0.5 * d.x(i, 3) + 0.3 * n01(rng);
  }
  return d;
}

Data lasso_fixture() {
  Data d{Eigen::MatrixXd(40, 6), Eigen::VectorXd(40)};
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 6; ++j) d.x(i, j) = std::sin(0.37 * (i + 1) * (j + 1)) + 0.1 * j;
    d.y[i] = 1.5 * d.x(i, 0) - 2.0 * d.x(i, 2) + 0.5 * d.x(i, 4) + 0.1 * std::cos(i);
  }
  return d;
}

Data classification(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Data d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d.x(i, j) = n01(rng);
    d.y[i] = (d.x(i, 0) + 0.5 * d.x(i, 1) * d.x(i, 1) + 0.5 * n01(rng) > 0.4) ? 1.0 : 0.0;
  }
  return d;
}

Eigen::VectorXd ols_closed_form(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a << Eigen::VectorXd::Ones(x.rows()), x;
  return a.colPivHouseholderQr().solve(y);
}

}  // namespace

TEST_CASE("ridge with zero penalty equals ordinary least squares") {
  const auto d = regression_50x5();
  const auto want = ols_closed_form(d.x, d.y);
  std::vector<std::string> warnings;
  const auto ols = linear::fit_ols(d.x, d.y, {}, warnings);
  const auto ridge = linear::fit_ridge(d.x, d.y, {}, 0.0);
  CHECK(warnings.empty());
  CHECK(std::abs(ols.intercept - want[0]) < 1e-8);
  CHECK(std::abs(ridge.intercept - want[0]) < 1e-8);
  for (int j = 0; j < 5; ++j) {
    CHECK(std::abs(ols.coef[j] - want[j + 1]) < 1e-8);
    CHECK(std::abs(ridge.coef[j] - want[j + 1]) < 1e-8);
  }
}

TEST_CASE("ridge matches its closed form on standardized columns") {
  const auto d = regression_50x5();
  const double lambda = 0.7;
  const auto s = standardize(d.x);
  const Eigen::VectorXd yc = d.y.array() - d.y.mean();
  const double n = 50.0;
  const Eigen::MatrixXd a = s.x.transpose() * s.x / n + lambda * Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd beta = a.ldlt().solve(s.x.transpose() * yc / n);
  const auto fit = linear::fit_ridge(d.x, d.y, {}, lambda);
  for (int j = 0; j < 5; ++j) CHECK(std::abs(fit.coef[j] * s.scale[j] - beta[j]) < 1e-10);
  CHECK(std::abs(fit.intercept - (d.y.mean() - s.mean.dot(fit.coef))) < 1e-10);
}

TEST_CASE("weighted OLS equals row duplication") {
  const auto d = regression_50x5();
  std::vector<double> w(50, 1.0);
  w[3] = 2.0;
  w[17] = 3.0;
  Eigen::MatrixXd xd(53, 5);
  Eigen::VectorXd yd(53);
  xd.topRows(50) = d.x;
  yd.head(50) = d.y;
  xd.row(50) = d.x.row(3);
  yd[50] = d.y[3];
  xd.row(51) = d.x.row(17);
  xd.row(52) = d.x.row(17);
  yd[51] = yd[52] = d.y[17];
  std::vector<std::string> warn;
  const auto a = linear::fit_ols(d.x, d.y, w, warn);
  const auto b = linear::fit_ols(xd, yd, {}, warn);
  CHECK(std::abs(a.intercept - b.intercept) < 1e-9);
  CHECK((a.coef - b.coef).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("OLS warns and falls back on a singular design") {
  auto d = regression_50x5();
  d.x.col(4) = 2.0 * d.x.col(1);
  std::vector<std::string> warnings;
  const auto p = linear::fit_ols(d.x, d.y, {}, warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("pseudo-inverse") != std::string::npos);
  const Eigen::VectorXd fitted = (d.x * p.coef).array() + p.intercept;
  const auto want = ols_closed_form(d.x, d.y);
  Eigen::MatrixXd a(50, 6);
  a << Eigen::VectorXd::Ones(50), d.x;
  CHECK((fitted - a * want).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("lasso matches the reference coordinate-descent solution") {
  const auto d = lasso_fixture();
  const auto fit = linear::fit_lasso(d.x, d.y, {}, 0.1);
  const double want[] = {0.9734998020349807, 0, -1.321642353205853, 0, 0.26198905128947525, 0};
  for (int j = 0; j < 6; ++j) CHECK(std::abs(fit.standardized_coef[j] - want[j]) < 1e-6);
  CHECK(std::abs(lasso_lambda_max(d.x, d.y) - 1.462281643396429) < 1e-12);
}

TEST_CASE("lasso satisfies the optimality conditions") {
  const auto d = lasso_fixture();
  const auto s = standardize(d.x);
  for (double lambda : {0.01, 0.1, 0.5}) {
    const auto fit = linear::fit_lasso(d.x, d.y, {}, lambda);
    const Eigen::VectorXd r = d.y - s.x * fit.standardized_coef - Eigen::VectorXd::Constant(40, fit.standardized_intercept);
    CHECK(std::abs(r.mean()) < 1e-10);
    for (int j = 0; j < 6; ++j) {
      const double g = s.x.col(j).dot(r) / 40.0;
      const double b = fit.standardized_coef[j];
      if (b != 0.0)
        CHECK(std::abs(g - lambda * (b > 0 ? 1.0 : -1.0)) < 1e-6);
      else
        CHECK(std::abs(g) <= lambda + 1e-6);
    }
  }
}

TEST_CASE("lasso slopes vanish at and above lambda max") {
  const auto d = lasso_fixture();
  const double lmax = lasso_lambda_max(d.x, d.y);
  for (double lambda : {lmax, 1.5 * lmax, 10 * lmax}) {
    const auto fit = linear::fit_lasso(d.x, d.y, {}, lambda);
    CHECK(fit.params.coef.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fit.params.intercept == doctest::Approx(d.y.mean()));
  }
  CHECK(linear::fit_lasso(d.x, d.y, {}, 0.98 * lmax).standardized_coef.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("lasso reports non-convergence") {
  const auto d = lasso_fixture();
  try {
    linear::fit_lasso(d.x, d.y, {}, 1e-4, {1e-14, 2});
    FAIL("expected non-convergence");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("did not converge after 2 sweeps") != std::string::npos);
  }
}

TEST_CASE("penalised logistic regression is stationary") {
  const auto d = classification(200, 4, 3);
  const auto s = standardize(d.x);
  for (auto pen : {linear::Penalty::ridge, linear::Penalty::lasso}) {
    const double lambda = 0.02;
    const auto p = linear::fit_logistic(d.x, d.y, {}, lambda, pen);
    const Eigen::VectorXd beta = p.coef.cwiseProduct(s.scale);
    const double b0 = p.intercept + s.mean.dot(p.coef);
    Eigen::VectorXd resid(200);
    for (int i = 0; i < 200; ++i) resid[i] = linear::sigmoid(s.x.row(i).dot(beta) + b0) - d.y[i];
    CHECK(std::abs(resid.mean()) < 1e-6);
    const Eigen::VectorXd g = s.x.transpose() * resid / 200.0;
    for (int j = 0; j < 4; ++j) {
      if (pen == linear::Penalty::ridge)
        CHECK(std::abs(g[j] + lambda * beta[j]) < 1e-6);
      else if (beta[j] != 0.0)
        CHECK(std::abs(g[j] + lambda * (beta[j] > 0 ? 1.0 : -1.0)) < 1e-6);
      else
        CHECK(std::abs(g[j]) <= lambda + 1e-6);
    }
  }
}

TEST_CASE("linear SVM separates separable data and scores in [0, 1]") {
  Eigen::MatrixXd x(40, 2);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) {
    const double side = i < 20 ? -1.0 : 1.0;
    x(i, 0) = side * (1.0 + 0.05 * (i % 7));
    x(i, 1) = 0.1 * (i % 5);
    y[i] = i < 20 ? 0.0 : 1.0;
  }
  auto spec = ModelSpec::defaults(Family::svm_linear);
  const auto m = fit(spec, x, y);
  const auto p = predict(m, x);
  for (int i = 0; i < 40; ++i) {
    CHECK(p[i] >= 0.0);
    CHECK(p[i] <= 1.0);
    CHECK((p[i] > 0.5) == (y[i] == 1.0));
  }
}

TEST_CASE("a fully grown tree fits XOR") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  Eigen::VectorXd y(4);
  y << 0, 1, 1, 0;
  auto spec = ModelSpec::defaults(Family::r_tree);
  spec.min_leaf = 1;
  const auto p = predict(fit(spec, x, y), x);
  for (int i = 0; i < 4; ++i) CHECK(p[i] == y[i]);

  spec.min_leaf = 5;
  const auto m = fit(spec, x, y);
  CHECK(std::get<TreeEnsemble>(m.params()).trees[0].nodes.size() == 1);
  for (double v : predict(m, x)) CHECK(v == 0.5);
}

TEST_CASE("bagging is deterministic and thread-count independent") {
  const auto d = classification(300, 6, 11);
  auto spec = ModelSpec::defaults(Family::c_tree_bag);
  spec.n_trees = 25;
  const auto a = fit(spec, d.x, d.y, {}, {}, Execution::serial);
  const auto b = fit(spec, d.x, d.y, {}, {}, Execution::parallel);
  CHECK(save_model_json(a) == save_model_json(b));
  const auto pa = predict(a, d.x, Execution::serial);
  const auto pb = predict(b, d.x, Execution::parallel);
  CHECK(pa == pb);
  for (double v : pa) CHECK((v >= 0.0 && v <= 1.0));
  spec.seed = 43;
  CHECK(save_model_json(fit(spec, d.x, d.y)) != save_model_json(a));
}

TEST_CASE("a duplicated row equals a doubled weight in a tree") {
  const auto d = classification(60, 3, 5);
  auto spec = ModelSpec::defaults(Family::r_tree);
  spec.min_leaf = 2;
  std::vector<double> w(60, 1.0);
  w[10] = 2.0;
  Eigen::MatrixXd xd(61, 3);
  Eigen::VectorXd yd(61);
  xd.topRows(60) = d.x;
  xd.row(60) = d.x.row(10);
  yd.head(60) = d.y;
  yd[60] = d.y[10];
  const auto a = predict(fit(spec, d.x, d.y, w), d.x);
  const auto b = predict(fit(spec, xd, yd), d.x);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("boosting training loss never increases") {
  const auto d = classification(400, 5, 9);
  for (Family f : {Family::c_tree_boost, Family::r_tree_boost}) {
    auto spec = ModelSpec::defaults(f);
    REQUIRE(spec.n_trees == 300);
    const auto m = fit(spec, d.x, d.y);
    const auto& h = std::get<TreeEnsemble>(m.params()).loss_history;
    REQUIRE(h.size() == 300);
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] + 1e-12);
    CHECK(h.back() < h.front());
  }
}

TEST_CASE("model JSON round-trips every family") {
  const auto d = classification(120, 4, 21);
  for (Family f : all_families()) {
    auto spec = ModelSpec::defaults(f);
    if (spec.n_trees > 1) spec.n_trees = 8;
    const auto m = fit(spec, d.x, d.y, {}, {"a", "b", "c", "d"});
    const auto text = save_model_json(m);
    const auto back = load_model_json(text);
    CHECK(save_model_json(back) == text);
    CHECK(predict(back, d.x) == predict(m, d.x));
  }
}

TEST_CASE("prediction checks the column schema") {
  const auto d = classification(50, 2, 1);
  const auto m = fit(ModelSpec::defaults(Family::ols), d.x, d.y, {}, {"a", "b"});
  const std::vector<std::string> good{"a", "b"}, bad{"b", "a"};
  CHECK_NOTHROW(predict(m, d.x, good));
  CHECK_THROWS_AS(predict(m, d.x, bad), Error);
  CHECK_THROWS_AS(predict(m, Eigen::MatrixXd(3, 3)), Error);
  CHECK_THROWS_AS(load_model_json("{\"version\": 999}"), Error);
}

TEST_CASE("model specs parse labels and validate") {
  CHECK(ModelSpec::from_label("c-tree(bg)").family == Family::c_tree_bag);
  CHECK(ModelSpec::from_label("c-tree(bg)(w)").weighted);
  CHECK(ModelSpec::from_label("lasso+w").weighted);
  CHECK(ModelSpec::from_label("c-tree-bag").family == Family::c_tree_bag);
  CHECK(ModelSpec::from_label("logr(ridge)").label() == "logr(ridge)");
  CHECK_THROWS_AS(ModelSpec::from_label("forest"), Error);
  CHECK(ModelSpec::defaults(Family::c_tree_bag).n_trees == 200);
  CHECK(ModelSpec::defaults(Family::c_tree_bag).min_leaf == 1.0);
  CHECK(ModelSpec::defaults(Family::r_tree_bag).min_leaf == 5.0);
  auto s = ModelSpec::defaults(Family::ridge);
  s.lambda = -1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = ModelSpec::defaults(Family::c_tree_boost);
  s.subsample = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  const auto d = classification(10, 2, 2);
  Eigen::VectorXd bad = d.y;
  bad[0] = 0.5;
  CHECK_THROWS_AS(fit(ModelSpec::defaults(Family::logr_ridge), d.x, bad), Error);
}
