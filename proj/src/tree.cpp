#include "sfca/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sfca/common.hpp"
#include "sfca/linear.hpp"

namespace sfca {

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  if (nodes.empty()) throw Error("empty tree");
  int at = 0;
  while (nodes[at].feature >= 0) {
    const auto& n = nodes[at];
    at = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[at].value;
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return best;
}

namespace tree {

BinnedMatrix BinnedMatrix::build(const Eigen::MatrixXd& x, int max_bins) {
  if (max_bins < 2 || max_bins > 256) throw Error("max_bins must lie in [2, 256]");
  BinnedMatrix b;
  b.rows = static_cast<int>(x.rows());
  b.cols = static_cast<int>(x.cols());
  b.codes.resize(static_cast<std::size_t>(b.rows) * b.cols);
  b.edges.resize(b.cols);
  std::vector<double> v(b.rows);
  for (int j = 0; j < b.cols; ++j) {
    for (int i = 0; i < b.rows; ++i) {
      v[i] = x(i, j);
      if (!std::isfinite(v[i])) throw Error("tree design contains non-finite values");
    }
    std::sort(v.begin(), v.end());
    std::vector<double> uniq;
    std::unique_copy(v.begin(), v.end(), std::back_inserter(uniq));
    auto& e = b.edges[j];
    if (static_cast<int>(uniq.size()) <= max_bins) {
      for (std::size_t k = 0; k + 1 < uniq.size(); ++k) e.push_back(0.5 * (uniq[k] + uniq[k + 1]));
    } else {
      for (int k = 1; k < max_bins; ++k) {
        const double q = v[static_cast<std::size_t>(k) * v.size() / max_bins];
        if (q < uniq.back() && (e.empty() || q > e.back())) e.push_back(q);
      }
    }
    for (int i = 0; i < b.rows; ++i) {
      const auto it = std::lower_bound(e.begin(), e.end(), x(i, j));
      b.codes[static_cast<std::size_t>(j) * b.rows + i] = static_cast<std::uint8_t>(it - e.begin());
    }
  }
  return b;
}

namespace {

struct Split {
  int feature = -1;
  int bin = 0;
  double gain = -std::numeric_limits<double>::infinity();
};

struct Work {
  int node, begin, end, depth;
};

}  // namespace

Tree grow(const BinnedMatrix& x, std::span<const double> target, std::span<const double> weight,
          const GrowOptions& opts, std::mt19937_64& rng) {
  std::vector<int> idx;
  idx.reserve(x.rows);
  for (int i = 0; i < x.rows; ++i)
    if (weight[i] > 0) idx.push_back(i);
  Tree t;
  t.nodes.emplace_back();
  if (idx.empty()) return t;

  const int m = x.cols;
  const int mtry = opts.max_features > 0 ? std::min(opts.max_features, m) : m;
  std::vector<int> feats(m);
  std::iota(feats.begin(), feats.end(), 0);
  std::vector<double> hw(256), hy(256);
  std::vector<std::pair<std::uint8_t, int>> sorted;

  std::vector<Work> stack{{0, 0, static_cast<int>(idx.size()), 0}};
  while (!stack.empty()) {
    const Work wk = stack.back();
    stack.pop_back();
    double sw = 0, sy = 0, syy = 0;
    for (int k = wk.begin; k < wk.end; ++k) {
      const int i = idx[k];
      sw += weight[i];
      sy += weight[i] * target[i];
      syy += weight[i] * target[i] * target[i];
    }
    t.nodes[wk.node].value = sy / sw;
    if (opts.max_depth > 0 && wk.depth >= opts.max_depth) continue;
    if (sw < 2 * opts.min_leaf) continue;
    if (syy - sy * sy / sw <= 1e-12 * std::max(1.0, syy)) continue;

    if (mtry < m)
      for (int k = 0; k < mtry; ++k)
        std::swap(feats[k], feats[k + draw_index(rng, static_cast<std::uint64_t>(m - k))]);

    const double parent = sy * sy / sw;
    const int n = wk.end - wk.begin;
    Split best;
    auto consider = [&](int f, int bin, double wl, double yl) {
      const double wr = sw - wl;
      if (wl < opts.min_leaf || wr < opts.min_leaf) return;
      const double yr = sy - yl;
      const double gain = yl * yl / wl + yr * yr / wr - parent;
      if (gain > best.gain) best = {f, bin, gain};
    };
    for (int k = 0; k < mtry; ++k) {
      const int f = feats[k];
      const int nb = x.bins(f);
      if (nb < 2) continue;
      const std::uint8_t* col = x.codes.data() + static_cast<std::size_t>(f) * x.rows;
      if (2 * n >= nb) {
        std::fill_n(hw.begin(), nb, 0.0);
        std::fill_n(hy.begin(), nb, 0.0);
        for (int q = wk.begin; q < wk.end; ++q) {
          const int i = idx[q];
          hw[col[i]] += weight[i];
          hy[col[i]] += weight[i] * target[i];
        }
        double wl = 0, yl = 0;
        for (int b = 0; b + 1 < nb; ++b) {
          if (hw[b] == 0) continue;
          wl += hw[b];
          yl += hy[b];
          consider(f, b, wl, yl);
        }
      } else {
        sorted.clear();
        for (int q = wk.begin; q < wk.end; ++q) sorted.emplace_back(col[idx[q]], idx[q]);
        std::sort(sorted.begin(), sorted.end());
        double wl = 0, yl = 0;
        for (std::size_t q = 0; q + 1 < sorted.size(); ++q) {
          const int i = sorted[q].second;
          wl += weight[i];
          yl += weight[i] * target[i];
          if (sorted[q + 1].first != sorted[q].first) consider(f, sorted[q].first, wl, yl);
        }
      }
    }
    if (best.feature < 0) continue;

    const std::uint8_t* col = x.codes.data() + static_cast<std::size_t>(best.feature) * x.rows;
    const auto mid = std::stable_partition(idx.begin() + wk.begin, idx.begin() + wk.end,
                                           [&](int i) { return col[i] <= best.bin; });
    const int split_at = static_cast<int>(mid - idx.begin());
    const int left = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes.emplace_back();
    auto& node = t.nodes[wk.node];
    node.feature = best.feature;
    node.bin = best.bin;
    node.threshold = x.edges[best.feature][best.bin];
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, split_at, wk.end, wk.depth + 1});
    stack.push_back({left, wk.begin, split_at, wk.depth + 1});
  }
  return t;
}

int leaf_of(const Tree& tree, const BinnedMatrix& x, int row) {
  int at = 0;
  while (tree.nodes[at].feature >= 0) {
    const auto& n = tree.nodes[at];
    at = x.code(row, n.feature) <= n.bin ? n.left : n.right;
  }
  return at;
}

std::vector<double> bootstrap_counts(int n, std::mt19937_64& rng) {
  std::vector<double> c(n, 0.0);
  for (int k = 0; k < n; ++k) c[draw_index(rng, static_cast<std::uint64_t>(n))] += 1.0;
  return c;
}

namespace {

std::vector<double> unit_or(std::span<const double> w, int n) {
  if (w.empty()) return std::vector<double>(n, 1.0);
  return {w.begin(), w.end()};
}

int default_mtry(const ModelSpec& spec, int m, bool classification) {
  if (spec.max_features > 0) return spec.max_features;
  if (classification) return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
  return std::max(1, m / 3);
}

}  // namespace

TreeEnsemble fit_single(const BinnedMatrix& x, const Eigen::VectorXd& y, std::span<const double> w,
                        const ModelSpec& spec) {
  const auto wv = unit_or(w, x.rows);
  std::mt19937_64 rng(derive_seed(spec.seed, 0));
  TreeEnsemble e;
  e.aggregation = Aggregation::mean;
  e.trees.push_back(grow(x, {y.data(), static_cast<std::size_t>(y.size())}, wv,
                         {spec.max_depth, spec.min_leaf, spec.max_features}, rng));
  return e;
}

TreeEnsemble fit_bagging(const BinnedMatrix& x, const Eigen::VectorXd& y, std::span<const double> w,
                         const ModelSpec& spec, bool classification, Execution exec) {
  const auto wv = unit_or(w, x.rows);
  const GrowOptions opts{spec.max_depth, spec.min_leaf, default_mtry(spec, x.cols, classification)};
  TreeEnsemble e;
  e.aggregation = classification ? Aggregation::vote : Aggregation::mean;
  e.trees.resize(spec.n_trees);
  const std::span<const double> target(y.data(), static_cast<std::size_t>(y.size()));
  auto one = [&](int t) {
    std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(t)));
    auto bw = bootstrap_counts(x.rows, rng);
    for (int i = 0; i < x.rows; ++i) bw[i] *= wv[i];
    e.trees[t] = grow(x, target, bw, opts, rng);
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < spec.n_trees; ++t) one(t);
  } else {
    for (int t = 0; t < spec.n_trees; ++t) one(t);
  }
  return e;
}

TreeEnsemble fit_boosting(const BinnedMatrix& x, const Eigen::VectorXd& y, std::span<const double> w,
                          const ModelSpec& spec, bool classification) {
  const int n = x.rows;
  const auto wv = unit_or(w, n);
  const double sw = std::accumulate(wv.begin(), wv.end(), 0.0);
  double ybar = 0;
  for (int i = 0; i < n; ++i) ybar += wv[i] * y[i];
  ybar /= sw;

  TreeEnsemble e;
  e.aggregation = classification ? Aggregation::additive_logistic : Aggregation::additive;
  e.learning_rate = spec.learning_rate;
  if (classification) {
    const double p = std::clamp(ybar, 1e-6, 1 - 1e-6);
    e.base = std::log(p / (1 - p));
  } else {
    e.base = ybar;
  }
  std::vector<double> f(n, e.base), resid(n), sub_w(n), prob(n);
  std::vector<int> order(n);
  const int take = std::max(1, static_cast<int>(std::floor(spec.subsample * n)));
  const GrowOptions opts{spec.max_depth, spec.min_leaf, spec.max_features};
  std::mt19937_64 rng(derive_seed(spec.seed, 0));

  for (int round = 0; round < spec.n_trees; ++round) {
    for (int i = 0; i < n; ++i) {
      prob[i] = classification ? linear::sigmoid(f[i]) : f[i];
      resid[i] = y[i] - prob[i];
    }
    std::fill(sub_w.begin(), sub_w.end(), 0.0);
    if (take >= n) {
      sub_w = wv;
    } else {
      std::iota(order.begin(), order.end(), 0);
      for (int k = 0; k < take; ++k) {
        std::swap(order[k], order[k + draw_index(rng, static_cast<std::uint64_t>(n - k))]);
        sub_w[order[k]] = wv[order[k]];
      }
    }
    Tree t = grow(x, resid, sub_w, opts, rng);

    // Leaf values refit on every training row.
    std::vector<double> num(t.nodes.size(), 0.0), den(t.nodes.size(), 0.0);
    std::vector<int> leaf(n);
    for (int i = 0; i < n; ++i) {
      leaf[i] = leaf_of(t, x, i);
      num[leaf[i]] += wv[i] * resid[i];
      den[leaf[i]] += classification ? wv[i] * prob[i] * (1 - prob[i]) : wv[i];
    }
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
      if (t.nodes[k].feature >= 0) continue;
      t.nodes[k].value = den[k] > 0 ? num[k] / std::max(den[k], 1e-12) : 0.0;
    }
    double loss = 0;
    for (int i = 0; i < n; ++i) {
      f[i] += e.learning_rate * t.nodes[leaf[i]].value;
      if (classification) {
        const double z = f[i];
        const double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += wv[i] * (sp - y[i] * z);
      } else {
        loss += wv[i] * (y[i] - f[i]) * (y[i] - f[i]);
      }
    }
    e.loss_history.push_back(loss / sw);
    e.trees.push_back(std::move(t));
  }
  return e;
}

double predict_row(const TreeEnsemble& e, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  switch (e.aggregation) {
    case Aggregation::mean: {
      double s = 0;
      for (const auto& t : e.trees) s += t.predict(row);
      return s / static_cast<double>(e.trees.size());
    }
    case Aggregation::vote: {
      double s = 0;
      for (const auto& t : e.trees) {
        const double p = t.predict(row);
        s += p > 0.5 ? 1.0 : (p < 0.5 ? 0.0 : 0.5);
      }
      return s / static_cast<double>(e.trees.size());
    }
    case Aggregation::additive:
    case Aggregation::additive_logistic: {
      double s = e.base;
      for (const auto& t : e.trees) s += e.learning_rate * t.predict(row);
      return e.aggregation == Aggregation::additive ? s : linear::sigmoid(s);
    }
  }
  return 0.0;
}

}  // namespace tree
}  // namespace sfca
