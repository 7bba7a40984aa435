#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sfca/learners.hpp"
#include "sfca/parallel.hpp"

namespace sfca::tree {

/// Column-major uint8 bin codes. A value x has code b when x <= edges[b]
/// and x > edges[b-1]; the last bin is open-ended.
struct BinnedMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> codes;
  std::vector<std::vector<double>> edges;

  static BinnedMatrix build(const Eigen::MatrixXd& x, int max_bins = 256);
  std::uint8_t code(int row, int col) const { return codes[static_cast<std::size_t>(col) * rows + row]; }
  int bins(int col) const { return static_cast<int>(edges[col].size()) + 1; }
};

struct GrowOptions {
  int max_depth = 0;  // 0: unlimited
  double min_leaf = 5.0;
  int max_features = 0;  // 0: all
};

/// Greedy weighted variance split search (for 0/1 targets this is Gini up
/// to a factor of two). Rows with zero weight are ignored. Leaves hold the
/// weighted mean target.
Tree grow(const BinnedMatrix& x, std::span<const double> target, std::span<const double> weight,
          const GrowOptions& opts, std::mt19937_64& rng);

/// Leaf node reached by training row `row` using bin codes.
int leaf_of(const Tree& tree, const BinnedMatrix& x, int row);

/// Draw in [0, n) by plain modulo reduction, identical on every platform.
inline std::uint64_t draw_index(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

/// Bootstrap multiplicities: n draws with replacement.
std::vector<double> bootstrap_counts(int n, std::mt19937_64& rng);

TreeEnsemble fit_single(const BinnedMatrix& x, const Eigen::VectorXd& y, std::span<const double> w,
                        const ModelSpec& spec);
TreeEnsemble fit_bagging(const BinnedMatrix& x, const Eigen::VectorXd& y, std::span<const double> w,
                         const ModelSpec& spec, bool classification, Execution exec);
TreeEnsemble fit_boosting(const BinnedMatrix& x, const Eigen::VectorXd& y, std::span<const double> w,
                          const ModelSpec& spec, bool classification);

double predict_row(const TreeEnsemble& ensemble, const Eigen::Ref<const Eigen::RowVectorXd>& row);

}  // namespace sfca::tree
