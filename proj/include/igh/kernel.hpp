#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#if defined(IGH_USE_LAPACKE)
#include <lapacke.h>
#endif

#include "igh/dataset.hpp"
#include "igh/error.hpp"

namespace igh {

enum class KernelFamily { gaussian };

enum class BandwidthRule { median_pairwise_distance };

/// Default relative eigenvalue cutoff. Eigenpairs with
/// lambda < cutoff_delta * lambda_1 are dropped from the extension.
inline constexpr double default_cutoff_delta = 1e-4;

/// Kernel family, bandwidth and eigenvalue cutoff.
///
/// An explicit `sigma` wins over `bandwidth_rule`; with no sigma the
/// bandwidth must be resolved against data (see resolve_bandwidth) before
/// any kernel value can be evaluated.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  std::optional<double> sigma;
  BandwidthRule bandwidth_rule = BandwidthRule::median_pairwise_distance;
  double cutoff_delta = default_cutoff_delta;

  static KernelSpec with_sigma(double s, double cutoff = default_cutoff_delta) {
    KernelSpec spec;
    spec.sigma = s;
    spec.cutoff_delta = cutoff;
    spec.validate();
    return spec;
  }

  static KernelSpec auto_bandwidth(double cutoff = default_cutoff_delta) {
    KernelSpec spec;
    spec.cutoff_delta = cutoff;
    spec.validate();
    return spec;
  }

  void validate() const {
    if (sigma && !(*sigma > 0.0 && std::isfinite(*sigma))) {
      fail(ErrorKind::configuration,
           "kernel bandwidth sigma must be a positive finite number");
    }
    if (!(cutoff_delta >= 0.0 && cutoff_delta < 1.0)) {
      fail(ErrorKind::configuration, "cutoff_delta must lie in [0, 1)");
    }
  }

  double resolved_sigma() const {
    if (!sigma) {
      fail(ErrorKind::configuration, "kernel bandwidth has not been resolved");
    }
    return *sigma;
  }
};

/// Gaussian kernel as a function of the squared distance.
inline double gaussian_kernel(double squared_distance, double sigma) noexcept {
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  return norm * std::exp(-0.5 * squared_distance / (sigma * sigma));
}

template <typename DerivedX, typename DerivedY>
double kernel_value(const Eigen::MatrixBase<DerivedX>& x,
                    const Eigen::MatrixBase<DerivedY>& y, const KernelSpec& spec) {
  if (x.size() != y.size()) {
    fail(ErrorKind::dimension, "kernel arguments have different lengths (" +
                                   std::to_string(x.size()) + " vs " +
                                   std::to_string(y.size()) + ")");
  }
  const double sigma = spec.resolved_sigma();
  double d2 = 0.0;
  for (Index k = 0; k < x.size(); ++k) {
    const double diff = x(k) - y(k);
    d2 += diff * diff;
  }
  return gaussian_kernel(d2, sigma);
}

namespace detail {

inline double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline void check_ids(const IndexList& ids, Index bound, const char* what) {
  for (Index id : ids) {
    if (id < 0 || id >= bound) {
      fail(ErrorKind::index, std::string(what) + " id " + std::to_string(id) +
                                 " out of range [0, " + std::to_string(bound) + ")");
    }
  }
}

}  // namespace detail

/// Returns the explicit sigma, or the median of all pairwise Euclidean
/// distances between the rows of X.
inline double resolve_bandwidth(const Matrix& X, const KernelSpec& spec) {
  spec.validate();
  if (spec.sigma) return *spec.sigma;
  const Index n = X.rows();
  if (n < 2) {
    fail(ErrorKind::insufficient_data,
         "bandwidth rule needs at least 2 rows, got " + std::to_string(n));
  }
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      distances.push_back((X.row(a) - X.row(b)).norm());
    }
  }
  const double median = detail::median_of(distances);
  if (!(median > 0.0)) {
    fail(ErrorKind::degenerate_data,
         "median pairwise distance is zero (rows are identical)");
  }
  return median;
}

/// Copy of `spec` with sigma filled in from X.
inline KernelSpec resolve(const Matrix& X, KernelSpec spec) {
  spec.sigma = resolve_bandwidth(X, spec);
  return spec;
}

/// A rectangular block of the Gram matrix over dataset rows.
struct GramBlock {
  Matrix values;
  IndexList row_index;
  IndexList col_index;

  bool is_square_block() const { return row_index == col_index; }
};

inline GramBlock gram_block(const Matrix& X, const IndexList& rows,
                            const IndexList& cols, const KernelSpec& spec) {
  detail::check_ids(rows, X.rows(), "row");
  detail::check_ids(cols, X.rows(), "column");
  const double sigma = spec.resolved_sigma();
  GramBlock block{Matrix(static_cast<Index>(rows.size()), static_cast<Index>(cols.size())),
                  rows, cols};
  const bool symmetric = rows == cols;
  for (Index b = 0; b < block.values.cols(); ++b) {
    const Index first = symmetric ? b : 0;
    for (Index a = first; a < block.values.rows(); ++a) {
      const double d2 = (X.row(rows[static_cast<std::size_t>(a)]) -
                         X.row(cols[static_cast<std::size_t>(b)]))
                            .squaredNorm();
      block.values(a, b) = gaussian_kernel(d2, sigma);
      if (symmetric) block.values(b, a) = block.values(a, b);
    }
  }
  return block;
}

/// Eigenpairs of a restricted Gram block, eigenvalues descending.
struct EigenSystem {
  Vector eigenvalues;
  Matrix eigenvectors;  // column l is psi_l
  Index kept_count = 0;

  auto kept_values() const { return eigenvalues.head(kept_count); }
  auto kept_vectors() const { return eigenvectors.leftCols(kept_count); }
};

namespace detail {

/// Ascending eigenvalues and matching eigenvectors of a symmetric matrix.
/// LAPACK divide and conquer (dsyevd) when built with IGH_USE_LAPACKE,
/// Eigen's QR-based solver otherwise.
inline void symmetric_eigen(const Matrix& K, Vector& values, Matrix& vectors) {
#if defined(IGH_USE_LAPACKE)
  const Index m = K.rows();
  vectors = K;
  values.resize(m);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(m), vectors.data(),
                     static_cast<lapack_int>(m), values.data());
  if (info != 0) {
    fail(ErrorKind::contract, "symmetric eigensolver failed (dsyevd info " +
                                  std::to_string(info) + ")");
  }
#else
  Eigen::SelfAdjointEigenSolver<Matrix> solver(K, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::contract, "symmetric eigensolver did not converge");
  }
  values = solver.eigenvalues();
  vectors = solver.eigenvectors();
#endif
}

}  // namespace detail

/// Dense symmetric eigendecomposition of K_AA with the relative cutoff
/// applied through kept_count. Each eigenvector has its largest-magnitude
/// entry made positive.
inline EigenSystem restricted_eigensystem(const Matrix& K, double cutoff_delta) {
  if (!(cutoff_delta >= 0.0 && cutoff_delta < 1.0)) {
    fail(ErrorKind::configuration, "cutoff_delta must lie in [0, 1)");
  }
  if (K.rows() != K.cols()) {
    fail(ErrorKind::contract, "restricted Gram block is not square");
  }
  const Index m = K.rows();
  if (m == 0) fail(ErrorKind::contract, "restricted Gram block is empty");
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(ErrorKind::contract, "restricted Gram block is not symmetric");
  }

  Vector raw;
  Matrix raw_vectors;
  detail::symmetric_eigen(K, raw, raw_vectors);

  // Solver order is ascending; stable descending sort keeps solver order on ties.
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&raw](Index a, Index b) { return raw(a) > raw(b); });

  EigenSystem sys;
  sys.eigenvalues.resize(m);
  sys.eigenvectors.resize(m, m);
  for (Index l = 0; l < m; ++l) {
    const Index src = order[static_cast<std::size_t>(l)];
    sys.eigenvalues(l) = raw(src);
    auto v = sys.eigenvectors.col(l);
    v = raw_vectors.col(src);
    Index peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    if (v(peak) < 0.0) v = -v;
  }

  const double lead = sys.eigenvalues(0);
  if (!(lead > 0.0)) {
    fail(ErrorKind::degenerate_kernel,
         "largest eigenvalue of restricted Gram block is not positive (" +
             std::to_string(lead) + ")");
  }
  const double threshold = cutoff_delta * lead;
  while (sys.kept_count < m && sys.eigenvalues(sys.kept_count) > 0.0 &&
         sys.eigenvalues(sys.kept_count) >= threshold) {
    ++sys.kept_count;
  }
  return sys;
}

inline EigenSystem restricted_eigensystem(const GramBlock& block, double cutoff_delta) {
  if (!block.is_square_block()) {
    fail(ErrorKind::contract, "restricted eigensystem needs row_index == col_index");
  }
  return restricted_eigensystem(block.values, cutoff_delta);
}

}  // namespace igh
