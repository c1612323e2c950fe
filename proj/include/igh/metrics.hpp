#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igh/dataset.hpp"
#include "igh/error.hpp"
#include "igh/kernel.hpp"

namespace igh {

/// Discrepancy between ground truth and an imputed matrix, scaled by
/// 1/sqrt(column count).
inline double l2_error(const Matrix& original, const Matrix& imputed) {
  if (original.rows() != imputed.rows() || original.cols() != imputed.cols()) {
    fail(ErrorKind::dimension, "l2_error: matrices differ in shape");
  }
  if (original.cols() == 0) return 0.0;
  return (original - imputed).norm() / std::sqrt(static_cast<double>(original.cols()));
}

/// Per-iteration L2 errors of independent trials at one annihilation rate.
struct TrialEnsemble {
  Matrix errors_by_iteration;  // trials x iterations
  double p = 0.0;
  std::string config_digest;
};

struct IterationStats {
  double mean = 0.0;
  std::optional<double> std_dev;  // absent with fewer than 2 trials
};

/// Column-wise mean and unbiased standard deviation across trials.
inline std::vector<IterationStats> ensemble_stats(const TrialEnsemble& ensemble) {
  const Matrix& e = ensemble.errors_by_iteration;
  const Index trials = e.rows();
  if (trials < 1) fail(ErrorKind::insufficient_data, "ensemble has no trials");
  std::vector<IterationStats> out(static_cast<std::size_t>(e.cols()));
  for (Index t = 0; t < e.cols(); ++t) {
    IterationStats& s = out[static_cast<std::size_t>(t)];
    s.mean = e.col(t).mean();
    if (trials >= 2) {
      const double ss = (e.col(t).array() - s.mean).square().sum();
      s.std_dev = std::sqrt(ss / static_cast<double>(trials - 1));
    }
  }
  return out;
}

/// Half the weighted squared differences summed over ordered pairs (i, k)
/// with at least one endpoint outside `inside`, i.e. the Dirichlet energy of
/// every edge touching the complement of A.
inline double graph_energy(const Vector& f, const Matrix& W, const IndexList& inside) {
  const Index n = f.size();
  if (W.rows() != n || W.cols() != n) {
    fail(ErrorKind::dimension, "graph_energy: weight matrix does not match vector length");
  }
  std::vector<char> in_a(static_cast<std::size_t>(n), 0);
  for (Index i : inside) {
    if (i < 0 || i >= n) fail(ErrorKind::index, "graph_energy: id out of range");
    in_a[static_cast<std::size_t>(i)] = 1;
  }
  double energy = 0.0;
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < n; ++i) {
      if (in_a[static_cast<std::size_t>(i)] && in_a[static_cast<std::size_t>(k)]) continue;
      const double diff = f(i) - f(k);
      energy += W(i, k) * diff * diff;
    }
  }
  return 0.5 * energy;
}

inline double graph_energy(const Vector& f, const GramBlock& W, const IndexList& inside) {
  if (!W.is_square_block()) fail(ErrorKind::contract, "graph_energy needs a square Gram block");
  return graph_energy(f, W.values, inside);
}

/// ||f||_{L2(A)} + graph energy on the complement of A.
inline double mixed_norm(const Vector& f, const Matrix& W, const IndexList& inside) {
  const double energy = graph_energy(f, W, inside);
  double l2 = 0.0;
  for (Index i : inside) l2 += f(i) * f(i);
  return std::sqrt(l2) + energy;
}

inline double mixed_norm(const Vector& f, const GramBlock& W, const IndexList& inside) {
  if (!W.is_square_block()) fail(ErrorKind::contract, "mixed_norm needs a square Gram block");
  return mixed_norm(f, W.values, inside);
}

}  // namespace igh
