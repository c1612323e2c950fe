#pragma once

// Reference implementations used only by tests. Plain std::vector storage
// and a hand-written Jacobi eigensolver keep these independent of Eigen and
// of the library's fast paths.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0)); }

struct Eigenpairs {
  Vec values;  // descending
  Mat vectors; // vectors[l] is the l-th unit eigenvector
};

/// Cyclic Jacobi rotations on a symmetric matrix.
inline Eigenpairs jacobi_eigen(Mat a) {
  const std::size_t m = a.size();
  Mat v = zeros(m, m);
  for (std::size_t i = 0; i < m; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = 0; q < m; ++q) {
        total += a[p][q] * a[p][q];
        if (p != q) off += a[p][q] * a[p][q];
      }
    }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] > a[y][y]; });
  Eigenpairs out;
  for (std::size_t idx : order) {
    out.values.push_back(a[idx][idx]);
    Vec col(m);
    for (std::size_t k = 0; k < m; ++k) col[k] = v[k][idx];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

inline double gaussian(const Vec& x, const Vec& y, double sigma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d2 += (x[k] - y[k]) * (x[k] - y[k]);
  return std::exp(-0.5 * d2 / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double median_pairwise_distance(const Mat& x) {
  Vec d;
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = a + 1; b < x.size(); ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < x[a].size(); ++k) s += (x[a][k] - x[b][k]) * (x[a][k] - x[b][k]);
      d.push_back(std::sqrt(s));
    }
  }
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

/// Row i of the working matrix with column j deleted.
inline Vec drop(const Vec& row, std::size_t j) {
  Vec out;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k != j) out.push_back(row[k]);
  }
  return out;
}

/// Term-by-term geometric harmonics for column j: returns Psi (n x kept)
/// and psi (|A| x kept) so callers can assemble either the extension or
/// the dense update operator.
struct Harmonics {
  Mat big_psi;    // [i][l]
  Mat small_psi;  // [a][l]
  Vec lambda;
};

inline Harmonics harmonics(const Mat& working, std::size_t j, const std::vector<std::size_t>& A,
                           double sigma, double cutoff) {
  const std::size_t n = working.size();
  Mat k_rect = zeros(n, A.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < A.size(); ++b) {
      k_rect[i][b] = gaussian(drop(working[i], j), drop(working[A[b]], j), sigma);
    }
  }
  Mat k_aa = zeros(A.size(), A.size());
  for (std::size_t a = 0; a < A.size(); ++a) k_aa[a] = k_rect[A[a]];
  const Eigenpairs eig = jacobi_eigen(k_aa);

  Harmonics h;
  const double lead = eig.values[0];
  for (std::size_t l = 0; l < eig.values.size(); ++l) {
    const double lam = eig.values[l];
    if (!(lam > 0.0) || lam < cutoff * lead) continue;
    h.lambda.push_back(lam);
  }
  const std::size_t kept = h.lambda.size();
  h.big_psi = zeros(n, kept);
  h.small_psi = zeros(A.size(), kept);
  for (std::size_t l = 0; l < kept; ++l) {
    for (std::size_t a = 0; a < A.size(); ++a) h.small_psi[a][l] = eig.vectors[l][a];
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t b = 0; b < A.size(); ++b) s += k_rect[i][b] * eig.vectors[l][b];
      h.big_psi[i][l] = s / h.lambda[l];
    }
  }
  return h;
}

/// hat g_j(i) = sum_l <g_j, psi_l>_A Psi_l(i), summed term by term.
inline Vec extend(const Mat& working, std::size_t j, const std::vector<std::size_t>& A,
                  double sigma, double cutoff) {
  const Harmonics h = harmonics(working, j, A, sigma, cutoff);
  Vec out(working.size(), 0.0);
  for (std::size_t l = 0; l < h.lambda.size(); ++l) {
    double coeff = 0.0;
    for (std::size_t a = 0; a < A.size(); ++a) coeff += working[A[a]][j] * h.small_psi[a][l];
    for (std::size_t i = 0; i < working.size(); ++i) out[i] += coeff * h.big_psi[i][l];
  }
  return out;
}

/// Dense n x n update operator: L(i, m) = sum_l Psi_l(i) psi_l(m) for m in A, 0 otherwise.
inline Mat update_operator(const Mat& working, std::size_t j, const std::vector<std::size_t>& A,
                           double sigma, double cutoff) {
  const Harmonics h = harmonics(working, j, A, sigma, cutoff);
  const std::size_t n = working.size();
  Mat L = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < A.size(); ++a) {
      double s = 0.0;
      for (std::size_t l = 0; l < h.lambda.size(); ++l) s += h.big_psi[i][l] * h.small_psi[a][l];
      L[i][A[a]] = s;
    }
  }
  return L;
}

/// Unshuffled sweeps over columns 0..d-1, writing only missing slots.
/// Returns the working matrix after every iteration.
inline std::vector<Mat> igh(const Mat& init, const std::vector<std::vector<bool>>& observed,
                            double sigma, double cutoff, int iterations) {
  Mat working = init;
  const std::size_t n = working.size();
  const std::size_t d = n ? working[0].size() : 0;
  std::vector<Mat> iterates;
  for (int t = 0; t < iterations; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<std::size_t> A;
      for (std::size_t i = 0; i < n; ++i) {
        if (observed[i][j]) A.push_back(i);
      }
      if (A.size() == n) continue;
      const Vec g = extend(working, j, A, sigma, cutoff);
      for (std::size_t i = 0; i < n; ++i) {
        if (!observed[i][j]) working[i][j] = g[i];
      }
    }
    iterates.push_back(working);
  }
  return iterates;
}

/// Composite Simpson rule.
template <typename F>
double simpson(F f, double a, double b, int intervals = 20000) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle
