#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "igh/dataset.hpp"
#include "igh/error.hpp"
#include "igh/random.hpp"

namespace igh {

/// Arc length of the unit Archimedean spiral r = t from 0 to t.
inline double arc_length(double t) {
  if (!(t >= 0.0)) fail(ErrorKind::domain, "arc_length needs t >= 0");
  return 0.5 * (t * std::sqrt(1.0 + t * t) + std::asinh(t));
}

/// Parameter t with |arc_length(t) - s| <= tol. Safeguarded Newton.
inline double arc_length_invert(double s, double tol = 1e-12) {
  if (!(s >= 0.0)) fail(ErrorKind::domain, "arc_length_invert needs s >= 0");
  if (s == 0.0) return 0.0;
  // arc_length(t) >= t^2 / 2 and >= t, so the root lies below min(s, sqrt(2 s)) + 1.
  double lo = 0.0;
  double hi = std::min(s, std::sqrt(2.0 * s)) + 1.0;
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double residual = arc_length(t) - s;
    if (std::abs(residual) <= tol) return t;
    if (residual > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    double next = t - residual / std::sqrt(1.0 + t * t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  return t;
}

/// Stacked-spiral swiss roll embedded in a higher-dimensional space.
struct SwissRollSpec {
  int points_per_spiral = 50;
  int spirals = 5;
  double spread = 1.0;        // scale of r = spread * t
  double height_gap = 1.0;
  int ambient_dim = 30;
  int rotations = 300;        // random coordinate-plane rotations
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
  double t_start = std::numbers::pi;
  double t_end = 6.0 * std::numbers::pi;  // 2.5 turns after t_start

  int total_points() const noexcept { return points_per_spiral * spirals; }

  void validate() const {
    if (points_per_spiral < 1) fail(ErrorKind::configuration, "points_per_spiral must be >= 1");
    if (spirals < 1) fail(ErrorKind::configuration, "spirals must be >= 1");
    if (!(spread > 0.0)) fail(ErrorKind::configuration, "spread must be > 0");
    if (!(height_gap > 0.0)) fail(ErrorKind::configuration, "height_gap must be > 0");
    if (ambient_dim < 3) fail(ErrorKind::configuration, "ambient_dim must be >= 3");
    if (rotations < 0) fail(ErrorKind::configuration, "rotations must be >= 0");
    if (!(noise_sigma >= 0.0)) fail(ErrorKind::configuration, "noise_sigma must be >= 0");
    if (!(t_start >= 0.0 && t_end > t_start)) {
      fail(ErrorKind::configuration, "need 0 <= t_start < t_end");
    }
  }
};

struct SwissRoll {
  Dataset data;       // fully observed
  Matrix truth;       // copy of data.values
  Vector parameter;   // spiral parameter t of each row
};

inline SwissRoll make_swiss_roll(const SwissRollSpec& spec) {
  spec.validate();
  const Index n = spec.total_points();
  const Index dim = spec.ambient_dim;

  // Equal arc-length spacing along one spiral.
  Vector ts(spec.points_per_spiral);
  const double s0 = arc_length(spec.t_start);
  const double s1 = arc_length(spec.t_end);
  for (int k = 0; k < spec.points_per_spiral; ++k) {
    const double frac = spec.points_per_spiral == 1
                            ? 0.0
                            : static_cast<double>(k) / (spec.points_per_spiral - 1);
    ts(k) = arc_length_invert(s0 + frac * (s1 - s0));
  }

  Matrix X = Matrix::Zero(n, dim);
  Vector parameter(n);
  for (int h = 0; h < spec.spirals; ++h) {
    for (int k = 0; k < spec.points_per_spiral; ++k) {
      const Index row = static_cast<Index>(h) * spec.points_per_spiral + k;
      const double t = ts(k);
      X(row, 0) = spec.spread * t * std::cos(t);
      X(row, 1) = spec.spread * t * std::sin(t);
      X(row, 2) = h * spec.height_gap;
      parameter(row) = t;
    }
  }

  Rng rotation_rng(derive_seed(spec.seed, "rotation"));
  std::uniform_int_distribution<Index> first_axis(0, dim - 1);
  std::uniform_int_distribution<Index> second_axis(0, dim - 2);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int r = 0; r < spec.rotations; ++r) {
    const Index i = first_axis(rotation_rng);
    Index k = second_axis(rotation_rng);
    if (k >= i) ++k;
    const double theta = angle(rotation_rng);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Vector xi = X.col(i);
    const Vector xk = X.col(k);
    X.col(i) = c * xi - s * xk;
    X.col(k) = s * xi + c * xk;
  }

  if (spec.noise_sigma > 0.0) {
    Rng noise_rng(derive_seed(spec.seed, "noise"));
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (Index j = 0; j < dim; ++j) {
      for (Index i = 0; i < n; ++i) X(i, j) += noise(noise_rng);
    }
  }

  SwissRoll roll;
  roll.truth = X;
  roll.data = Dataset::complete(std::move(X));
  roll.parameter = std::move(parameter);
  return roll;
}

struct Annihilation {
  Dataset data;
  InvariantReport report;  // fully missing rows / columns, if any
};

/// Deletes each observed entry independently with probability p.
/// Degenerate outcomes are reported, never re-drawn.
inline Annihilation annihilate(const Dataset& data, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorKind::domain, "annihilation probability must lie in [0, 1]");
  }
  Rng rng(derive_seed(seed, "annihilate"));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Mask mask = data.mask;
  for (Index j = 0; j < data.cols(); ++j) {
    for (Index i = 0; i < data.rows(); ++i) {
      const double u = uniform(rng);
      if (mask(i, j) && u < p) mask(i, j) = false;
    }
  }
  Annihilation out;
  out.data = Dataset(data.values, std::move(mask), data.column_names);
  out.report = check_invariants(out.data);
  return out;
}

}  // namespace igh
