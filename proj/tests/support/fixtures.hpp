#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "igh/dataset.hpp"
#include "oracle/brute_force.hpp"

namespace fixtures {

using igh::Dataset;
using igh::Index;
using igh::Mask;
using igh::Matrix;

/// Uniform values in [-1, 1] with each entry missing with probability p,
/// re-drawn until no row or column is empty.
inline Dataset random_dataset(Index n, Index d, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix v(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) v(i, j) = value(rng);
  }
  for (;;) {
    Mask m(n, d);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) m(i, j) = u(rng) >= p;
    }
    Dataset data(v, m);
    if (igh::check_invariants(data).ok()) return data;
  }
}

/// Dataset with exactly the listed (row, col) cells missing.
inline Dataset with_holes(const Matrix& v, const std::vector<std::pair<Index, Index>>& holes) {
  Mask m = Mask::Constant(v.rows(), v.cols(), true);
  for (auto [i, j] : holes) m(i, j) = false;
  return Dataset(v, m);
}

inline oracle::Mat to_rows(const Matrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

inline std::vector<std::vector<bool>> to_rows(const Mask& m) {
  std::vector<std::vector<bool>> out(static_cast<std::size_t>(m.rows()),
                                     std::vector<bool>(static_cast<std::size_t>(m.cols())));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

/// Smooth drifting blob on a width x height grid, one frame per row,
/// values inside [0.1, 0.9].
inline Matrix moving_pattern(int frames, int width, int height) {
  Matrix X(frames, static_cast<Index>(width) * height);
  for (int f = 0; f < frames; ++f) {
    const double cx = 30.0 + 0.2 * f;
    const double cy = 50.0 + 0.1 * f;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        X(f, static_cast<Index>(y) * width + x) =
            0.5 + 0.4 * std::exp(-r2 / 400.0) * std::cos(0.1 * x + 0.05 * f);
      }
    }
  }
  return X;
}

}  // namespace fixtures
