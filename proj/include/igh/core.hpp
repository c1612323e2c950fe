#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igh/dataset.hpp"
#include "igh/error.hpp"
#include "igh/kernel.hpp"
#include "igh/random.hpp"

namespace igh {

struct IghConfig {
  KernelSpec kernel = KernelSpec::auto_bandwidth();
  int iterations = 10;
  double tolerance = 0.0;  // relative-change early exit; 0 disables
  std::uint64_t seed = 0;
  bool shuffle = true;
  IndexList history_columns;  // columns snapshotted into the trace

  void validate() const {
    kernel.validate();
    if (iterations < 1) fail(ErrorKind::configuration, "iterations must be >= 1");
    if (!(tolerance >= 0.0)) fail(ErrorKind::configuration, "tolerance must be >= 0");
  }
};

struct IterationRecord {
  int iteration = 0;
  double relative_change = 0.0;
  double wall_time = 0.0;  // seconds spent in this sweep
  std::uint64_t permutation_seed = 0;
  IndexList column_order;
};

struct ColumnWarning {
  int iteration = 0;
  Index column = 0;
  std::string message;
};

struct IterationTrace {
  std::vector<IterationRecord> per_iteration;
  /// Flagged columns (IghConfig::history_columns) after initialization
  /// (entry 0) and after every completed iteration.
  std::vector<Matrix> imputed_history;
  std::vector<ColumnWarning> warnings;
  double sigma = 0.0;
  double init_wall_time = 0.0;
};

struct IghResult {
  Matrix imputed;
  IterationTrace trace;
};

/// Called with iteration 0 after initialization, then after every sweep.
using IterationObserver = std::function<void(int iteration, const Matrix& working)>;

/// Copies observed entries and draws each missing entry of column j from
/// Normal(mean, unbiased variance) of the observed values of that column.
inline Matrix stochastic_init(const Dataset& data, std::uint64_t seed) {
  Matrix out = data.values;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index j = 0; j < data.cols(); ++j) {
    const Index count = data.mask.col(j).count();
    if (count == 0) {
      fail(ErrorKind::unimputable_column,
           data.column_label(j) + " has no observed entries");
    }
    if (count == data.rows()) continue;
    double mean = 0.0;
    for (Index i = 0; i < data.rows(); ++i) {
      if (data.mask(i, j)) mean += data.values(i, j);
    }
    mean /= static_cast<double>(count);
    double var = 0.0;
    if (count >= 2) {
      for (Index i = 0; i < data.rows(); ++i) {
        if (data.mask(i, j)) {
          const double dev = data.values(i, j) - mean;
          var += dev * dev;
        }
      }
      var /= static_cast<double>(count - 1);
    }
    const double sd = std::sqrt(var);
    for (Index i = 0; i < data.rows(); ++i) {
      if (data.mask(i, j)) continue;
      out(i, j) = sd > 0.0 ? mean + sd * normal(rng) : mean;
    }
  }
  return out;
}

/// Nystrom-extended eigenvectors of the Gram block restricted to A.
struct HarmonicsBasis {
  IndexList sample_rows;     // A
  EigenSystem eigensystem;   // of K_AA
  Matrix extended;           // n x kept_count, column l is Psi_l

  Index kept_count() const noexcept { return eigensystem.kept_count; }

  /// sum_l <f, psi_l>_A Psi_l for f given on A (length |A|).
  Vector extend(const Vector& values_on_a) const {
    return extended * (eigensystem.kept_vectors().transpose() * values_on_a);
  }
};

namespace detail {

inline void check_sample(const IndexList& sample, Index n, Index j, Index d) {
  if (j < 0 || j >= d) {
    fail(ErrorKind::index, "column " + std::to_string(j) + " out of range");
  }
  if (sample.empty()) {
    fail(ErrorKind::unimputable_column,
         "column " + std::to_string(j) + " has no observed rows");
  }
  check_ids(sample, n, "sample row");
}

template <typename Derived>
Vector gather(const Eigen::MatrixBase<Derived>& v, const IndexList& ids) {
  Vector out(static_cast<Index>(ids.size()));
  for (std::size_t a = 0; a < ids.size(); ++a) out(static_cast<Index>(a)) = v(ids[a]);
  return out;
}

/// Builds the harmonics from the n x |A| kernel block K(i, m), m in A.
inline HarmonicsBasis harmonics_from_kernel(const Matrix& rect, const IndexList& sample,
                                            double cutoff_delta) {
  const Index m = static_cast<Index>(sample.size());
  Matrix restricted(m, m);
  for (Index a = 0; a < m; ++a) restricted.row(a) = rect.row(sample[static_cast<std::size_t>(a)]);

  HarmonicsBasis basis;
  basis.sample_rows = sample;
  basis.eigensystem = restricted_eigensystem(restricted, cutoff_delta);
  if (basis.eigensystem.kept_count == 0) {
    throw ConditioningError(basis.eigensystem.eigenvalues(0), cutoff_delta);
  }
  basis.extended = rect * basis.eigensystem.kept_vectors();
  basis.extended *= basis.eigensystem.kept_values().cwiseInverse().asDiagonal();
  return basis;
}

/// Same values as harmonics_from_kernel(...).extend(values_on_a), without
/// forming the n x kept matrix of extended harmonics:
/// K(., A) V diag(1/lambda) V^T f.
inline Vector extend_from_kernel(const Matrix& rect, const IndexList& sample,
                                 double cutoff_delta, const Vector& values_on_a) {
  const Index m = static_cast<Index>(sample.size());
  Matrix restricted(m, m);
  for (Index a = 0; a < m; ++a) restricted.row(a) = rect.row(sample[static_cast<std::size_t>(a)]);
  const EigenSystem sys = restricted_eigensystem(restricted, cutoff_delta);
  if (sys.kept_count == 0) throw ConditioningError(sys.eigenvalues(0), cutoff_delta);
  const Vector coeff = (sys.kept_vectors().transpose() * values_on_a).cwiseQuotient(sys.kept_values());
  const Vector weights = sys.kept_vectors() * coeff;
  return rect * weights;
}

inline Matrix without_column(const Matrix& working, Index j) {
  Matrix reduced(working.rows(), working.cols() - 1);
  reduced.leftCols(j) = working.leftCols(j);
  reduced.rightCols(working.cols() - j - 1) = working.rightCols(working.cols() - j - 1);
  return reduced;
}

}  // namespace detail

/// Geometric harmonics for column j: the Gram matrix is built on the working
/// matrix with column j removed, restricted to the rows in `sample`.
inline HarmonicsBasis geometric_harmonics(const Matrix& working, Index j,
                                          const IndexList& sample, const KernelSpec& spec) {
  detail::check_sample(sample, working.rows(), j, working.cols());
  if (!working.allFinite()) {
    fail(ErrorKind::contract, "working matrix must be fully populated");
  }
  IndexList all_rows(static_cast<std::size_t>(working.rows()));
  std::iota(all_rows.begin(), all_rows.end(), Index{0});
  const Matrix reduced = detail::without_column(working, j);
  const GramBlock rect = gram_block(reduced, all_rows, sample, spec);
  return detail::harmonics_from_kernel(rect.values, sample, spec.cutoff_delta);
}

/// One column update: the geometric-harmonics extension of column j from
/// its values on `sample` to every row.
inline Vector extend_column(const Matrix& working, Index j, const IndexList& sample,
                            const KernelSpec& spec) {
  const HarmonicsBasis basis = geometric_harmonics(working, j, sample, spec);
  return basis.extend(detail::gather(working.col(j), sample));
}

/// Applies the linear update operator L_j = Psi psi^T (restriction to A) to v.
inline Vector update_operator_apply(const Matrix& working, Index j, const IndexList& sample,
                                    const KernelSpec& spec, const Vector& v) {
  if (v.size() != working.rows()) {
    fail(ErrorKind::dimension, "operator argument length does not match row count");
  }
  const HarmonicsBasis basis = geometric_harmonics(working, j, sample, spec);
  return basis.extend(detail::gather(v, sample));
}

namespace detail {

/// Pairwise squared distances over all columns, kept in sync with the
/// working matrix so a per-column Gram block costs O(n |A|) rather than
/// O(n |A| d).
class SquaredDistances {
 public:
  explicit SquaredDistances(const Matrix& working) { rebuild(working); }

  void rebuild(const Matrix& working) {
    const Index n = working.rows();
    const Matrix rows_as_cols = working.transpose();
    full_.setZero(n, n);
    for (Index b = 0; b < n; ++b) {
      for (Index a = b + 1; a < n; ++a) {
        const double d2 = (rows_as_cols.col(a) - rows_as_cols.col(b)).squaredNorm();
        full_(a, b) = d2;
        full_(b, a) = d2;
      }
    }
  }

  /// Kernel block over all rows x sample, with column j excluded.
  Matrix kernel_without(const Matrix& working, Index j, const IndexList& sample,
                        double sigma) const {
    const Index n = working.rows();
    Matrix rect(n, static_cast<Index>(sample.size()));
    const auto col = working.col(j);
    for (std::size_t b = 0; b < sample.size(); ++b) {
      const Index m = sample[b];
      for (Index i = 0; i < n; ++i) {
        const double diff = col(i) - col(m);
        const double d2 = std::max(0.0, full_(i, m) - diff * diff);
        rect(i, static_cast<Index>(b)) = gaussian_kernel(d2, sigma);
      }
    }
    return rect;
  }

  /// Accounts for column j changing from `before` to `after`.
  void update_column(const Vector& before, const Vector& after) {
    const Index n = full_.rows();
    for (Index b = 0; b < n; ++b) {
      for (Index a = b + 1; a < n; ++a) {
        const double old_diff = before(a) - before(b);
        const double new_diff = after(a) - after(b);
        const double delta = new_diff * new_diff - old_diff * old_diff;
        if (delta == 0.0) continue;
        const double d2 = std::max(0.0, full_(a, b) + delta);
        full_(a, b) = d2;
        full_(b, a) = d2;
      }
    }
  }

 private:
  Matrix full_;
};

inline double missing_norm(const Matrix& m, const Mask& mask) {
  double acc = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (!mask(i, j)) acc += m(i, j) * m(i, j);
    }
  }
  return std::sqrt(acc);
}

inline Matrix snapshot(const Matrix& working, const IndexList& columns) {
  Matrix out(working.rows(), static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.col(static_cast<Index>(k)) = working.col(columns[k]);
  }
  return out;
}

}  // namespace detail

/// Runs iterated geometric harmonics on `data`.
///
/// The working matrix starts from stochastic_init. Every iteration sweeps
/// the columns (in a fresh random order when config.shuffle is set), and
/// each column update sees the imputations already made earlier in the same
/// sweep. Only missing slots are ever written.
inline IghResult igh_run(const Dataset& data, const IghConfig& config,
                         const IterationObserver& observer = {}) {
  using clock = std::chrono::steady_clock;
  config.validate();
  validate(data);
  detail::check_ids(config.history_columns, data.cols(), "history column");

  IghResult result;
  IterationTrace& trace = result.trace;
  const auto init_start = clock::now();

  Matrix working = stochastic_init(data, derive_seed(config.seed, "init"));
  const Index n = data.rows();
  const Index d = data.cols();

  std::vector<IndexList> samples(static_cast<std::size_t>(d));
  std::vector<Index> incomplete;
  for (Index j = 0; j < d; ++j) {
    samples[static_cast<std::size_t>(j)] = data.observed_rows(j);
    if (static_cast<Index>(samples[static_cast<std::size_t>(j)].size()) < n) {
      incomplete.push_back(j);
    }
  }

  KernelSpec spec = config.kernel;
  if (!incomplete.empty()) {
    spec = resolve(working, spec);
    trace.sigma = *spec.sigma;
  } else if (spec.sigma) {
    trace.sigma = *spec.sigma;
  }
  trace.init_wall_time = std::chrono::duration<double>(clock::now() - init_start).count();

  if (!config.history_columns.empty()) {
    trace.imputed_history.push_back(detail::snapshot(working, config.history_columns));
  }
  if (observer) observer(0, working);

  std::optional<detail::SquaredDistances> distances;
  for (int t = 1; t <= config.iterations; ++t) {
    const auto sweep_start = clock::now();
    IterationRecord record;
    record.iteration = t;
    record.permutation_seed = derive_seed(config.seed, "permutation", static_cast<std::uint64_t>(t));
    record.column_order.resize(static_cast<std::size_t>(d));
    std::iota(record.column_order.begin(), record.column_order.end(), Index{0});
    if (config.shuffle) {
      Rng rng(record.permutation_seed);
      std::shuffle(record.column_order.begin(), record.column_order.end(), rng);
    }

    const Matrix previous = working;
    if (!incomplete.empty()) {
      if (distances) {
        distances->rebuild(working);
      } else {
        distances.emplace(working);
      }
    }

    for (Index j : record.column_order) {
      const IndexList& sample = samples[static_cast<std::size_t>(j)];
      if (static_cast<Index>(sample.size()) == n) continue;
      try {
        const Matrix rect = distances->kernel_without(working, j, sample, *spec.sigma);
        const Vector estimate = detail::extend_from_kernel(
            rect, sample, spec.cutoff_delta, detail::gather(data.values.col(j), sample));

        const Vector before = working.col(j);
        for (Index i = 0; i < n; ++i) {
          if (!data.mask(i, j)) working(i, j) = estimate(i);
        }
        distances->update_column(before, working.col(j));
      } catch (const ConditioningError& e) {
        trace.warnings.push_back({t, j, data.column_label(j) + ": " + e.what()});
      } catch (const Error& e) {
        throw Error(e.kind(), "iteration " + std::to_string(t) + ", " +
                                  data.column_label(j) + ": " + e.what());
      }
    }

    const double change = detail::missing_norm(working - previous, data.mask);
    const double base = std::max(1.0, detail::missing_norm(previous, data.mask));
    record.relative_change = change / base;
    record.wall_time = std::chrono::duration<double>(clock::now() - sweep_start).count();
    trace.per_iteration.push_back(record);

    if (!config.history_columns.empty()) {
      trace.imputed_history.push_back(detail::snapshot(working, config.history_columns));
    }
    if (observer) observer(t, working);

    if (config.tolerance > 0.0 && record.relative_change < config.tolerance) break;
  }

  result.imputed = std::move(working);
  return result;
}

}  // namespace igh
