#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igh/error.hpp"

namespace igh {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using IndexList = std::vector<Index>;

/// Value stored in missing slots. Never read as data.
inline constexpr double missing_value = std::numeric_limits<double>::quiet_NaN();

/// An n x d value matrix with its observation mask (true = observed).
struct Dataset {
  Matrix values;
  Mask mask;
  std::vector<std::string> column_names;

  Dataset() = default;
  Dataset(Matrix v, Mask m, std::vector<std::string> names = {})
      : values(std::move(v)), mask(std::move(m)), column_names(std::move(names)) {
    if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
      fail(ErrorKind::dimension, "mask shape does not match value shape");
    }
    if (!column_names.empty() &&
        static_cast<Index>(column_names.size()) != values.cols()) {
      fail(ErrorKind::dimension, "column name count does not match column count");
    }
    for (Index j = 0; j < values.cols(); ++j) {
      for (Index i = 0; i < values.rows(); ++i) {
        if (!mask(i, j)) values(i, j) = missing_value;
      }
    }
  }

  /// Fully observed dataset.
  static Dataset complete(Matrix v) {
    Mask m = Mask::Constant(v.rows(), v.cols(), true);
    return Dataset(std::move(v), std::move(m));
  }

  Index rows() const noexcept { return values.rows(); }
  Index cols() const noexcept { return values.cols(); }
  bool observed(Index i, Index j) const { return mask(i, j); }

  Index missing_count() const { return mask.size() - mask.count(); }

  /// Rows where column j is observed (the set A_j), ascending.
  IndexList observed_rows(Index j) const {
    IndexList out;
    out.reserve(static_cast<std::size_t>(rows()));
    for (Index i = 0; i < rows(); ++i) {
      if (mask(i, j)) out.push_back(i);
    }
    return out;
  }

  IndexList missing_rows(Index j) const {
    IndexList out;
    for (Index i = 0; i < rows(); ++i) {
      if (!mask(i, j)) out.push_back(i);
    }
    return out;
  }

  std::string column_label(Index j) const {
    if (j >= 0 && static_cast<std::size_t>(j) < column_names.size() &&
        !column_names[static_cast<std::size_t>(j)].empty()) {
      return column_names[static_cast<std::size_t>(j)];
    }
    return "column " + std::to_string(j);
  }
};

/// Rows and columns without a single observed entry.
struct InvariantReport {
  IndexList empty_rows;
  IndexList empty_cols;

  bool ok() const noexcept { return empty_rows.empty() && empty_cols.empty(); }

  std::string describe() const {
    std::ostringstream os;
    auto list = [&os](const char* what, const IndexList& ids) {
      os << ids.size() << ' ' << what;
      if (!ids.empty()) {
        os << " [";
        const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
        for (std::size_t k = 0; k < shown; ++k) os << (k ? "," : "") << ids[k];
        if (shown < ids.size()) os << ",...";
        os << ']';
      }
    };
    os << "fully missing: ";
    list("rows", empty_rows);
    os << ", ";
    list("columns", empty_cols);
    return os.str();
  }
};

inline InvariantReport check_invariants(const Dataset& data) {
  InvariantReport report;
  for (Index i = 0; i < data.rows(); ++i) {
    if (!data.mask.row(i).any()) report.empty_rows.push_back(i);
  }
  for (Index j = 0; j < data.cols(); ++j) {
    if (!data.mask.col(j).any()) report.empty_cols.push_back(j);
  }
  return report;
}

inline void validate(const Dataset& data) {
  const InvariantReport report = check_invariants(data);
  if (!report.ok()) fail(ErrorKind::data_invariant, report.describe());
}

}  // namespace igh
