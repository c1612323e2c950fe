#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace igh {

/// Failure categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
  dimension,          // mismatched vector / matrix shapes
  configuration,      // invalid or unresolved parameters
  index,              // row / column id out of range
  contract,           // precondition on numeric input violated
  domain,             // argument outside its mathematical domain
  insufficient_data,  // too few rows to do anything
  degenerate_data,    // e.g. all rows identical
  degenerate_kernel,  // restricted Gram block has no positive eigenvalue
  unimputable_column, // column with no observed entry
  conditioning,       // every eigenpair discarded by the cutoff
  data_invariant,     // fully missing row / column in a Dataset
  format,             // malformed file content
  io,                 // file system failure
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::index: return "index";
    case ErrorKind::contract: return "contract";
    case ErrorKind::domain: return "domain";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::degenerate_data: return "degenerate-data";
    case ErrorKind::degenerate_kernel: return "degenerate-kernel";
    case ErrorKind::unimputable_column: return "unimputable-column";
    case ErrorKind::conditioning: return "conditioning";
    case ErrorKind::data_invariant: return "data-invariant";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when the relative eigenvalue cutoff leaves no usable eigenpair.
class ConditioningError : public Error {
 public:
  ConditioningError(double largest_eigenvalue, double cutoff_delta)
      : Error(ErrorKind::conditioning,
              "all eigenpairs discarded (lambda_1 = " +
                  std::to_string(largest_eigenvalue) +
                  ", cutoff = " + std::to_string(cutoff_delta) + ")"),
        largest_eigenvalue_(largest_eigenvalue),
        cutoff_delta_(cutoff_delta) {}

  double largest_eigenvalue() const noexcept { return largest_eigenvalue_; }
  double cutoff_delta() const noexcept { return cutoff_delta_; }

 private:
  double largest_eigenvalue_;
  double cutoff_delta_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace igh
