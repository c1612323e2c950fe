#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "igh/core.hpp"
#include "igh/dataio.hpp"
#include "igh/datagen.hpp"
#include "igh/metrics.hpp"
#include "igh/random.hpp"
#include "igh/svg_plot.hpp"

namespace igh {

enum class SweepVariable { annihilation_rate, record_count, sparsity_stride };

inline std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::annihilation_rate: return "annihilation_rate";
    case SweepVariable::record_count: return "record_count";
    case SweepVariable::sparsity_stride: return "sparsity_stride";
  }
  return "unknown";
}

/// A damage -> impute -> evaluate sweep.
///
/// annihilation_rate sweeps p_values; record_count and sparsity_stride use
/// p_values.front() and sweep record_counts (leading rows of the truth) or
/// strides (every stride-th row, `window` rows per run).
struct ExperimentPlan {
  std::vector<double> p_values{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  int trials = 5;
  int iterations = 10;
  std::uint64_t base_seed = 0;
  SweepVariable sweep_variable = SweepVariable::annihilation_rate;
  std::vector<int> record_counts;
  std::vector<int> strides;
  int window = 8;
  KernelSpec kernel = KernelSpec::auto_bandwidth();
  bool shuffle = true;
  double tolerance = 0.0;
  int retry_limit = 10;
  unsigned threads = 1;

  void validate(Index truth_rows) const {
    if (p_values.empty()) fail(ErrorKind::configuration, "plan needs at least one p value");
    for (double p : p_values) {
      if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::configuration, "p values must lie in [0, 1]");
    }
    if (trials < 1) fail(ErrorKind::configuration, "trials must be >= 1");
    if (iterations < 1) fail(ErrorKind::configuration, "iterations must be >= 1");
    if (retry_limit < 0) fail(ErrorKind::configuration, "retry limit must be >= 0");
    kernel.validate();
    if (sweep_variable == SweepVariable::record_count) {
      if (record_counts.empty()) fail(ErrorKind::configuration, "record_count sweep needs counts");
      for (int n : record_counts) {
        if (n < 2 || n > truth_rows) {
          fail(ErrorKind::configuration, "record count " + std::to_string(n) +
                                             " outside [2, " + std::to_string(truth_rows) + "]");
        }
      }
    }
    if (sweep_variable == SweepVariable::sparsity_stride) {
      if (strides.empty()) fail(ErrorKind::configuration, "sparsity sweep needs strides");
      if (window < 2) fail(ErrorKind::configuration, "window must be >= 2");
      for (int s : strides) {
        if (s < 1 || static_cast<Index>(window - 1) * s >= truth_rows) {
          fail(ErrorKind::configuration, "stride " + std::to_string(s) + " with window " +
                                             std::to_string(window) + " exceeds the data");
        }
      }
    }
  }

  std::vector<double> sweep_values() const {
    switch (sweep_variable) {
      case SweepVariable::annihilation_rate: return p_values;
      case SweepVariable::record_count: return {record_counts.begin(), record_counts.end()};
      case SweepVariable::sparsity_stride: return {strides.begin(), strides.end()};
    }
    return {};
  }

  std::string describe() const {
    std::ostringstream os;
    os << "sweep=" << to_string(sweep_variable) << " p=";
    for (std::size_t k = 0; k < p_values.size(); ++k) os << (k ? ";" : "") << format_real(p_values[k]);
    os << " trials=" << trials << " iterations=" << iterations << " base_seed=" << base_seed;
    if (sweep_variable == SweepVariable::record_count) {
      os << " record_counts=";
      for (std::size_t k = 0; k < record_counts.size(); ++k) os << (k ? ";" : "") << record_counts[k];
    }
    if (sweep_variable == SweepVariable::sparsity_stride) {
      os << " strides=";
      for (std::size_t k = 0; k < strides.size(); ++k) os << (k ? ";" : "") << strides[k];
      os << " window=" << window;
    }
    os << " sigma=" << (kernel.sigma ? format_real(*kernel.sigma) : std::string("median"))
       << " cutoff=" << format_real(kernel.cutoff_delta) << " shuffle=" << (shuffle ? 1 : 0)
       << " tolerance=" << format_real(tolerance) << " retry_limit=" << retry_limit;
    return os.str();
  }
};

struct ExperimentCell {
  double sweep_value = 0.0;
  double p = 0.0;
  int trial = 0;
  bool ok = false;
  std::string failure;
  std::vector<double> errors;   // l2_error after iteration 0 (init), 1, 2, ...
  std::vector<double> elapsed;  // cumulative seconds at each recorded iteration
  std::vector<double> relative_change;  // per sweep, from the trace
  double wall_time = 0.0;
  int damage_retries = 0;
};

struct ExperimentResult {
  ExperimentPlan plan;
  std::vector<double> sweep_values;
  std::vector<ExperimentCell> cells;  // ordered by (sweep index, trial)
  std::string digest;

  /// Successful trials at one sweep value. Trials stopped early are padded
  /// with their last error.
  TrialEnsemble ensemble(std::size_t sweep_index) const {
    std::vector<const ExperimentCell*> good;
    for (const auto& c : cells) {
      if (c.ok && c.sweep_value == sweep_values[sweep_index]) good.push_back(&c);
    }
    TrialEnsemble e;
    e.p = plan.sweep_variable == SweepVariable::annihilation_rate ? sweep_values[sweep_index]
                                                                  : plan.p_values.front();
    e.config_digest = digest;
    e.errors_by_iteration.resize(static_cast<Index>(good.size()), plan.iterations + 1);
    for (std::size_t r = 0; r < good.size(); ++r) {
      const auto& errs = good[r]->errors;
      for (int t = 0; t <= plan.iterations; ++t) {
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), errs.size() - 1);
        e.errors_by_iteration(static_cast<Index>(r), t) = errs[k];
      }
    }
    return e;
  }
};

namespace detail {

inline Matrix select_rows(const Matrix& m, const IndexList& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t matrix_digest(const Matrix& m) {
  std::uint64_t h = fnv1a(std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  return fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()),
                                static_cast<std::size_t>(m.size()) * sizeof(double)),
               h);
}

inline ExperimentCell run_cell(const Matrix& truth, const ExperimentPlan& plan,
                               std::size_t sweep_index, double sweep_value, int trial) {
  using clock = std::chrono::steady_clock;
  ExperimentCell cell;
  cell.sweep_value = sweep_value;
  cell.trial = trial;
  cell.p = plan.sweep_variable == SweepVariable::annihilation_rate ? sweep_value
                                                                   : plan.p_values.front();

  IndexList rows;
  if (plan.sweep_variable == SweepVariable::record_count) {
    for (Index i = 0; i < static_cast<Index>(sweep_value); ++i) rows.push_back(i);
  } else if (plan.sweep_variable == SweepVariable::sparsity_stride) {
    for (int k = 0; k < plan.window; ++k) rows.push_back(static_cast<Index>(k) * static_cast<Index>(sweep_value));
  } else {
    for (Index i = 0; i < truth.rows(); ++i) rows.push_back(i);
  }
  const Matrix local_truth = select_rows(truth, rows);
  const Dataset complete = Dataset::complete(local_truth);

  const std::uint64_t cell_key = static_cast<std::uint64_t>(sweep_index) * 1000003ULL +
                                 static_cast<std::uint64_t>(trial);
  std::uint64_t damage_seed = derive_seed(plan.base_seed, "damage", cell_key);
  try {
    Annihilation damaged = annihilate(complete, cell.p, damage_seed);
    while (!damaged.report.ok()) {
      if (cell.damage_retries >= plan.retry_limit) {
        fail(ErrorKind::data_invariant,
             "annihilation left degenerate data after " + std::to_string(cell.damage_retries) +
                 " retries: " + damaged.report.describe());
      }
      ++cell.damage_retries;
      damaged = annihilate(complete, cell.p, ++damage_seed);
    }

    IghConfig config;
    config.kernel = plan.kernel;
    config.iterations = plan.iterations;
    config.tolerance = plan.tolerance;
    config.shuffle = plan.shuffle;
    config.seed = derive_seed(plan.base_seed, "impute", cell_key);

    const auto start = clock::now();
    const IghResult result = igh_run(damaged.data, config, [&](int, const Matrix& working) {
      cell.errors.push_back(l2_error(local_truth, working));
      cell.elapsed.push_back(std::chrono::duration<double>(clock::now() - start).count());
    });
    cell.wall_time = std::chrono::duration<double>(clock::now() - start).count();
    for (const auto& r : result.trace.per_iteration) cell.relative_change.push_back(r.relative_change);
    cell.ok = true;
  } catch (const Error& e) {
    cell.ok = false;
    cell.failure = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return cell;
}

}  // namespace detail

/// Runs every (sweep value, trial) cell. Cells are independent and may run
/// on several threads; results are ordered by plan index regardless.
inline ExperimentResult run_experiment(const Matrix& truth, const ExperimentPlan& plan) {
  plan.validate(truth.rows());
  ExperimentResult result;
  result.plan = plan;
  result.sweep_values = plan.sweep_values();
  result.digest = detail::hex64(fnv1a(plan.describe(), detail::matrix_digest(truth)));

  const std::size_t total = result.sweep_values.size() * static_cast<std::size_t>(plan.trials);
  result.cells.resize(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t s = k / static_cast<std::size_t>(plan.trials);
      const int trial = static_cast<int>(k % static_cast<std::size_t>(plan.trials));
      result.cells[k] = detail::run_cell(truth, plan, s, result.sweep_values[s], trial);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(plan.threads, static_cast<unsigned>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return result;
}

/// Report CSV: provenance comments, then
/// sweep_value,trial,iteration,l2_error,wall_time_s. Failed cells get a
/// comment naming the failure and a single row of NA values.
inline std::string format_experiment_report(const ExperimentResult& result,
                                            const std::vector<std::string>& extra_provenance = {}) {
  std::string out;
  out += "# plan: " + result.plan.describe() + "\n";
  out += "# digest: " + result.digest + "\n";
  for (const auto& line : extra_provenance) out += "# " + line + "\n";
  for (const auto& c : result.cells) {
    if (!c.ok) {
      out += "# failed cell sweep_value=" + format_real(c.sweep_value) +
             " trial=" + std::to_string(c.trial) + ": " + c.failure + "\n";
    } else if (c.damage_retries > 0) {
      out += "# cell sweep_value=" + format_real(c.sweep_value) + " trial=" +
             std::to_string(c.trial) + " needed " + std::to_string(c.damage_retries) +
             " damage retries\n";
    }
  }
  out += "sweep_value,trial,iteration,l2_error,wall_time_s\n";
  for (const auto& c : result.cells) {
    const std::string prefix = format_real(c.sweep_value) + "," + std::to_string(c.trial) + ",";
    if (!c.ok) {
      out += prefix + "NA,NA,NA\n";
      continue;
    }
    for (std::size_t t = 0; t < c.errors.size(); ++t) {
      out += prefix + std::to_string(t) + "," + format_real(c.errors[t]) + "," +
             format_real(c.elapsed[t]) + "\n";
    }
  }
  return out;
}

inline std::string render_experiment_plot(const ExperimentResult& result) {
  std::vector<PlotSeries> series;
  for (std::size_t s = 0; s < result.sweep_values.size(); ++s) {
    const TrialEnsemble e = result.ensemble(s);
    if (e.errors_by_iteration.rows() == 0) continue;
    PlotSeries line;
    line.label = to_string(result.plan.sweep_variable) + "=" + format_real(result.sweep_values[s]);
    const auto stats = ensemble_stats(e);
    for (std::size_t t = 0; t < stats.size(); ++t) {
      line.x.push_back(static_cast<double>(t));
      line.y.push_back(stats[t].mean);
    }
    series.push_back(std::move(line));
  }
  PlotOptions options;
  options.title = "IGH error by iteration (" + to_string(result.plan.sweep_variable) + ")";
  return render_line_chart(series, options);
}

}  // namespace igh
