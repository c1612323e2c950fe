// igh: command-line front end for the imputation library.
//
// Exit codes: 0 ok, 1 internal error, 2 usage/configuration,
// 3 data invariant, 4 conditioning, 5 I/O or file format.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "igh/igh.hpp"

namespace {

using namespace igh;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration:
    case ErrorKind::domain:
      return 2;
    case ErrorKind::data_invariant:
    case ErrorKind::unimputable_column:
    case ErrorKind::insufficient_data:
    case ErrorKind::degenerate_data:
    case ErrorKind::dimension:
      return 3;
    case ErrorKind::conditioning:
    case ErrorKind::degenerate_kernel:
      return 4;
    case ErrorKind::io:
    case ErrorKind::format:
      return 5;
    case ErrorKind::index:
    case ErrorKind::contract:
      return 1;
  }
  return 1;
}

unsigned default_threads() {
  if (const char* env = std::getenv("IGH_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  return 1;
}

struct CsvFlags {
  bool header = false;
  std::string missing = "NA";

  void attach(CLI::App* cmd) {
    cmd->add_flag("--header", header, "CSV files carry a header row");
    cmd->add_option("--missing-token", missing, "Cell text marking a missing entry")
        ->capture_default_str();
  }
  CsvOptions options(bool check = true) const {
    CsvOptions o;
    o.has_header = header;
    o.missing_token = missing;
    o.check_invariants = check;
    return o;
  }
};

struct SwissRollArgs {
  SwissRollSpec spec;
  std::string out;
};

struct DamageArgs {
  std::string in, out;
  double p = 0.0;
  std::uint64_t seed = 0;
  int retry_limit = 10;
};

struct ImputeArgs {
  std::string in, out, trace_out;
  int iterations = 10;
  std::optional<double> sigma;
  bool sigma_auto = false;
  double cutoff = default_cutoff_delta;
  std::uint64_t seed = 0;
  bool no_shuffle = false;
  double tolerance = 0.0;
};

struct EvaluateArgs {
  std::string truth, imputed, report;
};

struct ExperimentArgs {
  std::string truth, report = "experiment.csv", plot;
  std::string sweep = "p";
  ExperimentPlan plan;
  std::optional<double> sigma;
  double cutoff = default_cutoff_delta;
  bool no_shuffle = false;
  SwissRollSpec roll;
};

struct ImagesArgs {
  std::string dir, csv, manifest, mask = "none";
  int sentinel = 0;
};

void run_swissroll(const SwissRollArgs& a, const CsvFlags& csv) {
  const SwissRoll roll = make_swiss_roll(a.spec);
  write_csv(roll.data, a.out, csv.options());
  std::cout << "wrote " << roll.data.rows() << "x" << roll.data.cols() << " to " << a.out
            << " digest=" << detail::hex64(detail::matrix_digest(roll.truth)) << "\n";
}

void run_damage(const DamageArgs& a, const CsvFlags& csv) {
  const Dataset data = read_csv(a.in, csv.options());
  std::uint64_t seed = a.seed;
  Annihilation out = annihilate(data, a.p, seed);
  int retries = 0;
  while (!out.report.ok()) {
    if (retries >= a.retry_limit) {
      fail(ErrorKind::data_invariant, "damage left degenerate data after " +
                                          std::to_string(retries) +
                                          " retries: " + out.report.describe());
    }
    ++retries;
    out = annihilate(data, a.p, ++seed);
  }
  write_csv(out.data, a.out, csv.options());
  std::cout << "removed " << out.data.missing_count() - data.missing_count() << " of "
            << data.values.size() << " entries (seed " << seed << ", " << retries
            << " retries)\n";
}

nlohmann::json trace_json(const IghResult& r) {
  nlohmann::json j;
  j["sigma"] = r.trace.sigma;
  j["init_wall_time"] = r.trace.init_wall_time;
  auto& iters = j["iterations"] = nlohmann::json::array();
  for (const auto& rec : r.trace.per_iteration) {
    iters.push_back({{"iteration", rec.iteration},
                     {"relative_change", rec.relative_change},
                     {"wall_time", rec.wall_time},
                     {"permutation_seed", rec.permutation_seed},
                     {"column_order", rec.column_order}});
  }
  auto& warns = j["warnings"] = nlohmann::json::array();
  for (const auto& w : r.trace.warnings) {
    warns.push_back({{"iteration", w.iteration}, {"column", w.column}, {"message", w.message}});
  }
  return j;
}

void run_impute(const ImputeArgs& a, const CsvFlags& csv) {
  const Dataset data = read_csv(a.in, csv.options());
  IghConfig config;
  config.kernel = a.sigma ? KernelSpec::with_sigma(*a.sigma, a.cutoff)
                          : KernelSpec::auto_bandwidth(a.cutoff);
  config.iterations = a.iterations;
  config.seed = a.seed;
  config.shuffle = !a.no_shuffle;
  config.tolerance = a.tolerance;
  const IghResult r = igh_run(data, config);
  Dataset out = Dataset::complete(r.imputed);
  out.column_names = data.column_names;
  write_csv(out, a.out, csv.options());
  if (!a.trace_out.empty()) detail::write_file(a.trace_out, trace_json(r).dump(2) + "\n");
  for (const auto& w : r.trace.warnings) {
    std::cerr << "warning: iteration " << w.iteration << ", " << w.message << "\n";
  }
  const auto& last = r.trace.per_iteration.back();
  std::cout << "imputed " << data.missing_count() << " entries in "
            << r.trace.per_iteration.size() << " iterations, sigma=" << format_real(r.trace.sigma)
            << ", last relative change=" << format_real(last.relative_change) << "\n";
}

void run_evaluate(const EvaluateArgs& a, const CsvFlags& csv) {
  const Dataset truth = read_csv(a.truth, csv.options());
  const Dataset imputed = read_csv(a.imputed, csv.options());
  if (truth.missing_count() || imputed.missing_count()) {
    fail(ErrorKind::data_invariant, "evaluate needs fully observed matrices");
  }
  const double err = l2_error(truth.values, imputed.values);
  std::cout << "l2_error=" << format_real(err) << "\n";
  if (!a.report.empty()) {
    write_run_report(a.report, {{0, err, std::nullopt, 0.0}},
                     {"truth=" + a.truth, "imputed=" + a.imputed});
  }
}

void run_experiment_cmd(ExperimentArgs a, const CsvFlags& csv) {
  Matrix truth;
  std::string source;
  if (!a.truth.empty()) {
    const Dataset d = read_csv(a.truth, csv.options());
    if (d.missing_count()) fail(ErrorKind::data_invariant, "truth matrix has missing entries");
    truth = d.values;
    source = "truth=" + a.truth;
  } else {
    truth = make_swiss_roll(a.roll).truth;
    source = "truth=swissroll seed=" + std::to_string(a.roll.seed);
  }
  if (a.sweep == "p") {
    a.plan.sweep_variable = SweepVariable::annihilation_rate;
  } else if (a.sweep == "records") {
    a.plan.sweep_variable = SweepVariable::record_count;
  } else {
    a.plan.sweep_variable = SweepVariable::sparsity_stride;
  }
  a.plan.kernel = a.sigma ? KernelSpec::with_sigma(*a.sigma, a.cutoff)
                          : KernelSpec::auto_bandwidth(a.cutoff);
  a.plan.shuffle = !a.no_shuffle;
  const ExperimentResult r = run_experiment(truth, a.plan);
  detail::write_file(a.report, format_experiment_report(r, {source}));
  if (!a.plot.empty()) detail::write_file(a.plot, render_experiment_plot(r));

  int failed = 0;
  for (const auto& c : r.cells) failed += c.ok ? 0 : 1;
  for (std::size_t s = 0; s < r.sweep_values.size(); ++s) {
    const TrialEnsemble e = r.ensemble(s);
    if (e.errors_by_iteration.rows() == 0) continue;
    const auto stats = ensemble_stats(e);
    std::cout << to_string(a.plan.sweep_variable) << "=" << format_real(r.sweep_values[s])
              << " init=" << format_real(stats.front().mean)
              << " final=" << format_real(stats.back().mean) << "\n";
  }
  std::cout << "digest=" << r.digest << " failed_cells=" << failed << "\n";
}

void run_images_import(const ImagesArgs& a, const CsvFlags& csv) {
  MaskConvention conv;
  if (a.mask == "sentinel") conv = MaskConvention::sentinel_pixel(a.sentinel);
  if (a.mask == "sidecar") conv = MaskConvention::sidecar_mask();
  const ImageImport imp = import_images(a.dir, conv);
  write_csv(imp.data, a.csv, csv.options(false));
  save_manifest(imp.manifest, a.manifest);
  std::cout << "imported " << imp.data.rows() << " images of " << imp.manifest.width << "x"
            << imp.manifest.height << ", " << imp.data.missing_count() << " missing pixels\n";
}

void run_images_export(const ImagesArgs& a, const CsvFlags& csv) {
  const Dataset data = read_csv(a.csv, csv.options(false));
  export_images(data, load_manifest(a.manifest), a.dir);
  std::cout << "exported " << data.rows() << " images to " << a.dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterated geometric harmonics imputation"};
  app.require_subcommand(1);
  CsvFlags csv;

  SwissRollArgs roll;
  auto* sr = app.add_subcommand("swissroll", "Generate a stacked swiss-roll dataset");
  sr->add_option("--out", roll.out, "Output CSV")->required();
  sr->add_option("--points,--points-per-spiral", roll.spec.points_per_spiral, "Points per spiral")->capture_default_str();
  sr->add_option("--spirals", roll.spec.spirals)->capture_default_str();
  sr->add_option("--spread", roll.spec.spread)->capture_default_str();
  sr->add_option("--height-gap", roll.spec.height_gap)->capture_default_str();
  sr->add_option("--dim,--ambient-dim", roll.spec.ambient_dim, "Ambient dimension")->capture_default_str();
  sr->add_option("--rotations", roll.spec.rotations)->capture_default_str();
  sr->add_option("--noise", roll.spec.noise_sigma)->capture_default_str();
  sr->add_option("--seed", roll.spec.seed)->capture_default_str();
  csv.attach(sr);

  DamageArgs damage;
  auto* dm = app.add_subcommand("damage", "Delete entries independently with probability p");
  dm->add_option("--in", damage.in)->required();
  dm->add_option("--out", damage.out)->required();
  dm->add_option("--p", damage.p, "Deletion probability")->required();
  dm->add_option("--seed", damage.seed)->capture_default_str();
  dm->add_option("--retry-seed-limit", damage.retry_limit,
                 "Re-draws allowed when a row or column ends up empty")
      ->capture_default_str();
  csv.attach(dm);

  ImputeArgs imp;
  auto* im = app.add_subcommand("impute", "Fill missing entries");
  im->add_option("--in", imp.in)->required();
  im->add_option("--out", imp.out)->required();
  im->add_option("--iters", imp.iterations)->capture_default_str();
  auto* sigma_opt = im->add_option("--sigma", imp.sigma, "Kernel bandwidth");
  im->add_flag("--sigma-auto", imp.sigma_auto, "Median pairwise distance bandwidth (default)")
      ->excludes(sigma_opt);
  im->add_option("--cutoff", imp.cutoff, "Relative eigenvalue cutoff")->capture_default_str();
  im->add_option("--seed", imp.seed)->capture_default_str();
  im->add_flag("--no-shuffle", imp.no_shuffle, "Sweep columns in index order");
  im->add_option("--tolerance", imp.tolerance, "Stop when relative change drops below")
      ->capture_default_str();
  im->add_option("--trace-out", imp.trace_out, "Write the iteration trace as JSON");
  csv.attach(im);

  EvaluateArgs ev;
  auto* evc = app.add_subcommand("evaluate", "L2 error between truth and an imputation");
  evc->add_option("--truth", ev.truth)->required();
  evc->add_option("--imputed", ev.imputed)->required();
  evc->add_option("--report", ev.report, "Write a run report CSV");
  csv.attach(evc);

  ExperimentArgs ex;
  ex.plan.threads = default_threads();
  auto* exc = app.add_subcommand("experiment", "Damage/impute/evaluate sweep");
  exc->add_option("--truth", ex.truth, "Complete CSV (default: generated swiss roll)");
  exc->add_option("--sweep", ex.sweep, "p, records or stride")
      ->check(CLI::IsMember({"p", "records", "stride"}))
      ->capture_default_str();
  exc->add_option("--p", ex.plan.p_values, "Annihilation rates")->delimiter(',');
  exc->add_option("--record-counts", ex.plan.record_counts)->delimiter(',');
  exc->add_option("--strides", ex.plan.strides)->delimiter(',');
  exc->add_option("--window", ex.plan.window)->capture_default_str();
  exc->add_option("--trials", ex.plan.trials)->capture_default_str();
  exc->add_option("--iters", ex.plan.iterations)->capture_default_str();
  exc->add_option("--seed", ex.plan.base_seed)->capture_default_str();
  exc->add_option("--sigma", ex.sigma);
  exc->add_option("--cutoff", ex.cutoff)->capture_default_str();
  exc->add_flag("--no-shuffle", ex.no_shuffle);
  exc->add_option("--tolerance", ex.plan.tolerance)->capture_default_str();
  exc->add_option("--retry-seed-limit", ex.plan.retry_limit)->capture_default_str();
  exc->add_option("--threads", ex.plan.threads, "Worker threads (default $IGH_THREADS or 1)")
      ->capture_default_str();
  exc->add_option("--report", ex.report)->capture_default_str();
  exc->add_option("--plot", ex.plot, "Write an SVG chart");
  exc->add_option("--roll-seed", ex.roll.seed, "Seed of the generated swiss roll");
  csv.attach(exc);

  ImagesArgs img;
  auto* images = app.add_subcommand("images", "Convert between PGM folders and CSV");
  images->require_subcommand(1);
  auto* ii = images->add_subcommand("import", "PGM folder to CSV plus manifest");
  ii->add_option("--dir", img.dir)->required();
  ii->add_option("--out", img.csv)->required();
  ii->add_option("--manifest", img.manifest)->required();
  ii->add_option("--mask", img.mask, "none, sentinel or sidecar")
      ->check(CLI::IsMember({"none", "sentinel", "sidecar"}))
      ->capture_default_str();
  ii->add_option("--sentinel", img.sentinel, "Raw pixel value marking a missing pixel")
      ->capture_default_str();
  csv.attach(ii);
  auto* ie = images->add_subcommand("export", "CSV plus manifest to PGM folder");
  ie->add_option("--in", img.csv)->required();
  ie->add_option("--manifest", img.manifest)->required();
  ie->add_option("--dir", img.dir)->required();
  csv.attach(ie);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sr) run_swissroll(roll, csv);
    if (*dm) run_damage(damage, csv);
    if (*im) run_impute(imp, csv);
    if (*evc) run_evaluate(ev, csv);
    if (*exc) run_experiment_cmd(ex, csv);
    if (*ii) run_images_import(img, csv);
    if (*ie) run_images_export(img, csv);
  } catch (const ConditioningError& e) {
    std::cerr << "error (conditioning): " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
