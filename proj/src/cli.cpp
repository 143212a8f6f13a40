#include "robust_mspca/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "robust_mspca/csv.hpp"
#include "robust_mspca/dual.hpp"
#include "robust_mspca/errors.hpp"
#include "robust_mspca/moments.hpp"
#include "robust_mspca/report.hpp"
#include "robust_mspca/scenarios.hpp"
#include "robust_mspca/variants.hpp"

namespace fs = std::filesystem;

namespace robust_mspca::cli {
namespace {

struct RunConfig {
  std::string command;
  int k = 1;
  int iterations = 500;
  std::string variant = "stable";
  bool center = false;
  bool rescale = false;
  double eta_scale = 1.0;
  std::uint64_t seed = 0;
  int gap_stride = 0;
  std::optional<double> stop_gap;
  double gap_tol = 1e-6;
  std::vector<std::string> inputs;
  std::string source_column;
  std::vector<std::string> moments;
  std::string out;
  // simulate / bench
  std::string scenario;
  std::vector<int> dims;
  std::vector<int> ns;
  std::vector<int> sources;
  int reps = -1;
  int l_out = 100;
  bool iterations_set = false;
  bool k_set = false;
};

SecondMomentSet load_instance(const RunConfig& cfg, double& scale) {
  const bool from_moments = !cfg.moments.empty();
  if (from_moments == !cfg.inputs.empty()) {
    throw CLI::ValidationError("exactly one of --input or --moments is required");
  }
  SecondMomentSet m;
  if (from_moments) {
    m = load_moment_matrices({cfg.moments.begin(), cfg.moments.end()});
  } else {
    LoadOptions options;
    options.inputs.assign(cfg.inputs.begin(), cfg.inputs.end());
    if (!cfg.source_column.empty()) options.source_column = cfg.source_column;
    m = compute_second_moment(load_sources(options), cfg.center);
  }
  scale = 1.0;
  if (cfg.rescale) std::tie(m, scale) = rescale_by_max_opnorm(m);
  return m;
}

std::string table_text(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

std::string real(double v) { return std::isfinite(v) ? csv::format_real(v) : ""; }

void emit_table(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out.empty()) {
    out << text;
  } else {
    report::write_text_atomic(cfg.out, text);
  }
}

std::string matrix_text(const Matrix& m) {
  std::ostringstream os;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << csv::format_real(m(i, j));
    os << '\n';
  }
  return os.str();
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) {
  fs::path p = path;
  p.replace_filename(path.stem().string() + suffix + path.extension().string());
  return p;
}

int run_fit(const RunConfig& cfg, std::ostream& out) {
  const auto variant = parse_variant(cfg.variant);
  if (!variant) throw CLI::ValidationError("--variant", "unknown variant " + cfg.variant);
  double scale = 1.0;
  const SecondMomentSet m = load_instance(cfg, scale);

  SolveOptions options;
  options.gap_stride = cfg.gap_stride;
  options.gap_tolerance = cfg.stop_gap;
  options.step_scale = cfg.eta_scale;
  const SolveReport r = solve_variant(m, cfg.k, cfg.iterations, *variant, options);
  const TightnessResult tight =
      tightness_check(shift_matrices(m, cfg.k, *variant), r.omega_avg, cfg.k, cfg.gap_tol);
  report::Report rep = report::from_solve(r, m, cfg.k, *variant, tight);
  rep.body["scale"] = scale;

  if (cfg.out.empty()) {
    for (const auto& nm : rep.matrices) {
      rep.body[nm.key] = report::Json::array();
      for (Index i = 0; i < nm.value.rows(); ++i) {
        report::Json row = report::Json::array();
        for (Index j = 0; j < nm.value.cols(); ++j) row.push_back(nm.value(i, j));
        rep.body[nm.key].push_back(row);
      }
    }
    out << report::dump(rep.body) << '\n';
    return kExitOk;
  }
  const fs::path path(cfg.out);
  // P and M always land next to the report as CSV as well.
  report::write_text_atomic(with_suffix(path, "_P").replace_extension(".csv"),
                            matrix_text(r.p_rounded.matrix()));
  report::write_text_atomic(with_suffix(path, "_M").replace_extension(".csv"),
                            matrix_text(r.m_avg.matrix()));
  report::write_report(rep, path);
  out << "tau=" << csv::format_real(r.tau)
      << " worst_case_ev=" << csv::format_real(r.worst_case_ev)
      << " iterations=" << r.iterations << " wall_time=" << r.wall_time << "s\n";
  return kExitOk;
}

int run_dual(const RunConfig& cfg, std::ostream& out) {
  double scale = 1.0;
  const SecondMomentSet m = load_instance(cfg, scale);
  DualOptions options;
  options.gap_tol = cfg.gap_tol;
  if (cfg.eta_scale != 1.0) {
    options.eta = default_dual_step(m, cfg.iterations) * cfg.eta_scale;
  }
  const DualReport r = dual_solve(m, cfg.k, cfg.iterations, options);
  report::Report rep = report::from_dual(r, m, cfg.k);
  rep.body["scale"] = scale;
  if (cfg.out.empty()) {
    rep.matrices.clear();
    out << report::dump(rep.body) << '\n';
    return kExitOk;
  }
  report::write_report(rep, cfg.out);
  out << "phi=" << csv::format_real(r.phi_at_avg)
      << " eigengap=" << csv::format_real(r.eigengap)
      << " tight=" << (r.tight ? "true" : "false") << '\n';
  return kExitOk;
}

template <typename T>
std::vector<T> as(const std::vector<int>& v) {
  return {v.begin(), v.end()};
}

const std::vector<std::string> kLongHeader{"scenario", "L", "d", "n", "rep",
                                           "method", "metric", "value"};

int run_simulate(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::vector<std::string>> rows;
  const auto push = [&](const std::string& scenario, std::string l, std::string d,
                        std::string n, int rep, const std::string& method,
                        const std::string& metric, double value) {
    rows.push_back({scenario, std::move(l), std::move(d), std::move(n),
                    std::to_string(rep), method, metric, real(value)});
  };

  if (cfg.scenario == "settings") {
    const auto results = scenarios::run_settings(
        cfg.seed, cfg.iterations_set ? cfg.iterations : 500, cfg.eta_scale);
    std::vector<std::vector<std::string>> table;
    for (const auto& r : results) {
      table.push_back({std::to_string(r.setting), r.method, real(r.angle_deg),
                       real(r.worst_case_ev)});
    }
    emit_table(cfg, table_text({"setting", "method", "angle_deg", "worst_case_ev"}, table),
               out);
    return kExitOk;
  }
  if (cfg.scenario == "factor") {
    scenarios::FactorConfig fc;
    fc.seed = cfg.seed;
    if (!cfg.sources.empty()) fc.source_counts = cfg.sources;
    if (!cfg.dims.empty()) fc.d = cfg.dims.front();
    if (!cfg.ns.empty()) fc.n = cfg.ns.front();
    if (cfg.k_set) fc.k = cfg.k;
    if (cfg.iterations_set) fc.iterations = cfg.iterations;
    if (cfg.reps > 0) fc.reps = cfg.reps;
    fc.l_out = cfg.l_out;
    fc.step_scale = cfg.eta_scale;
    for (const auto& rep : scenarios::run_factor(fc)) {
      for (const auto& mo : rep.methods) {
        const std::string l = std::to_string(rep.sources);
        const std::string d = std::to_string(fc.d);
        const std::string n = std::to_string(fc.n);
        if (std::isfinite(mo.recovery_error)) {
          push("factor", l, d, n, rep.rep, mo.method, "recovery_error", mo.recovery_error);
        }
        push("factor", l, d, n, rep.rep, mo.method, "capture_error", mo.capture_error);
        push("factor", l, d, n, rep.rep, mo.method, "in_dist_worst_ev", mo.in_dist_ev);
        push("factor", l, d, n, rep.rep, mo.method, "ood_worst_ev", mo.ood_ev);
        if (std::isfinite(mo.tau)) {
          push("factor", l, d, n, rep.rep, mo.method, "tau", mo.tau);
        }
      }
    }
    emit_table(cfg, table_text(kLongHeader, rows), out);
    return kExitOk;
  }
  if (cfg.scenario == "certificate-grid") {
    scenarios::CertificateConfig cc;
    cc.seed = cfg.seed;
    if (!cfg.dims.empty()) cc.dims = as<Index>(cfg.dims);
    if (!cfg.ns.empty()) cc.ns = as<Index>(cfg.ns);
    if (!cfg.sources.empty()) cc.sources = cfg.sources.front();
    if (cfg.k_set) cc.k = cfg.k;
    if (cfg.iterations_set) cc.iterations = cfg.iterations;
    if (cfg.reps > 0) cc.reps = cfg.reps;
    cc.step_scale = cfg.eta_scale;
    const auto cells = scenarios::run_certificate_grid(cc);

    std::map<std::pair<Index, Index>, std::pair<double, int>> mean;
    for (const auto& c : cells) {
      auto& [sum, count] = mean[{c.d, c.n}];
      sum += c.tau;
      ++count;
      push("certificate-grid", std::to_string(cc.sources), std::to_string(c.d),
           std::to_string(c.n), c.rep, "stable", "tau", c.tau);
    }
    std::vector<std::string> header{"d\\n"};
    for (Index n : cc.ns) header.push_back(std::to_string(n));
    std::vector<std::vector<std::string>> summary;
    for (Index d : cc.dims) {
      std::vector<std::string> row{std::to_string(d)};
      for (Index n : cc.ns) {
        const auto& [sum, count] = mean[{d, n}];
        row.push_back(real(sum / count));
      }
      summary.push_back(std::move(row));
    }
    if (cfg.out.empty()) {
      out << table_text(header, summary);
    } else {
      report::write_text_atomic(with_suffix(cfg.out, "_replications"),
                                table_text(kLongHeader, rows));
      report::write_text_atomic(cfg.out, table_text(header, summary));
    }
    return kExitOk;
  }
  if (cfg.scenario == "convergence") {
    scenarios::ConvergenceConfig cc;
    cc.seed = cfg.seed;
    if (!cfg.dims.empty()) cc.dims = as<Index>(cfg.dims);
    if (!cfg.ns.empty()) cc.ns = as<Index>(cfg.ns);
    if (!cfg.sources.empty()) cc.sources = cfg.sources.front();
    if (cfg.k_set) cc.k = cfg.k;
    if (cfg.iterations_set) cc.iterations = cfg.iterations;
    if (cfg.reps > 0) cc.reps = cfg.reps;
    cc.step_scale = cfg.eta_scale;
    for (const auto& c : scenarios::run_convergence(cc)) {
      const std::string l = std::to_string(cc.sources);
      push("convergence", l, std::to_string(c.d), std::to_string(c.n), c.rep, "stable",
           "objective_gap", c.objective_gap);
      push("convergence", l, std::to_string(c.d), std::to_string(c.n), c.rep, "stable",
           "estimation_error", c.estimation_error);
    }
    emit_table(cfg, table_text(kLongHeader, rows), out);
    return kExitOk;
  }
  throw CLI::ValidationError("--scenario",
                             "expected settings, factor, certificate-grid or convergence");
}

int run_bench(const RunConfig& cfg, std::ostream& out) {
  const auto variant = parse_variant(cfg.variant);
  if (!variant) throw CLI::ValidationError("--variant", "unknown variant " + cfg.variant);
  scenarios::BenchConfig bc;
  bc.seed = cfg.seed;
  bc.variant = *variant;
  if (!cfg.dims.empty()) bc.dims = as<Index>(cfg.dims);
  if (!cfg.ns.empty()) bc.n = cfg.ns.front();
  if (!cfg.sources.empty()) bc.sources = cfg.sources.front();
  if (cfg.k_set) bc.k = cfg.k;
  if (cfg.iterations_set) bc.iterations = cfg.iterations;
  if (cfg.reps > 0) bc.reps = cfg.reps;
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : scenarios::run_bench(bc)) {
    rows.push_back({std::to_string(r.d), std::to_string(r.rep),
                    std::to_string(r.iterations), real(r.seconds),
                    real(r.seconds_per_iteration)});
  }
  emit_table(cfg,
             table_text({"d", "rep", "T", "seconds", "seconds_per_iteration"}, rows),
             out);
  return kExitOk;
}

void add_input_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--input", cfg.inputs,
                  "Sample CSVs (one per source) or a directory of them");
  sub->add_option("--source-column", cfg.source_column,
                  "Single-file mode: column holding the source label");
  sub->add_option("--moments", cfg.moments,
                  "d x d moment-matrix CSVs (one per source) or a directory");
  sub->add_flag("--center", cfg.center, "Subtract per-source sample means");
  sub->add_flag("--rescale", cfg.rescale, "Divide all matrices by the max operator norm");
  sub->add_option("--out", cfg.out, "Report path (JSON); stdout when omitted");
  sub->add_option("--eta-scale", cfg.eta_scale, "Multiplier on the default step sizes")
      ->check(CLI::PositiveNumber);
  sub->add_option("--gap-tol", cfg.gap_tol, "Eigengap threshold for the tightness flag")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Distributionally robust multi-source PCA solvers"};
  app.require_subcommand(1);

  const auto add_k = [&](CLI::App* sub) {
    sub->add_option_function<int>(
           "--k", [&](int v) { cfg.k = v; cfg.k_set = true; }, "Target rank")
        ->check(CLI::PositiveNumber);
  };
  const auto add_t = [&](CLI::App* sub) {
    sub->add_option_function<int>(
           "--T", [&](int v) { cfg.iterations = v; cfg.iterations_set = true; },
           "Iterations")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* fit = app.add_subcommand("fit", "Mirror-Prox fit on CSV data");
  add_input_flags(fit, cfg);
  add_k(fit);
  add_t(fit);
  fit->add_option("--variant", cfg.variant, "stable | squared | fair")
      ->check(CLI::IsMember({"stable", "squared", "fair"}));
  fit->add_option("--gap-stride", cfg.gap_stride, "Iterations between gap evaluations")
      ->check(CLI::NonNegativeNumber);
  fit->add_option_function<double>(
      "--stop-gap", [&](double v) { cfg.stop_gap = v; },
      "Stop early once the duality gap falls below this");

  CLI::App* dual = app.add_subcommand("dual", "Mirror descent on the dual eigenvalue sum");
  add_input_flags(dual, cfg);
  add_k(dual);
  add_t(dual);

  CLI::App* simulate = app.add_subcommand("simulate", "Synthetic experiment presets");
  simulate->add_option("--scenario", cfg.scenario,
                       "settings | factor | certificate-grid | convergence")
      ->required()
      ->check(CLI::IsMember({"settings", "factor", "certificate-grid", "convergence"}));
  add_k(simulate);
  add_t(simulate);
  simulate->add_option("--reps", cfg.reps, "Replications per cell")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", cfg.seed, "Base seed");
  simulate->add_option("--dims", cfg.dims, "Dimensions")->delimiter(',');
  simulate->add_option("--n", cfg.ns, "Sample sizes per source")->delimiter(',');
  simulate->add_option("--sources", cfg.sources, "Source counts")->delimiter(',');
  simulate->add_option("--eta-scale", cfg.eta_scale, "Multiplier on the default step sizes")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--l-out", cfg.l_out, "Out-of-distribution sources")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", cfg.out, "Output CSV; stdout when omitted");

  CLI::App* bench = app.add_subcommand("bench", "Per-iteration timing over a dimension sweep");
  add_k(bench);
  add_t(bench);
  bench->add_option("--dims", cfg.dims, "Dimensions")->delimiter(',');
  bench->add_option("--reps", cfg.reps, "Repetitions per dimension")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", cfg.seed, "Base seed");
  bench->add_option("--variant", cfg.variant, "stable | squared | fair")
      ->check(CLI::IsMember({"stable", "squared", "fair"}));
  bench->add_option("--n", cfg.ns, "Samples per source")->delimiter(',');
  bench->add_option("--sources", cfg.sources, "Number of sources")->delimiter(',');
  bench->add_option("--out", cfg.out, "Output CSV; stdout when omitted");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (fit->parsed()) {
      cfg.command = "fit";
      return run_fit(cfg, out);
    }
    if (dual->parsed()) {
      cfg.command = "dual";
      return run_dual(cfg, out);
    }
    if (simulate->parsed()) {
      cfg.command = "simulate";
      return run_simulate(cfg, out);
    }
    if (bench->parsed()) {
      cfg.command = "bench";
      if (!bench->count("--variant")) cfg.variant = "fair";
      return run_bench(cfg, out);
    }
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace robust_mspca::cli
