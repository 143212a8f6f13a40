#include "robust_mspca/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "robust_mspca/parallel.hpp"

namespace robust_mspca::scenarios {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kOodStream = 0x4F4F44;  // "OOD"

FactorModelSpec factor_spec(Index d, int sources, Index n, std::uint64_t seed) {
  FactorModelSpec spec;
  spec.d = d;
  spec.sources = sources;
  spec.n = n;
  spec.seed = seed;
  return spec;
}

std::uint64_t cell_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                        std::uint64_t rep) {
  return derive_seed(derive_seed(base, a, b), 0x524550, rep);  // "REP"
}

SolveOptions scaled(double step_scale) {
  SolveOptions options;
  options.step_scale = step_scale;
  return options;
}

}  // namespace

std::vector<SettingsResult> run_settings(std::uint64_t seed, int iterations,
                                         double step_scale) {
  std::vector<SettingsResult> out;
  for (int setting = 1; setting <= 3; ++setting) {
    const SourceSamples samples =
        gen_two_feature_sources(TwoFeatureSpec::preset(setting, seed));
    const SecondMomentSet m = compute_second_moment(samples);
    for (VariantKind v : {VariantKind::stable, VariantKind::squared, VariantKind::fair}) {
      const SolveReport r = solve_variant(m, 1, iterations, v, scaled(step_scale));
      out.push_back({setting, std::string(variant_name(v)),
                     axis_angle_degrees(r.p_rounded), r.worst_case_ev});
    }
    const ProjectionMatrix pooled = pooled_pca(m, 1);
    out.push_back({setting, "pooled", axis_angle_degrees(pooled),
                   worst_case_explained_variance(pooled, m)});
  }
  return out;
}

std::vector<FactorReplication> run_factor(const FactorConfig& config) {
  struct Job {
    int sources;
    int rep;
  };
  std::vector<Job> jobs;
  for (int sources : config.source_counts) {
    for (int rep = 0; rep < config.reps; ++rep) jobs.push_back({sources, rep});
  }
  std::vector<FactorReplication> out(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job job = jobs[i];
    const FactorModelSpec spec =
        factor_spec(config.d, job.sources, config.n,
                    cell_seed(config.seed, static_cast<std::uint64_t>(job.sources),
                              static_cast<std::uint64_t>(config.d),
                              static_cast<std::uint64_t>(job.rep)));
    const FactorData data = gen_factor_sources(spec);
    const SecondMomentSet m = compute_second_moment(data.samples);
    const SecondMomentSet ood =
        ood_moments(spec, config.l_out, derive_seed(spec.seed, kOodStream));

    const auto evaluate = [&](std::string method, const ProjectionMatrix& p,
                              double tau) {
      MethodOutcome o;
      o.method = std::move(method);
      o.recovery_error = p.rank() == data.shared.cols()
                             ? recovery_error(p, data.shared)
                             : kNaN;
      o.capture_error = capture_error(p, data.shared);
      o.in_dist_ev = worst_case_explained_variance(p, m);
      o.ood_ev = worst_case_explained_variance(p, ood);
      o.tau = tau;
      return o;
    };

    FactorReplication rep;
    rep.sources = job.sources;
    rep.rep = job.rep;
    const SolveReport stable = solve(m, config.k, config.iterations, scaled(config.step_scale));
    rep.methods.push_back(evaluate("stable", stable.p_rounded, stable.tau));
    rep.methods.push_back(evaluate("pooled", pooled_pca(m, config.k), kNaN));
    for (VariantKind v : {VariantKind::squared, VariantKind::fair}) {
      const SolveReport r =
          solve_variant(m, config.k, config.iterations, v, scaled(config.step_scale));
      rep.methods.push_back(evaluate(std::string(variant_name(v)), r.p_rounded, r.tau));
    }
    out[i] = std::move(rep);
  });
  return out;
}

std::vector<CertificateCell> run_certificate_grid(const CertificateConfig& config) {
  std::vector<CertificateCell> cells;
  for (Index d : config.dims) {
    for (Index n : config.ns) {
      for (int rep = 0; rep < config.reps; ++rep) cells.push_back({d, n, rep, 0.0});
    }
  }
  parallel_for(cells.size(), [&](std::size_t i) {
    CertificateCell& cell = cells[i];
    const FactorModelSpec spec = factor_spec(
        cell.d, config.sources, cell.n,
        cell_seed(config.seed, static_cast<std::uint64_t>(cell.d),
                  static_cast<std::uint64_t>(cell.n),
                  static_cast<std::uint64_t>(cell.rep)));
    const SecondMomentSet m = compute_second_moment(gen_factor_sources(spec).samples);
    cell.tau = solve(m, config.k, config.iterations, scaled(config.step_scale)).tau;
  });
  return cells;
}

std::vector<ConvergenceCell> run_convergence(const ConvergenceConfig& config) {
  std::vector<ConvergenceCell> cells;
  for (Index d : config.dims) {
    for (Index n : config.ns) {
      for (int rep = 0; rep < config.reps; ++rep) cells.push_back({d, n, rep, 0.0, 0.0});
    }
  }
  parallel_for(cells.size(), [&](std::size_t i) {
    ConvergenceCell& cell = cells[i];
    // The population instance depends on the replication, not on n, so
    // every n in a replication targets the same M*.
    const std::uint64_t seed =
        cell_seed(config.seed, static_cast<std::uint64_t>(cell.d), 0,
                  static_cast<std::uint64_t>(cell.rep));
    const FactorModelSpec spec = factor_spec(cell.d, config.sources, cell.n, seed);
    const FactorData data = gen_factor_sources(spec);

    std::vector<Matrix> population;
    for (std::size_t l = 0; l < data.specific.size(); ++l) {
      population.push_back(factor_population_moment(
          data.shared, data.specific[l], data.alphas[l], spec.noise_var));
    }
    const SecondMomentSet pop(std::move(population), data.samples.labels);
    const SecondMomentSet empirical = compute_second_moment(data.samples);

    const SolveOptions options = scaled(config.step_scale);
    const Matrix target = solve(pop, config.k, config.iterations, options).m_avg.matrix();
    const Matrix estimate =
        solve(empirical, config.k, config.iterations, options).m_avg.matrix();
    cell.objective_gap = pop.payoffs(target).minCoeff() - pop.payoffs(estimate).minCoeff();
    cell.estimation_error = (estimate - target).norm();
  });
  return cells;
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  std::vector<BenchRow> rows;
  for (Index d : config.dims) {
    for (int rep = 0; rep < config.reps; ++rep) {
      const FactorModelSpec spec = factor_spec(
          d, config.sources, config.n,
          cell_seed(config.seed, static_cast<std::uint64_t>(d), 0xBE,
                    static_cast<std::uint64_t>(rep)));
      const SecondMomentSet m = compute_second_moment(gen_factor_sources(spec).samples);
      SolveOptions options;
      options.check_invariants = false;
      const auto start = std::chrono::steady_clock::now();
      const SolveReport r = solve_variant(m, config.k, config.iterations, config.variant,
                                          options);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows.push_back({d, rep, r.iterations, seconds,
                      seconds / static_cast<double>(r.iterations)});
    }
  }
  return rows;
}

}  // namespace robust_mspca::scenarios
