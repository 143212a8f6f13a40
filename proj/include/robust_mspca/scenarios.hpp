#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robust_mspca/simulate.hpp"
#include "robust_mspca/variants.hpp"

namespace robust_mspca::scenarios {

// Presets for the synthetic experiments. Every replication derives its
// own seed from (seed, cell, rep), so results do not depend on the order
// in which workers pick replications up.

struct SettingsResult {
  int setting = 0;
  std::string method;
  double angle_deg = 0.0;
  double worst_case_ev = 0.0;
};

/// Settings 1-3 with k = 1: first-direction angle to the X1 axis for
/// stable, squared, fair and pooled PCA.
std::vector<SettingsResult> run_settings(std::uint64_t seed, int iterations = 500,
                                         double step_scale = 1.0);

struct FactorConfig {
  std::vector<int> source_counts{2, 4, 6, 8, 10};
  Index d = 40;
  Index n = 2000;
  int k = 3;
  int iterations = 500;
  int reps = 100;
  int l_out = 100;
  /// Multiplier on the default Mirror-Prox step sizes.
  double step_scale = 1.0;
  std::uint64_t seed = 0;
};

struct MethodOutcome {
  std::string method;
  /// NaN when k differs from the shared rank.
  double recovery_error = 0.0;
  double capture_error = 0.0;
  double in_dist_ev = 0.0;
  double ood_ev = 0.0;
  /// NaN for pooled PCA.
  double tau = 0.0;
};

struct FactorReplication {
  int sources = 0;
  int rep = 0;
  std::vector<MethodOutcome> methods;  // stable, pooled, squared, fair
};

std::vector<FactorReplication> run_factor(const FactorConfig& config);

struct CertificateConfig {
  std::vector<Index> dims{10, 20, 30};
  std::vector<Index> ns{100, 300, 600, 1200, 2500, 5000, 10000, 20000, 40000};
  int sources = 4;
  int k = 3;
  int iterations = 500;
  int reps = 100;
  /// Multiplier on the default Mirror-Prox step sizes.
  double step_scale = 1.0;
  std::uint64_t seed = 0;
};

struct CertificateCell {
  Index d = 0;
  Index n = 0;
  int rep = 0;
  double tau = 0.0;
};

std::vector<CertificateCell> run_certificate_grid(const CertificateConfig& config);

struct ConvergenceConfig {
  std::vector<Index> dims{10, 30};
  std::vector<Index> ns{300, 1200, 5000, 20000, 40000};
  int sources = 4;
  int k = 3;
  int iterations = 500;
  int reps = 100;
  /// Multiplier on the default Mirror-Prox step sizes.
  double step_scale = 1.0;
  std::uint64_t seed = 0;
};

struct ConvergenceCell {
  Index d = 0;
  Index n = 0;
  int rep = 0;
  /// min_l <Sigma_l, M*> - min_l <Sigma_l, M_hat> on population moments.
  double objective_gap = 0.0;
  /// ||M_hat - M*||_F
  double estimation_error = 0.0;
};

std::vector<ConvergenceCell> run_convergence(const ConvergenceConfig& config);

struct BenchConfig {
  std::vector<Index> dims{30, 50, 100, 200};
  int iterations = 100;
  int reps = 3;
  int sources = 4;
  Index n = 2000;
  int k = 3;
  VariantKind variant = VariantKind::fair;
  std::uint64_t seed = 0;
};

struct BenchRow {
  Index d = 0;
  int rep = 0;
  int iterations = 0;
  double seconds = 0.0;
  double seconds_per_iteration = 0.0;
};

/// Timed solves run one at a time so measurements do not compete.
std::vector<BenchRow> run_bench(const BenchConfig& config);

}  // namespace robust_mspca::scenarios
