#pragma once

#include <optional>
#include <vector>

#include "robust_mspca/mirrorprox.hpp"
#include "robust_mspca/moments.hpp"

namespace robust_mspca {

struct PhiSample {
  int iteration = 0;
  double phi = 0.0;
};

struct TightnessResult {
  /// lambda_k - lambda_{k+1} of Sigma(omega); 0 when k = d.
  double eigengap = 0.0;
  bool tight = false;
  ProjectionMatrix candidate;
};

struct DualReport {
  SimplexWeights omega_avg;
  std::vector<PhiSample> phi_trace;
  double phi_at_avg = 0.0;
  double eigengap = 0.0;
  bool tight = false;
  ProjectionMatrix m_candidate;
  double eta = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
};

/// phi(omega) = sum of the k largest eigenvalues of sum_l omega_l Sigma_l.
double phi(const SecondMomentSet& m, const SimplexWeights& omega, int k);

/// g_l = <Sigma_l, V V^T> with V the top-k eigenvectors of Sigma(omega).
Vector phi_subgrad(const SecondMomentSet& m, const SimplexWeights& omega, int k);

/// Eigengap of Sigma(omega) at position k and the matching projector.
TightnessResult tightness_check(const SecondMomentSet& m,
                                const SimplexWeights& omega, int k,
                                double gap_tol = 1e-6);

/// 1 / (rho_max sqrt(T)).
double default_dual_step(const SecondMomentSet& m, int iterations);

struct DualOptions {
  std::optional<double> eta;
  double gap_tol = 1e-6;
  /// Iterations between phi evaluations in phi_trace; 0 picks max(1, T/50).
  int trace_stride = 0;
};

/// Entropic mirror descent on phi over the simplex, averaging
/// omega^0 .. omega^{T-1}.
DualReport dual_solve(const SecondMomentSet& m, int k, int iterations,
                      const DualOptions& options = {});

}  // namespace robust_mspca
