#include "robust_mspca/dual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "robust_mspca/errors.hpp"

namespace robust_mspca {

double phi(const SecondMomentSet& m, const SimplexWeights& omega, int k) {
  return ky_fan_value(m.mixture(omega.weights), k);
}

Vector phi_subgrad(const SecondMomentSet& m, const SimplexWeights& omega, int k) {
  const Matrix basis = top_k_basis(m.mixture(omega.weights), k);
  Vector g(static_cast<Index>(m.count()));
  for (std::size_t l = 0; l < m.count(); ++l) {
    // <Sigma, V V^T> = trace(V^T Sigma V)
    g(static_cast<Index>(l)) = (basis.transpose() * m[l] * basis).trace();
  }
  return g;
}

TightnessResult tightness_check(const SecondMomentSet& m,
                                const SimplexWeights& omega, int k,
                                double gap_tol) {
  require_rank(k, m.dim());
  if (!(gap_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "gap tolerance must be positive");
  }
  const EigenPairs eig = sym_eig(m.mixture(omega.weights));
  TightnessResult out;
  out.eigengap = k < eig.dim() ? eig.values(k - 1) - eig.values(k) : 0.0;
  out.tight = out.eigengap > gap_tol;
  out.candidate = ProjectionMatrix::from_basis(eig.vectors.leftCols(k));
  return out;
}

double default_dual_step(const SecondMomentSet& m, int iterations) {
  if (!(m.rho_max() > 0.0)) {
    throw Error(ErrorKind::DegenerateInstance, "all source matrices are zero");
  }
  return 1.0 / (m.rho_max() * std::sqrt(static_cast<double>(iterations)));
}

DualReport dual_solve(const SecondMomentSet& m, int k, int iterations,
                      const DualOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (iterations < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "iteration count must be positive, got " + std::to_string(iterations));
  }
  require_rank(k, m.dim());
  const double eta = options.eta ? *options.eta : default_dual_step(m, iterations);
  if (!(eta > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "dual step size must be positive");
  }
  const int stride = options.trace_stride > 0 ? options.trace_stride
                                              : std::max(1, iterations / 50);

  DualReport report;
  report.eta = eta;
  SimplexWeights omega = SimplexWeights::uniform(m.count());
  Vector sum = Vector::Zero(static_cast<Index>(m.count()));
  for (int t = 0; t < iterations; ++t) {
    sum += omega.weights;
    const Matrix mixture = m.mixture(omega.weights);
    const EigenPairs eig = sym_eig(mixture);
    const Matrix basis = eig.vectors.leftCols(k);
    Vector g(static_cast<Index>(m.count()));
    for (std::size_t l = 0; l < m.count(); ++l) {
      g(static_cast<Index>(l)) = (basis.transpose() * m[l] * basis).trace();
    }
    if (t % stride == 0 || t + 1 == iterations) {
      report.phi_trace.push_back({t, eig.values.head(k).sum()});
    }
    omega = simplex_mirror_update(omega, g, eta);
  }

  report.iterations = iterations;
  report.omega_avg = SimplexWeights{sum / sum.sum()};
  report.phi_at_avg = phi(m, report.omega_avg, k);
  TightnessResult check = tightness_check(m, report.omega_avg, k, options.gap_tol);
  report.eigengap = check.eigengap;
  report.tight = check.tight;
  report.m_candidate = std::move(check.candidate);
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace robust_mspca
