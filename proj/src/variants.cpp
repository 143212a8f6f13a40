#include "robust_mspca/variants.hpp"

#include "robust_mspca/errors.hpp"

namespace robust_mspca {

std::string_view variant_name(VariantKind v) {
  switch (v) {
    case VariantKind::stable: return "stable";
    case VariantKind::squared: return "squared";
    case VariantKind::fair: return "fair";
  }
  return "stable";
}

std::optional<VariantKind> parse_variant(std::string_view name) {
  if (name == "stable") return VariantKind::stable;
  if (name == "squared") return VariantKind::squared;
  if (name == "fair") return VariantKind::fair;
  return std::nullopt;
}

double variant_offset(const Matrix& sigma, int k, VariantKind v) {
  require_rank(k, sigma.rows());
  switch (v) {
    case VariantKind::stable: return 0.0;
    case VariantKind::squared: return sigma.trace() / k;
    case VariantKind::fair: return ky_fan_value(sigma, k) / k;
  }
  return 0.0;
}

SecondMomentSet shift_matrices(const SecondMomentSet& m, int k, VariantKind v) {
  require_rank(k, m.dim());
  if (v == VariantKind::stable) return m;
  std::vector<Matrix> shifted;
  shifted.reserve(m.count());
  for (const Matrix& sigma : m.matrices()) {
    Matrix s = sigma;
    s.diagonal().array() -= variant_offset(sigma, k, v);
    shifted.push_back(std::move(s));
  }
  return SecondMomentSet::indefinite(std::move(shifted), m.labels());
}

SolveReport solve_variant(const SecondMomentSet& m, int k, int iterations,
                          VariantKind v, const SolveOptions& options) {
  if (v == VariantKind::stable) return solve(m, k, iterations, options);
  const SecondMomentSet shifted = shift_matrices(m, k, v);
  SolveReport report = solve(shifted, k, iterations, options);
  report.per_source_ev = m.payoffs(report.p_rounded.matrix());
  report.worst_case_ev = report.per_source_ev.minCoeff();
  return report;
}

double regret(const Matrix& sigma, const Matrix& p, int k) {
  const EigenPairs eig = sym_eig(sigma);
  const double tail = eig.values.tail(eig.dim() - k).sum();
  return frobenius_inner(sigma, Matrix::Identity(sigma.rows(), sigma.cols()) - p) -
         tail;
}

}  // namespace robust_mspca
