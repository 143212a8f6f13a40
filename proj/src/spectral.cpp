#include "robust_mspca/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "robust_mspca/errors.hpp"

namespace robust_mspca {

Matrix symmetrize(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::InvalidMatrix,
                "expected a square matrix, got " + std::to_string(a.rows()) +
                    "x" + std::to_string(a.cols()));
  }
  return 0.5 * (a + a.transpose());
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
  return a.cwiseProduct(b).sum();
}

void require_rank(int k, Index d) {
  if (k < 1 || k > d) {
    throw Error(ErrorKind::InvalidRank, "rank k=" + std::to_string(k) +
                                            " outside [1, " +
                                            std::to_string(d) + "]");
  }
}

EigenPairs sym_eig(const Matrix& a) {
  if (!a.allFinite()) {
    throw Error(ErrorKind::InvalidMatrix, "matrix has non-finite entries");
  }
  const Matrix sym = symmetrize(a);
  const Index d = sym.rows();
  if (d == 0) return {};

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalError, "symmetric eigensolver failed");
  }
  const Vector& ascending = solver.eigenvalues();

  // Backend order is ascending; a stable descending sort keeps equal
  // eigenvalues in their original index order.
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return ascending(i) > ascending(j);
  });

  EigenPairs out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Index j = 0; j < d; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = ascending(src);
    out.vectors.col(j) = solver.eigenvectors().col(src);
  }
  return out;
}

ProjectionMatrix ProjectionMatrix::from_basis(const Matrix& basis) {
  Matrix p = basis * basis.transpose();
  return ProjectionMatrix(symmetrize(p), static_cast<int>(basis.cols()));
}

Matrix top_k_basis(const Matrix& a, int k) {
  require_rank(k, a.rows());
  const EigenPairs eig = sym_eig(a);
  return eig.vectors.leftCols(k);
}

ProjectionMatrix top_k_projector(const Matrix& a, int k) {
  return ProjectionMatrix::from_basis(top_k_basis(a, k));
}

double operator_norm(const Matrix& a) {
  const EigenPairs eig = sym_eig(a);
  return eig.dim() == 0 ? 0.0 : eig.values(0);
}

double spectral_radius(const Matrix& a) {
  const EigenPairs eig = sym_eig(a);
  return eig.dim() == 0 ? 0.0 : eig.values.cwiseAbs().maxCoeff();
}

double ky_fan_value(const Matrix& a, int k) {
  require_rank(k, a.rows());
  const EigenPairs eig = sym_eig(a);
  return eig.values.head(k).sum();
}

Matrix log_spectrum(const Matrix& m, double floor) {
  const EigenPairs eig = sym_eig(m);
  const Vector logs = eig.values.unaryExpr(
      [floor](double v) { return std::log(std::max(v, floor)); });
  return symmetrize(eig.vectors * logs.asDiagonal() *
                    eig.vectors.transpose());
}

}  // namespace robust_mspca
