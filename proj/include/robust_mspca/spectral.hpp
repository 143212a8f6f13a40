#pragma once

#include <Eigen/Dense>

namespace robust_mspca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigendecomposition of a symmetric matrix. values are non-increasing;
/// column j of vectors belongs to values(j). Equal eigenvalues keep the
/// order produced by the backend (ascending original index).
struct EigenPairs {
  Vector values;
  Matrix vectors;

  Index dim() const { return values.size(); }
};

/// Rank-k orthogonal projector VV^T.
class ProjectionMatrix {
 public:
  ProjectionMatrix() = default;

  /// Builds VV^T from a d x k matrix with orthonormal columns.
  static ProjectionMatrix from_basis(const Matrix& basis);

  const Matrix& matrix() const { return matrix_; }
  int rank() const { return rank_; }
  Index dim() const { return matrix_.rows(); }

 private:
  ProjectionMatrix(Matrix matrix, int rank)
      : matrix_(std::move(matrix)), rank_(rank) {}

  Matrix matrix_;
  int rank_ = 0;
};

/// (A + A^T) / 2.
Matrix symmetrize(const Matrix& a);

/// <A, B> = trace(A^T B).
double frobenius_inner(const Matrix& a, const Matrix& b);

EigenPairs sym_eig(const Matrix& a);

/// Top-k eigenvectors of A as a d x k orthonormal basis.
Matrix top_k_basis(const Matrix& a, int k);

ProjectionMatrix top_k_projector(const Matrix& a, int k);

/// Largest eigenvalue; the operator norm for PSD input.
double operator_norm(const Matrix& a);

/// Largest absolute eigenvalue; the operator norm for any symmetric input.
double spectral_radius(const Matrix& a);

/// Sum of the k largest eigenvalues.
double ky_fan_value(const Matrix& a, int k);

/// U diag(log max(lambda_j, floor)) U^T.
Matrix log_spectrum(const Matrix& m, double floor = 1e-12);

void require_rank(int k, Index d);

}  // namespace robust_mspca
