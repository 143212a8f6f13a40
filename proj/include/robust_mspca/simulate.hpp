#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "robust_mspca/moments.hpp"
#include "robust_mspca/spectral.hpp"

namespace robust_mspca {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream tag and an index (splitmix64), so
/// every source, replication and sweep cell gets an independent stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index = 0);

/// d x r matrix with i.i.d. standard normal entries.
Matrix standard_normal(Index rows, Index cols, Rng& rng);

/// Orthonormal d x r frame from the QR factor of a Gaussian matrix.
Matrix random_orthonormal(Index d, Index r, Rng& rng);

/// Orthonormal d x r frame inside the orthogonal complement of basis.
Matrix random_orthonormal_complement(const Matrix& basis, Index r, Rng& rng);

/// Shared-plus-specific factor model:
///   X = (L_sh, alpha_l L_sp_l) Z + eps,  Z ~ N(0, I), eps ~ N(0, noise_var I),
/// alpha_l ~ Unif(alpha_low, alpha_high).
struct FactorModelSpec {
  Index d = 40;
  int sources = 10;
  Index n = 2000;
  Index shared_rank = 3;
  Index specific_rank = 5;
  double alpha_low = 0.2;
  double alpha_high = 3.0;
  double noise_var = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FactorData {
  SourceSamples samples;
  Matrix shared;
  std::vector<Matrix> specific;
  std::vector<double> alphas;
};

FactorData gen_factor_sources(const FactorModelSpec& spec);

/// E[X X^T] = L_sh L_sh^T + alpha^2 L_sp L_sp^T + noise_var I.
Matrix factor_population_moment(const Matrix& shared, const Matrix& specific,
                                double alpha, double noise_var);

/// Two-feature sources: X1 ~ N(0, var_x1), X2 = beta_l X1 + N(0, noise_vars[l]).
struct TwoFeatureSpec {
  int setting = 1;
  std::array<Index, 3> sizes{300, 300, 1200};
  std::array<double, 3> betas{0.2, -0.4, -1.0};
  double var_x1 = 3.0;
  std::array<double, 3> noise_vars{0.04, 0.04, 0.04};
  std::uint64_t seed = 0;

  /// Settings 1-3: unbalanced sizes; balanced sizes; balanced sizes with
  /// a different slope pattern.
  static TwoFeatureSpec preset(int setting, std::uint64_t seed = 0);
  /// Same setting with noise sd 1, 0.6, 0.3 across the three sources.
  TwoFeatureSpec heteroscedastic() const;
};

SourceSamples gen_two_feature_sources(const TwoFeatureSpec& spec);

/// min_l <Sigma_l, P>
double worst_case_explained_variance(const ProjectionMatrix& p,
                                     const SecondMomentSet& m);

/// ||P - L_sh L_sh^T||_F; requires rank(P) == columns(shared).
double recovery_error(const ProjectionMatrix& p, const Matrix& shared);

/// 1 - <L_sh L_sh^T, P> / rank(L_sh); requires rank(P) >= columns(shared).
double capture_error(const ProjectionMatrix& p, const Matrix& shared);

/// Fresh sources sharing spec's L_sh but with new specific frames and
/// scales. Source j draws from the same stream as training source j of a
/// spec whose seed equals `seed`.
SecondMomentSet ood_moments(const FactorModelSpec& spec, int l_out,
                            std::uint64_t seed);

/// Worst-case explained variance of P over ood_moments(spec, l_out, seed).
double ood_eval(const ProjectionMatrix& p, const FactorModelSpec& spec,
                int l_out, std::uint64_t seed);

/// Sample-size weighted average of the source moments (pooled rows);
/// equal weights when sample sizes are unknown.
Matrix pooled_moment(const SecondMomentSet& m);

/// Classical PCA on the pooled data.
ProjectionMatrix pooled_pca(const SecondMomentSet& m, int k);

/// Angle in degrees between the leading direction of a rank-1 projector
/// and coordinate axis `axis`.
double axis_angle_degrees(const ProjectionMatrix& p, Index axis = 0);

}  // namespace robust_mspca
