#include "robust_mspca/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robust_mspca/errors.hpp"
#include "robust_mspca/parallel.hpp"

namespace robust_mspca {
namespace {

constexpr std::uint64_t kSharedStream = 0x5348;    // "SH"
constexpr std::uint64_t kSourceStream = 0x5352;    // "SR"
constexpr std::uint64_t kTwoFeatureStream = 0x5446;  // "TF"

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Matrix shared_frame(const FactorModelSpec& spec) {
  Rng rng(derive_seed(spec.seed, kSharedStream));
  return random_orthonormal(spec.d, spec.shared_rank, rng);
}

struct FactorSource {
  Matrix samples;
  Matrix specific;
  double alpha = 0.0;
};

FactorSource draw_factor_source(const FactorModelSpec& spec, const Matrix& shared,
                                std::uint64_t seed, std::uint64_t index) {
  Rng rng(derive_seed(seed, kSourceStream, index));
  FactorSource out;
  out.alpha = std::uniform_real_distribution<double>(spec.alpha_low,
                                                     spec.alpha_high)(rng);
  out.specific = random_orthonormal_complement(shared, spec.specific_rank, rng);

  Matrix loadings(spec.d, spec.shared_rank + spec.specific_rank);
  loadings << shared, out.alpha * out.specific;
  const Matrix z = standard_normal(spec.n, loadings.cols(), rng);
  const Matrix noise = standard_normal(spec.n, spec.d, rng) * std::sqrt(spec.noise_var);
  out.samples = z * loadings.transpose() + noise;
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  // Row-major fill so row i depends only on draws for rows <= i.
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

Matrix random_orthonormal(Index d, Index r, Rng& rng) {
  if (r > d) {
    throw Error(ErrorKind::InvalidArgument, "frame rank exceeds dimension");
  }
  const Matrix g = standard_normal(d, r, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, r);
}

Matrix random_orthonormal_complement(const Matrix& basis, Index r, Rng& rng) {
  const Index d = basis.rows();
  if (basis.cols() + r > d) {
    throw Error(ErrorKind::InvalidArgument,
                "complement frame does not fit: " + std::to_string(basis.cols()) +
                    " + " + std::to_string(r) + " > " + std::to_string(d));
  }
  const Matrix g = standard_normal(d, r, rng);
  const Matrix projected = g - basis * (basis.transpose() * g);
  Eigen::HouseholderQR<Matrix> qr(projected);
  Matrix frame = qr.householderQ() * Matrix::Identity(d, r);
  // One more projection pass removes the rounding left by the first.
  frame -= basis * (basis.transpose() * frame);
  Eigen::HouseholderQR<Matrix> qr2(frame);
  return qr2.householderQ() * Matrix::Identity(d, r);
}

void FactorModelSpec::validate() const {
  if (shared_rank < 1 || specific_rank < 0 || shared_rank + specific_rank > d) {
    throw Error(ErrorKind::InvalidArgument,
                "shared_rank + specific_rank must not exceed d");
  }
  if (n < 1 || sources < 1) {
    throw Error(ErrorKind::InvalidArgument, "need n >= 1 and at least one source");
  }
  if (!(alpha_low < alpha_high)) {
    throw Error(ErrorKind::InvalidArgument, "alpha range must satisfy low < high");
  }
  if (!(noise_var >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "noise variance must be nonnegative");
  }
}

FactorData gen_factor_sources(const FactorModelSpec& spec) {
  spec.validate();
  FactorData out;
  out.shared = shared_frame(spec);
  const auto count = static_cast<std::size_t>(spec.sources);
  std::vector<FactorSource> drawn(count);
  parallel_for(count, [&](std::size_t l) {
    drawn[l] = draw_factor_source(spec, out.shared, spec.seed, l);
  });
  out.samples.dim = spec.d;
  for (std::size_t l = 0; l < count; ++l) {
    char label[32];
    std::snprintf(label, sizeof(label), "source%03zu", l);
    out.samples.labels.emplace_back(label);
    out.samples.data.push_back(std::move(drawn[l].samples));
    out.specific.push_back(std::move(drawn[l].specific));
    out.alphas.push_back(drawn[l].alpha);
  }
  return out;
}

Matrix factor_population_moment(const Matrix& shared, const Matrix& specific,
                                double alpha, double noise_var) {
  const Index d = shared.rows();
  return shared * shared.transpose() +
         alpha * alpha * specific * specific.transpose() +
         noise_var * Matrix::Identity(d, d);
}

TwoFeatureSpec TwoFeatureSpec::preset(int setting, std::uint64_t seed) {
  TwoFeatureSpec spec;
  spec.setting = setting;
  spec.seed = seed;
  switch (setting) {
    case 1:
      spec.sizes = {300, 300, 1200};
      spec.betas = {0.2, -0.4, -1.0};
      break;
    case 2:
      spec.sizes = {500, 500, 500};
      spec.betas = {0.2, -0.4, -1.0};
      break;
    case 3:
      spec.sizes = {500, 500, 500};
      spec.betas = {-0.5, 1.0, 0.6};
      break;
    default:
      throw Error(ErrorKind::InvalidArgument,
                  "setting must be 1, 2 or 3, got " + std::to_string(setting));
  }
  return spec;
}

TwoFeatureSpec TwoFeatureSpec::heteroscedastic() const {
  TwoFeatureSpec out = *this;
  out.noise_vars = {1.0, 0.36, 0.09};
  return out;
}

SourceSamples gen_two_feature_sources(const TwoFeatureSpec& spec) {
  SourceSamples out;
  out.dim = 2;
  const double sd_x1 = std::sqrt(spec.var_x1);
  for (std::size_t l = 0; l < 3; ++l) {
    const double sd_noise = std::sqrt(spec.noise_vars[l]);
    Rng rng(derive_seed(spec.seed, kTwoFeatureStream, l));
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(spec.sizes[l], 2);
    for (Index i = 0; i < x.rows(); ++i) {
      const double x1 = sd_x1 * normal(rng);
      const double eps = sd_noise * normal(rng);
      x(i, 0) = x1;
      x(i, 1) = spec.betas[l] * x1 + eps;
    }
    out.labels.push_back("source" + std::to_string(l + 1));
    out.data.push_back(std::move(x));
  }
  return out;
}

double worst_case_explained_variance(const ProjectionMatrix& p,
                                     const SecondMomentSet& m) {
  if (p.dim() != m.dim()) {
    throw Error(ErrorKind::ShapeError, "projector and moments differ in dimension");
  }
  return m.payoffs(p.matrix()).minCoeff();
}

double recovery_error(const ProjectionMatrix& p, const Matrix& shared) {
  if (p.rank() != shared.cols()) {
    throw Error(ErrorKind::InvalidArgument,
                "recovery error needs rank(P) == rank(shared); use capture_error");
  }
  return (p.matrix() - shared * shared.transpose()).norm();
}

double capture_error(const ProjectionMatrix& p, const Matrix& shared) {
  if (p.rank() < shared.cols()) {
    throw Error(ErrorKind::InvalidArgument, "capture error needs rank(P) >= rank(shared)");
  }
  // <L L^T, P> = ||P L||_F^2 for a projector P.
  const double captured = frobenius_inner(shared * shared.transpose(), p.matrix());
  return 1.0 - captured / static_cast<double>(shared.cols());
}

SecondMomentSet ood_moments(const FactorModelSpec& spec, int l_out,
                            std::uint64_t seed) {
  spec.validate();
  if (l_out < 1) {
    throw Error(ErrorKind::InvalidArgument, "need at least one out-of-distribution source");
  }
  const Matrix shared = shared_frame(spec);
  const auto count = static_cast<std::size_t>(l_out);
  std::vector<Matrix> moments(count);
  parallel_for(count, [&](std::size_t j) {
    const FactorSource src = draw_factor_source(spec, shared, seed, j);
    moments[j] = symmetrize(src.samples.transpose() * src.samples /
                            static_cast<double>(spec.n));
  });
  return SecondMomentSet(std::move(moments), {});
}

double ood_eval(const ProjectionMatrix& p, const FactorModelSpec& spec, int l_out,
                std::uint64_t seed) {
  return worst_case_explained_variance(p, ood_moments(spec, l_out, seed));
}

Matrix pooled_moment(const SecondMomentSet& m) {
  Vector weights(static_cast<Index>(m.count()));
  if (const auto& sizes = m.sample_sizes()) {
    for (std::size_t l = 0; l < m.count(); ++l) {
      weights(static_cast<Index>(l)) = static_cast<double>((*sizes)[l]);
    }
  } else {
    weights.setOnes();
  }
  weights /= weights.sum();
  return m.mixture(weights);
}

ProjectionMatrix pooled_pca(const SecondMomentSet& m, int k) {
  return top_k_projector(pooled_moment(m), k);
}

double axis_angle_degrees(const ProjectionMatrix& p, Index axis) {
  const double c = std::sqrt(std::clamp(p.matrix()(axis, axis), 0.0, 1.0));
  return std::acos(std::min(c, 1.0)) * 180.0 / std::numbers::pi;
}

}  // namespace robust_mspca
