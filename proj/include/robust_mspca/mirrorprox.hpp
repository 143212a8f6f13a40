#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "robust_mspca/moments.hpp"
#include "robust_mspca/spectral.hpp"

namespace robust_mspca {

/// Point of the Fantope F^k: symmetric, eigenvalues in [0, 1], trace k.
class FantopePoint {
 public:
  FantopePoint() = default;
  FantopePoint(Matrix matrix, int rank)
      : matrix_(std::move(matrix)), rank_(rank) {}

  /// (k/d) I, the centre of F^k.
  static FantopePoint uniform(Index d, int k);

  const Matrix& matrix() const { return matrix_; }
  int rank() const { return rank_; }
  Index dim() const { return matrix_.rows(); }

  /// Empty when the point satisfies the membership tolerances, otherwise a
  /// description of the first violation.
  std::optional<std::string> violation() const;

 private:
  Matrix matrix_;
  int rank_ = 0;
};

/// Point of the probability simplex.
struct SimplexWeights {
  Vector weights;

  static SimplexWeights uniform(std::size_t count);
  std::optional<std::string> violation() const;
};

struct StepSizes {
  double eta = 0.0;
  double eta_m = 0.0;
  double eta_omega = 0.0;
};

/// max(log x, 0.05); keeps the step-size formula finite as d -> k.
double logclamp(double x);

/// eta = sqrt(log L / (k logclamp(d/k))) / (4 rho_max),
/// eta_m = eta / log L, eta_omega = eta / (k logclamp(d/k)).
StepSizes default_step_sizes(const SecondMomentSet& m, int k);

struct WaterfillResult {
  double nu = 0.0;
  Vector xi;
};

/// Solves sum_j min(exp(lambda_j + nu), 1) = k for nu by bracketed
/// bisection; xi_j = min(exp(lambda_j + nu), 1).
WaterfillResult waterfill_nu(const Vector& lambda, int k);

/// Fantope mirror step: eigendecompose log(M_base) + eta_m * grad and
/// water-fill the spectrum back onto F^k.
FantopePoint fantope_mirror_update(const FantopePoint& base,
                                   const Matrix& grad_dir, double eta_m);

/// Multiplicative-weights step w_l ~ base_l exp(-eta_omega payoff_l).
SimplexWeights simplex_mirror_update(const SimplexWeights& base,
                                     const Vector& payoffs, double eta_omega);

/// State visible to an IterateObserver after each Mirror-Prox iteration.
struct IterateView {
  int iteration = 0;  // 0-based t
  const FantopePoint& m_mid;
  const SimplexWeights& omega_mid;
  const FantopePoint& m_next;
  const SimplexWeights& omega_next;
};
using IterateObserver = std::function<void(const IterateView&)>;

struct SolveOptions {
  /// Defaults to default_step_sizes of the instance.
  std::optional<StepSizes> steps;
  /// Multiplier applied to the default step sizes when `steps` is unset.
  double step_scale = 1.0;
  /// Iterations between duality-gap evaluations; 0 picks max(1, T/50).
  int gap_stride = 0;
  /// Stop once the monitored gap of the running average drops below this.
  std::optional<double> gap_tolerance;
  /// Check Fantope/simplex membership of every iterate; throws
  /// NumericalError on violation.
#ifdef NDEBUG
  bool check_invariants = false;
#else
  bool check_invariants = true;
#endif
  IterateObserver observer;
};

struct GapSample {
  int iteration = 0;
  double gap = 0.0;
};

struct SolveReport {
  FantopePoint m_avg;
  SimplexWeights omega_avg;
  ProjectionMatrix p_rounded;
  double tau = 0.0;
  /// min_l <Sigma_l, M_avg>
  double relaxed_value = 0.0;
  std::vector<GapSample> gap_trace;
  /// <Sigma_l, P_rounded>
  Vector per_source_ev;
  double worst_case_ev = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  StepSizes steps;
  /// Set when a closed-form classical solution replaced the iterations.
  bool classical = false;
};

/// min_l <Sigma_l, M> - min_l <Sigma_l, P>
double certificate(const SecondMomentSet& m, const Matrix& relaxed,
                   const ProjectionMatrix& p);

/// KyFan_k(Sigma(omega)) - min_l <Sigma_l, M>; nonnegative up to rounding.
double duality_gap(const SecondMomentSet& m, const Matrix& relaxed,
                   const SimplexWeights& omega, int k);

/// Mirror-Prox for max_{M in F^k} min_{omega in simplex} sum_l omega_l
/// <Sigma_l, M>, followed by rank-k rounding and the certificate.
///
/// Single-source, k = d and identical-source instances have a closed-form
/// answer (top-k projector of the common matrix) and skip the iterations.
SolveReport solve(const SecondMomentSet& m, int k, int iterations,
                  const SolveOptions& options = {});

}  // namespace robust_mspca
