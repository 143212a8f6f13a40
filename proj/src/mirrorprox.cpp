#include "robust_mspca/mirrorprox.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "robust_mspca/csv.hpp"
#include "robust_mspca/errors.hpp"

namespace robust_mspca {
namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kWaterfillTol = 1e-10;
constexpr int kWaterfillMaxIter = 200;

/// Fantope iterate together with its matrix logarithm, which the next
/// mirror step needs and which falls out of the update's own
/// eigendecomposition.
struct SpectralIterate {
  FantopePoint point;
  Matrix log;
};

SpectralIterate fantope_step(const Matrix& log_base, const Matrix& grad,
                             double eta_m, int k) {
  const EigenPairs eig = sym_eig(log_base + eta_m * grad);
  const WaterfillResult wf = waterfill_nu(eig.values, k);
  const Vector logs = wf.xi.unaryExpr(
      [](double v) { return std::log(std::max(v, kLogFloor)); });
  SpectralIterate out;
  out.point = FantopePoint(
      symmetrize(eig.vectors * wf.xi.asDiagonal() * eig.vectors.transpose()), k);
  out.log = symmetrize(eig.vectors * logs.asDiagonal() * eig.vectors.transpose());
  return out;
}

double waterfill_excess(const Vector& lambda, double nu, int k) {
  double sum = 0.0;
  for (Index j = 0; j < lambda.size(); ++j) {
    sum += std::min(std::exp(lambda(j) + nu), 1.0);
  }
  return sum - static_cast<double>(k);
}

void check_iterate(const FantopePoint& m, const SimplexWeights& w,
                   const char* what, int t) {
  if (auto v = m.violation()) {
    throw Error(ErrorKind::NumericalError, std::string(what) + " M at t=" +
                                               std::to_string(t) + ": " + *v);
  }
  if (auto v = w.violation()) {
    throw Error(ErrorKind::NumericalError, std::string(what) + " omega at t=" +
                                               std::to_string(t) + ": " + *v);
  }
}

double min_payoff(const SecondMomentSet& m, const Matrix& x) {
  return m.payoffs(x).minCoeff();
}

SolveReport classical_solution(const SecondMomentSet& m, int k) {
  SolveReport report;
  report.classical = true;
  const Index d = m.dim();
  const std::size_t count = m.count();

  Vector weights = Vector::Constant(static_cast<Index>(count),
                                    1.0 / static_cast<double>(count));
  if (k == d && !m.all_identical()) {
    // With M = I every source pays its trace; the adversary's best reply
    // is the vertex on the smallest one.
    Vector traces(static_cast<Index>(count));
    for (std::size_t l = 0; l < count; ++l) {
      traces(static_cast<Index>(l)) = m[l].trace();
    }
    Index worst = 0;
    traces.minCoeff(&worst);
    weights.setZero();
    weights(worst) = 1.0;
  }
  report.p_rounded = k == d ? ProjectionMatrix::from_basis(Matrix::Identity(d, d))
                            : top_k_projector(m[0], k);
  report.m_avg = FantopePoint(report.p_rounded.matrix(), k);
  report.omega_avg = SimplexWeights{weights};
  report.relaxed_value = min_payoff(m, report.m_avg.matrix());
  report.tau = 0.0;
  report.gap_trace.push_back(
      {0, duality_gap(m, report.m_avg.matrix(), report.omega_avg, k)});
  return report;
}

}  // namespace

FantopePoint FantopePoint::uniform(Index d, int k) {
  return FantopePoint(
      Matrix::Identity(d, d) * (static_cast<double>(k) / static_cast<double>(d)),
      k);
}

std::optional<std::string> FantopePoint::violation() const {
  if (matrix_.rows() != matrix_.cols()) return "not square";
  if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    return "not symmetric";
  }
  const double trace = matrix_.trace();
  if (std::abs(trace - rank_) > 1e-6) {
    return "trace " + csv::format_real(trace) + " != " + std::to_string(rank_);
  }
  const EigenPairs eig = sym_eig(matrix_);
  if (eig.values.minCoeff() < -1e-8 || eig.values.maxCoeff() > 1.0 + 1e-8) {
    return "eigenvalues outside [0, 1]: [" +
           csv::format_real(eig.values.minCoeff()) + ", " +
           csv::format_real(eig.values.maxCoeff()) + "]";
  }
  return std::nullopt;
}

SimplexWeights SimplexWeights::uniform(std::size_t count) {
  return {Vector::Constant(static_cast<Index>(count),
                           1.0 / static_cast<double>(count))};
}

std::optional<std::string> SimplexWeights::violation() const {
  if (weights.size() == 0) return "empty";
  if (!weights.allFinite()) return "non-finite weight";
  if (weights.minCoeff() < 0.0) return "negative weight";
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    return "weights sum to " + csv::format_real(weights.sum());
  }
  return std::nullopt;
}

double logclamp(double x) { return std::max(std::log(x), 0.05); }

StepSizes default_step_sizes(const SecondMomentSet& m, int k) {
  const Index d = m.dim();
  if (m.count() < 2) {
    throw Error(ErrorKind::DegenerateInstance,
                "step sizes need L >= 2 sources; use the classical solution");
  }
  if (k < 1 || k >= d) {
    throw Error(ErrorKind::DegenerateInstance,
                "step sizes need 1 <= k < d (k=" + std::to_string(k) +
                    ", d=" + std::to_string(d) + ")");
  }
  if (!(m.rho_max() > 0.0)) {
    throw Error(ErrorKind::DegenerateInstance, "all source matrices are zero");
  }
  const double log_l = std::log(static_cast<double>(m.count()));
  const double fantope_radius =
      static_cast<double>(k) *
      logclamp(static_cast<double>(d) / static_cast<double>(k));
  StepSizes s;
  s.eta = std::sqrt(log_l / fantope_radius) / (4.0 * m.rho_max());
  s.eta_m = s.eta / log_l;
  s.eta_omega = s.eta / fantope_radius;
  return s;
}

WaterfillResult waterfill_nu(const Vector& lambda, int k) {
  const Index d = lambda.size();
  if (k < 1 || k >= d) {
    throw Error(ErrorKind::InvalidRank, "water-filling needs 1 <= k < d (k=" +
                                            std::to_string(k) + ", d=" +
                                            std::to_string(d) + ")");
  }
  if (!lambda.allFinite()) {
    throw Error(ErrorKind::NumericalError, "water-filling input is not finite");
  }
  // At lo every term is below k/d, so the sum is below k; at hi every
  // term clips to 1, so the sum is d > k.
  double lo = std::log(static_cast<double>(k) / static_cast<double>(d)) -
              lambda.maxCoeff() - 1.0;
  double hi = -lambda.minCoeff() + std::log(static_cast<double>(k)) + 1.0;
  double width = 1.0;
  for (int i = 0; i < 64 && waterfill_excess(lambda, lo, k) > 0.0; ++i) {
    lo -= width;
    width *= 2.0;
  }
  width = 1.0;
  for (int i = 0; i < 64 && waterfill_excess(lambda, hi, k) < 0.0; ++i) {
    hi += width;
    width *= 2.0;
  }
  if (waterfill_excess(lambda, lo, k) > 0.0 ||
      waterfill_excess(lambda, hi, k) < 0.0) {
    throw Error(ErrorKind::NumericalError, "water-filling bracket not found");
  }

  double nu = 0.5 * (lo + hi);
  double excess = waterfill_excess(lambda, nu, k);
  for (int it = 0; it < kWaterfillMaxIter && std::abs(excess) > kWaterfillTol;
       ++it) {
    if (excess > 0.0) {
      hi = nu;
    } else {
      lo = nu;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid == nu) break;
    nu = mid;
    excess = waterfill_excess(lambda, nu, k);
  }

  WaterfillResult out;
  out.nu = nu;
  out.xi = lambda.unaryExpr([nu](double v) { return std::min(std::exp(v + nu), 1.0); });
  return out;
}

FantopePoint fantope_mirror_update(const FantopePoint& base,
                                   const Matrix& grad_dir, double eta_m) {
  if (grad_dir.rows() != base.dim() || grad_dir.cols() != base.dim()) {
    throw Error(ErrorKind::ShapeError, "gradient shape does not match iterate");
  }
  return fantope_step(log_spectrum(base.matrix(), kLogFloor), symmetrize(grad_dir),
                      eta_m, base.rank())
      .point;
}

SimplexWeights simplex_mirror_update(const SimplexWeights& base,
                                     const Vector& payoffs, double eta_omega) {
  if (payoffs.size() != base.weights.size()) {
    throw Error(ErrorKind::ShapeError, "payoff count does not match weights");
  }
  Vector logits(base.weights.size());
  for (Index l = 0; l < logits.size(); ++l) {
    logits(l) = std::log(base.weights(l)) - eta_omega * payoffs(l);
  }
  const double shift = logits.maxCoeff();
  Vector w = (logits.array() - shift).exp();
  w /= w.sum();
  return {w};
}

double certificate(const SecondMomentSet& m, const Matrix& relaxed,
                   const ProjectionMatrix& p) {
  return min_payoff(m, relaxed) - min_payoff(m, p.matrix());
}

double duality_gap(const SecondMomentSet& m, const Matrix& relaxed,
                   const SimplexWeights& omega, int k) {
  return ky_fan_value(m.mixture(omega.weights), k) - min_payoff(m, relaxed);
}

SolveReport solve(const SecondMomentSet& m, int k, int iterations,
                  const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (iterations < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "iteration count must be positive, got " + std::to_string(iterations));
  }
  const Index d = m.dim();
  require_rank(k, d);

  const auto finish = [&](SolveReport& r) {
    r.per_source_ev = m.payoffs(r.p_rounded.matrix());
    r.worst_case_ev = r.per_source_ev.minCoeff();
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                      .count();
  };

  if (m.count() == 1 || k == d || m.all_identical()) {
    SolveReport report = classical_solution(m, k);
    if (options.steps) report.steps = *options.steps;
    finish(report);
    return report;
  }

  StepSizes steps = options.steps ? *options.steps : default_step_sizes(m, k);
  if (!options.steps) {
    steps.eta *= options.step_scale;
    steps.eta_m *= options.step_scale;
    steps.eta_omega *= options.step_scale;
  }
  if (!(steps.eta_m > 0.0) || !(steps.eta_omega > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "step sizes must be positive");
  }
  const int stride = options.gap_stride > 0 ? options.gap_stride
                                            : std::max(1, iterations / 50);

  FantopePoint current = FantopePoint::uniform(d, k);
  Matrix current_log = Matrix::Identity(d, d) *
                       std::log(static_cast<double>(k) / static_cast<double>(d));
  SimplexWeights omega = SimplexWeights::uniform(m.count());

  Matrix sum_m = Matrix::Zero(d, d);
  Vector sum_w = Vector::Zero(static_cast<Index>(m.count()));

  SolveReport report;
  report.steps = steps;
  int done = 0;
  for (int t = 0; t < iterations; ++t) {
    // Midpoint: gradients at (M^t, omega^t).
    const SpectralIterate mid =
        fantope_step(current_log, m.mixture(omega.weights), steps.eta_m, k);
    const SimplexWeights omega_mid =
        simplex_mirror_update(omega, m.payoffs(current.matrix()), steps.eta_omega);

    // Full step: gradients at the midpoint, Bregman base still (M^t, omega^t).
    SpectralIterate next =
        fantope_step(current_log, m.mixture(omega_mid.weights), steps.eta_m, k);
    SimplexWeights omega_next = simplex_mirror_update(
        omega, m.payoffs(mid.point.matrix()), steps.eta_omega);

    sum_m += mid.point.matrix();
    sum_w += omega_mid.weights;
    done = t + 1;

    if (options.check_invariants) {
      check_iterate(mid.point, omega_mid, "midpoint", t);
      check_iterate(next.point, omega_next, "next", t);
    }
    if (options.observer) {
      options.observer(IterateView{t, mid.point, omega_mid, next.point, omega_next});
    }

    if (done % stride == 0 || done == iterations) {
      const Matrix avg_m = sum_m / static_cast<double>(done);
      const SimplexWeights avg_w{sum_w / sum_w.sum()};
      const double gap = duality_gap(m, avg_m, avg_w, k);
      report.gap_trace.push_back({done, gap});
      if (options.gap_tolerance && gap <= *options.gap_tolerance) break;
    }

    current = std::move(next.point);
    current_log = std::move(next.log);
    omega = std::move(omega_next);
  }

  report.iterations = done;
  report.m_avg = FantopePoint(symmetrize(sum_m / static_cast<double>(done)), k);
  report.omega_avg = SimplexWeights{sum_w / sum_w.sum()};
  report.p_rounded = top_k_projector(report.m_avg.matrix(), k);
  report.relaxed_value = min_payoff(m, report.m_avg.matrix());
  report.tau = certificate(m, report.m_avg.matrix(), report.p_rounded);
  finish(report);
  return report;
}

}  // namespace robust_mspca
