#pragma once

// Passive detector: Helstrom measurement on n-fold product hypotheses and its
// error rates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

#include "qspoof/qmat.hpp"

namespace qspoof::detector {

using qmat::DensityOperator;
using qmat::HermitianOperator;
using qmat::Index;
using qmat::Matrix;
using qmat::OperatorScalar;
using qmat::StateVector;

/// H0: rho = rho0 versus H1: rho = rho1 on a single copy.
template <OperatorScalar S>
class HypothesisPair {
 public:
  HypothesisPair(DensityOperator<S> rho0, DensityOperator<S> rho1)
      : rho0_(std::move(rho0)), rho1_(std::move(rho1)) {
    if (rho0_.dim() != rho1_.dim()) throw ShapeMismatch("hypotheses have different dimensions");
  }

  const DensityOperator<S>& rho0() const { return rho0_; }
  const DensityOperator<S>& rho1() const { return rho1_; }
  Index dim() const { return rho0_.dim(); }

 private:
  DensityOperator<S> rho0_;
  DensityOperator<S> rho1_;
};

/// Threshold tau(n) = (c0bar n + d0bar) / (c1bar n + d1bar).
///
/// The numerator is the false-alarm weight c_{0,n} and the denominator the
/// miss weight c_{1,n} of the Bayesian risk, so the Helstrom projector at
/// tau(n) is the risk minimizer.
class ThresholdSchedule {
 public:
  ThresholdSchedule(double c0bar, double d0bar, double c1bar, double d1bar)
      : c0bar_(c0bar), d0bar_(d0bar), c1bar_(c1bar), d1bar_(d1bar) {
    // Zero constants are fine as long as both weights stay positive for n >= 1.
    if (!(c0bar >= 0.0 && d0bar >= 0.0 && c1bar >= 0.0 && d1bar >= 0.0) ||
        !(c0bar + d0bar > 0.0) || !(c1bar + d1bar > 0.0) || !std::isfinite(c0bar + d0bar) ||
        !std::isfinite(c1bar + d1bar)) {
      throw DomainError("threshold constants must be nonnegative with positive weights");
    }
  }

  double c0bar() const { return c0bar_; }
  double d0bar() const { return d0bar_; }
  double c1bar() const { return c1bar_; }
  double d1bar() const { return d1bar_; }

  /// c_{0,n}: weight on the counterfactual false-alarm rate.
  double false_alarm_weight(std::size_t n) const {
    return c0bar_ * static_cast<double>(n) + d0bar_;
  }
  /// c_{1,n}: weight on the counterfactual miss rate.
  double miss_weight(std::size_t n) const { return c1bar_ * static_cast<double>(n) + d1bar_; }

  double tau(std::size_t n) const {
    if (n == 0) throw DomainError("threshold requires n >= 1");
    return false_alarm_weight(n) / miss_weight(n);
  }

 private:
  double c0bar_, d0bar_, c1bar_, d1bar_;
};

inline double threshold(const ThresholdSchedule& sched, std::size_t n) { return sched.tau(n); }

/// Orthogonal projector used as the "declare H1" measurement outcome.
template <OperatorScalar S>
class ProjectiveEffect {
 public:
  /// Checks idempotence within `tol`; rank is read off the trace.
  explicit ProjectiveEffect(HermitianOperator<S> op, double tol = 1e-9) : op_(std::move(op)) {
    const double residual = (op_.matrix() * op_.matrix() - op_.matrix()).cwiseAbs().maxCoeff();
    if (residual > tol) {
      std::ostringstream msg;
      msg << "effect is not idempotent (residual " << residual << ")";
      throw DomainError(msg.str());
    }
    rank_ = static_cast<std::size_t>(std::lround(op_.trace()));
  }

  static ProjectiveEffect from_trusted(HermitianOperator<S> op, std::size_t rank) {
    return ProjectiveEffect(std::move(op), rank, Trusted{});
  }
  static ProjectiveEffect zero(Index dim) {
    return from_trusted(HermitianOperator<S>::zero(dim), 0);
  }
  static ProjectiveEffect identity(Index dim) {
    return from_trusted(HermitianOperator<S>::identity(dim), static_cast<std::size_t>(dim));
  }

  const HermitianOperator<S>& op() const { return op_; }
  const Matrix<S>& matrix() const { return op_.matrix(); }
  std::size_t rank() const { return rank_; }
  Index dim() const { return op_.dim(); }

 private:
  struct Trusted {};
  ProjectiveEffect(HermitianOperator<S> op, std::size_t rank, Trusted)
      : op_(std::move(op)), rank_(rank) {}

  HermitianOperator<S> op_;
  std::size_t rank_ = 0;
};

struct HelstromOptions {
  /// Eigenvalues of rho1n - tau rho0n at or below this are left out of the projector.
  double zero_tolerance = 1e-12;
  std::size_t dimension_cap = qmat::kDefaultDimensionCap;
};

/// Projector onto the strictly positive eigenspace of rho1n - tau * rho0n.
template <OperatorScalar S>
ProjectiveEffect<S> helstrom_effect(const DensityOperator<S>& rho1n,
                                    const DensityOperator<S>& rho0n, double tau,
                                    const HelstromOptions& opts = {}) {
  if (rho1n.dim() != rho0n.dim()) throw ShapeMismatch("n-fold hypotheses differ in dimension");
  if (!(tau > 0.0)) throw DomainError("threshold must be positive");
  const HermitianOperator<S> gap(rho1n.matrix() - tau * rho0n.matrix());
  const auto spec = qmat::eig_hermitian(gap);
  Index positive = 0;
  while (positive < spec.dim() && spec.eigenvalues(positive) > opts.zero_tolerance) ++positive;
  const auto cols = spec.eigenvectors.leftCols(positive);
  return ProjectiveEffect<S>::from_trusted(HermitianOperator<S>((cols * cols.adjoint()).eval()),
                                           static_cast<std::size_t>(positive));
}

template <OperatorScalar S>
ProjectiveEffect<S> helstrom_effect(const HypothesisPair<S>& h, std::size_t n, double tau,
                                    const HelstromOptions& opts = {}) {
  const auto rho1n = qmat::tensor_power(h.rho1(), n, opts.dimension_cap);
  const auto rho0n = qmat::tensor_power(h.rho0(), n, opts.dimension_cap);
  return helstrom_effect(rho1n, rho0n, tau, opts);
}

/// Tr(effect * rho), clamped into [0, 1].
template <OperatorScalar S>
double outcome_probability(const ProjectiveEffect<S>& effect, const DensityOperator<S>& rho) {
  if (effect.dim() != rho.dim()) throw ShapeMismatch("effect and state differ in dimension");
  return std::clamp(qmat::trace_of_product(effect.matrix(), rho.matrix()), 0.0, 1.0);
}

struct DetectionRates {
  double p_d = 0.0;
  double p_f = 0.0;
};

template <OperatorScalar S>
DetectionRates rates(const ProjectiveEffect<S>& effect, const DensityOperator<S>& rho1n,
                     const DensityOperator<S>& rho0n) {
  return {outcome_probability(effect, rho1n), outcome_probability(effect, rho0n)};
}

/// Counterfactual risk c_{1,n} Tr((1 - effect) rho1^n) + c_{0,n} Tr(effect rho0^n).
template <OperatorScalar S>
double bayes_risk(const ProjectiveEffect<S>& effect, const HypothesisPair<S>& h, std::size_t n,
                  const ThresholdSchedule& sched,
                  std::size_t cap = qmat::kDefaultDimensionCap) {
  const auto rho1n = qmat::tensor_power(h.rho1(), n, cap);
  const auto rho0n = qmat::tensor_power(h.rho0(), n, cap);
  if (effect.dim() != rho1n.dim()) throw ShapeMismatch("effect does not act on the n-fold space");
  const auto r = rates(effect, rho1n, rho0n);
  return sched.miss_weight(n) * (1.0 - r.p_d) + sched.false_alarm_weight(n) * r.p_f;
}

/// Probability <phi| effect |phi> of declaring H1 on a pure received state.
template <OperatorScalar S>
double decide(const StateVector<S>& phi, const ProjectiveEffect<S>& effect) {
  if (phi.dim() != effect.dim()) throw ShapeMismatch("state and effect differ in dimension");
  const auto& v = phi.amplitudes();
  return std::clamp(qmat::real_part(v.dot(effect.matrix() * v)), 0.0, 1.0);
}

}  // namespace qspoof::detector
