#pragma once

// Stackelberg attacker: closed-form best-response distortions against a
// committed detector, the attacker's objective, and a finite-difference
// stationarity check.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "qspoof/analysis.hpp"
#include "qspoof/detector.hpp"
#include "qspoof/qmat.hpp"

namespace qspoof::attacker {

using detector::ProjectiveEffect;
using qmat::DensityOperator;
using qmat::HermitianOperator;
using qmat::Index;
using qmat::Matrix;
using qmat::OperatorScalar;
using qmat::RealVector;
using qmat::SpectralDecomposition;

/// Regularization beta_n = lambda^n. lambda = 0 means no attack at all when
/// attack_off_at_zero is set.
struct AttackConfig {
  double lambda = 0.0;
  bool attack_off_at_zero = true;

  AttackConfig() = default;
  explicit AttackConfig(double lam, bool off_at_zero = true)
      : lambda(lam), attack_off_at_zero(off_at_zero) {
    if (!(lam >= 0.0) || !std::isfinite(lam)) throw DomainError("lambda must be finite and >= 0");
  }
};

/// beta_n for the configuration; std::nullopt is the attack-off value.
inline std::optional<double> beta(const AttackConfig& cfg, std::size_t n) {
  if (n == 0) throw DomainError("beta requires n >= 1");
  if (cfg.lambda == 0.0 && cfg.attack_off_at_zero) return std::nullopt;
  return std::pow(cfg.lambda, static_cast<double>(n));
}

struct BestResponseOptions {
  double log_floor = qmat::kDefaultLogFloor;
  /// Single-copy eigenvalues of rho1 above this span its support.
  double support_tolerance = 1e-12;
  std::size_t dimension_cap = qmat::kDefaultDimensionCap;
};

/// Best response together with the eigen-data it was built from.
template <OperatorScalar S>
struct Distortion {
  DensityOperator<S> state;
  /// Eigen-data of the exponent ln(rho1^n) - effect / beta_n; same eigenvectors as `state`.
  SpectralDecomposition<S> exponent;
  /// Eigenvalues of `state`, aligned with `exponent` columns.
  RealVector weights;
};

/// Normalized exp(ln rho1^{(x)n} - effect / beta_n).
///
/// ln rho1^{(x)n} is assembled as the sum of single-copy logarithms, each
/// floored at `log_floor`. When rho1 is rank deficient, the blocks of the
/// effect that couple supp(rho1^{(x)n}) to its kernel are dropped: that is
/// the floor -> 0 limit of the exponential, and it leaves effects already
/// supported inside supp(rho1^{(x)n}) unchanged.
template <OperatorScalar S>
Distortion<S> distort_rho1(const DensityOperator<S>& rho1, const ProjectiveEffect<S>& effect,
                           double beta_n, std::size_t n, const BestResponseOptions& opts = {}) {
  if (!(beta_n > 0.0) || !std::isfinite(beta_n)) throw DomainError("beta_n must be positive");
  const auto dim = qmat::checked_power(static_cast<std::size_t>(rho1.dim()), n, opts.dimension_cap);
  if (static_cast<std::size_t>(effect.dim()) != dim) {
    throw ShapeMismatch("effect does not act on the n-fold space");
  }

  const auto local = qmat::eig_hermitian(rho1.op());
  const auto local_log = local.apply([&](double x) { return std::log(std::max(x, opts.log_floor)); });
  const auto log_power = qmat::local_sum(local_log, n, opts.dimension_cap);

  Matrix<S> penalty = effect.matrix();
  const Index local_rank = (local.eigenvalues.array() > opts.support_tolerance).count();
  if (local_rank < rho1.dim()) {
    const Matrix<S> p1 = qmat::support_projector(local, opts.support_tolerance);
    const Matrix<S> left = qmat::apply_kron_power(p1, n, penalty);  // P Pi
    const Matrix<S> both = qmat::apply_kron_power(p1, n, Matrix<S>(left.adjoint()));  // P Pi P
    penalty = penalty - left - left.adjoint() + 2.0 * both;
  }

  const HermitianOperator<S> exponent_op(log_power.matrix() - penalty / beta_n);
  auto spec = qmat::eig_hermitian(exponent_op);
  RealVector weights = (spec.eigenvalues.array() - spec.eigenvalues(0)).exp().matrix();
  weights /= weights.sum();
  auto state = DensityOperator<S>::from_trusted(HermitianOperator<S>(
      (spec.eigenvectors * weights.asDiagonal() * spec.eigenvectors.adjoint()).eval()));
  return {std::move(state), std::move(spec), std::move(weights)};
}

/// Attacker's optimal distortion of the H1 state. `beta_n == std::nullopt`
/// (attack off) and the zero effect both return rho1^{(x)n} unchanged.
template <OperatorScalar S>
DensityOperator<S> best_response_rho1(const DensityOperator<S>& rho1,
                                      const ProjectiveEffect<S>& effect,
                                      std::optional<double> beta_n, std::size_t n,
                                      const BestResponseOptions& opts = {}) {
  if (beta_n && !(*beta_n > 0.0)) throw DomainError("beta_n must be positive");
  if (!beta_n || effect.rank() == 0) {
    const auto clean = qmat::tensor_power(rho1, n, opts.dimension_cap);
    if (clean.dim() != effect.dim()) throw ShapeMismatch("effect does not act on the n-fold space");
    return clean;
  }
  return distort_rho1(rho1, effect, *beta_n, n, opts).state;
}

/// The attacker leaves the H0 state alone.
template <OperatorScalar S>
DensityOperator<S> best_response_rho0(const DensityOperator<S>& rho0, std::size_t n,
                                      std::size_t cap = qmat::kDefaultDimensionCap) {
  return qmat::tensor_power(rho0, n, cap);
}

/// Tr(effect rho1n) + beta_n S(rho1n || clean1) + beta_n S(rho0n || clean0).
/// Returns +infinity when either relative entropy is infinite.
template <OperatorScalar S>
double attacker_objective(const DensityOperator<S>& rho1n, const DensityOperator<S>& rho0n,
                          const ProjectiveEffect<S>& effect,
                          const DensityOperator<S>& rho1_clean_n,
                          const DensityOperator<S>& rho0_clean_n, double beta_n) {
  if (!(beta_n > 0.0)) throw DomainError("beta_n must be positive");
  if (rho1n.dim() != effect.dim() || rho0n.dim() != effect.dim() ||
      rho1_clean_n.dim() != effect.dim() || rho0_clean_n.dim() != effect.dim()) {
    throw ShapeMismatch("attacker objective operands differ in dimension");
  }
  const double s1 = analysis::relative_entropy(rho1n, rho1_clean_n);
  const double s0 = analysis::relative_entropy(rho0n, rho0_clean_n);
  if (std::isinf(s1) || std::isinf(s0)) return analysis::kInfinity;
  return qmat::trace_of_product(effect.matrix(), rho1n.matrix()) + beta_n * (s1 + s0);
}

struct StationarityOptions {
  double step = 1e-5;
  /// Eigenvalues of the tested state above this span the admissible directions.
  double support_tolerance = 1e-12;
  std::uint64_t seed = 20240101ULL;
};

/// Largest |d/dt u_A(rho + t H)| over random traceless Hermitian directions H
/// supported in supp(rho), by central differences.
///
/// Directions have the form rho^{1/2} G rho^{1/2} in the eigenbasis of rho
/// with G a unit-Frobenius Gaussian Hermitian matrix, shifted to zero trace.
/// This keeps rho + t H positive and the difference quotient well
/// conditioned even when rho has small eigenvalues.
template <OperatorScalar S>
double verify_stationarity(const DensityOperator<S>& rho1_star, const ProjectiveEffect<S>& effect,
                           const DensityOperator<S>& rho1_clean_n, double beta_n,
                           std::size_t directions, const StationarityOptions& opts = {}) {
  if (!(beta_n > 0.0)) throw DomainError("beta_n must be positive");
  if (rho1_star.dim() != effect.dim() || rho1_clean_n.dim() != effect.dim()) {
    throw ShapeMismatch("stationarity operands differ in dimension");
  }
  if (directions == 0) throw DomainError("need at least one direction");

  const auto star = qmat::eig_hermitian(rho1_star.op());
  const auto clean = qmat::eig_hermitian(rho1_clean_n.op());
  Index r = 0;
  while (r < star.dim() && star.eigenvalues(r) > opts.support_tolerance) ++r;
  if (r < 2) throw DomainError("support too small to admit a traceless direction");

  const Matrix<S>& pi = effect.matrix();
  auto objective = [&](const Matrix<S>& rho) {
    auto spec = qmat::eig_hermitian(HermitianOperator<S>(rho));
    spec.eigenvalues = spec.eigenvalues.cwiseMax(0.0);
    spec.eigenvalues /= spec.eigenvalues.sum();
    const double detection =
        qmat::real_part((spec.eigenvectors.adjoint() * pi * spec.eigenvectors).diagonal().dot(
            spec.eigenvalues.template cast<S>()));
    const double entropy = analysis::relative_entropy(spec, clean);
    return detection + beta_n * entropy;
  };

  const RealVector sqrt_p = star.eigenvalues.head(r).cwiseSqrt();
  const RealVector p = star.eigenvalues.head(r);
  const auto basis = star.eigenvectors.leftCols(r);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double worst = 0.0;
  for (std::size_t k = 0; k < directions; ++k) {
    Matrix<S> g(r, r);
    for (Index i = 0; i < r; ++i) {
      for (Index j = 0; j < r; ++j) {
        if constexpr (std::is_same_v<S, qmat::Complex>) {
          g(i, j) = S(gauss(rng), gauss(rng));
        } else {
          g(i, j) = gauss(rng);
        }
      }
    }
    g = ((g + g.adjoint()) / 2.0).eval();
    g /= g.norm();
    Matrix<S> h_sub = sqrt_p.asDiagonal() * g * sqrt_p.asDiagonal();
    const double tr = qmat::real_part(h_sub.trace());
    h_sub -= (tr / p.sum()) * Matrix<S>(p.template cast<S>().asDiagonal());
    const Matrix<S> h = basis * h_sub * basis.adjoint();

    const double up = objective(rho1_star.matrix() + opts.step * h);
    const double down = objective(rho1_star.matrix() - opts.step * h);
    worst = std::max(worst, std::abs(up - down) / (2.0 * opts.step));
  }
  return worst;
}

enum class KrausConvention {
  /// sum_k E_k E_k^dagger = I
  kOutputSide,
  /// sum_k E_k^dagger E_k = I (trace preservation)
  kInputSide,
};

template <OperatorScalar S>
class KrausChannel {
 public:
  explicit KrausChannel(std::vector<Matrix<S>> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw DomainError("Kraus channel needs at least one operator");
    const Index d = ops_.front().rows();
    for (const auto& e : ops_) {
      if (e.rows() != d || e.cols() != d) throw ShapeMismatch("Kraus operators must be square and equal-sized");
    }
  }

  const std::vector<Matrix<S>>& ops() const { return ops_; }
  Index dim() const { return ops_.front().rows(); }

 private:
  std::vector<Matrix<S>> ops_;
};

struct CompletenessCheck {
  bool complete = false;
  /// Max-entry deviation of the Kraus sum from the identity.
  double residual = 0.0;
};

template <OperatorScalar S>
CompletenessCheck kraus_completeness_check(const KrausChannel<S>& ch,
                                           KrausConvention convention = KrausConvention::kOutputSide,
                                           double tol = 1e-9) {
  Matrix<S> sum = Matrix<S>::Zero(ch.dim(), ch.dim());
  for (const auto& e : ch.ops()) {
    sum += convention == KrausConvention::kOutputSide ? Matrix<S>(e * e.adjoint())
                                                      : Matrix<S>(e.adjoint() * e);
  }
  const double residual = (sum - Matrix<S>::Identity(ch.dim(), ch.dim())).cwiseAbs().maxCoeff();
  return {residual <= tol, residual};
}

}  // namespace qspoof::attacker
