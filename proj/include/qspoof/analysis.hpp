#pragma once

// Information-theoretic and asymptotic diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "qspoof/qmat.hpp"

namespace qspoof::analysis {

using qmat::DensityOperator;
using qmat::FactorDims;
using qmat::HermitianOperator;
using qmat::Index;
using qmat::Matrix;
using qmat::OperatorScalar;
using qmat::RealVector;
using qmat::SpectralDecomposition;
using qmat::StateVector;
using qmat::Vector;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct EntropyOptions {
  /// Eigenvalues of the reference state at or below this count as its kernel.
  double kernel_tolerance = 1e-12;
  /// Mass of the first state on that kernel above this makes the entropy infinite.
  double support_violation = 1e-10;
};

/// S(nu1 || nu0) from eigen-data of both states; +infinity on support violation.
template <OperatorScalar S>
double relative_entropy(const SpectralDecomposition<S>& nu1, const SpectralDecomposition<S>& nu0,
                        const EntropyOptions& opts = {}) {
  if (nu1.dim() != nu0.dim()) throw ShapeMismatch("relative entropy needs equal dimensions");
  // overlap(j, k) = |<w_j | v_k>|^2 with w from nu0 and v from nu1.
  const Eigen::MatrixXd overlap = (nu0.eigenvectors.adjoint() * nu1.eigenvectors).cwiseAbs2();
  const Index d = nu1.dim();
  RealVector log_ref = RealVector::Zero(d);
  RealVector on_kernel = RealVector::Zero(d);
  for (Index j = 0; j < d; ++j) {
    const double s = nu0.eigenvalues(j);
    if (s > opts.kernel_tolerance) {
      log_ref(j) = std::log(s);
    } else {
      on_kernel(j) = 1.0;
    }
  }

  double self_term = 0.0;
  double cross_term = 0.0;
  double kernel_mass = 0.0;
  for (Index k = 0; k < d; ++k) {
    const double p = std::max(nu1.eigenvalues(k), 0.0);
    if (p == 0.0) continue;
    self_term += p * std::log(p);
    cross_term += p * log_ref.dot(overlap.col(k));
    kernel_mass += p * on_kernel.dot(overlap.col(k));
  }
  if (kernel_mass > opts.support_violation) return kInfinity;
  return self_term - cross_term;
}

template <OperatorScalar S>
double relative_entropy(const DensityOperator<S>& nu1, const DensityOperator<S>& nu0,
                        const EntropyOptions& opts = {}) {
  if (nu1.dim() != nu0.dim()) throw ShapeMismatch("relative entropy needs equal dimensions");
  if (nu1.matrix() == nu0.matrix()) return 0.0;
  return relative_entropy(qmat::eig_hermitian(nu1.op()), qmat::eig_hermitian(nu0.op()), opts);
}

/// Single-state specialization of the quantum Wasserstein-1 distance: the
/// trace-norm distance between the two states.
template <OperatorScalar S>
double wasserstein_single(const DensityOperator<S>& rho_prime, const DensityOperator<S>& rho) {
  if (rho_prime.dim() != rho.dim()) throw ShapeMismatch("states differ in dimension");
  return qmat::trace_norm(rho_prime.op() - rho.op());
}

struct RobustnessCheck {
  bool robust = false;
  double margin = 0.0;
  double distance = 0.0;
};

/// Output-state surrogate for local robustness: distance to the clean state within eps.
template <OperatorScalar S>
RobustnessCheck robustness_check(const DensityOperator<S>& rho_attacked,
                                 const DensityOperator<S>& rho_clean, double eps) {
  if (!(eps >= 0.0)) throw DomainError("robustness tolerance must be nonnegative");
  const double dist = wasserstein_single(rho_attacked, rho_clean);
  return {dist <= eps, eps - dist, dist};
}

struct ProductTest {
  bool is_product = false;
  /// Largest second singular value met while peeling off factors.
  double residual = 0.0;
};

namespace detail {

template <OperatorScalar S>
ProductTest product_test_raw(const Vector<S>& v, const FactorDims& dims, double tol) {
  if (dims.empty() || qmat::product_of(dims) != static_cast<std::size_t>(v.size())) {
    throw ShapeMismatch("factor dimensions do not multiply to the vector length");
  }
  ProductTest out{true, 0.0};
  Vector<S> current = v / v.norm();
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto d = static_cast<Index>(dims[k]);
    const Index rest = current.size() / d;
    // Column-major view: element (r, a) is the amplitude of |a>|r>.
    const Eigen::Map<const Matrix<S>> block(current.data(), rest, d);
    Eigen::JacobiSVD<Matrix<S>> svd(block, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double second = sv.size() > 1 ? sv(1) : 0.0;
    out.residual = std::max(out.residual, second);
    if (second > tol * std::max(sv(0), 1e-300)) {
      out.is_product = false;
      return out;
    }
    current = svd.matrixU().col(0);
  }
  return out;
}

/// Rotates each cluster of (numerically) equal eigenvalues so that its basis
/// diagonalizes compressions of seeded random local operators, one factor at
/// a time. Product bases hidden inside degenerate eigenspaces are recovered
/// this way.
template <OperatorScalar S>
void align_degenerate_clusters(SpectralDecomposition<S>& spec, const FactorDims& dims,
                               double cluster_tol, std::uint64_t seed) {
  const Index d = spec.dim();
  const double scale = std::max(1.0, spec.eigenvalues.cwiseAbs().maxCoeff());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix<S>> locals;
  for (auto dk : dims) {
    Matrix<S> r(dk, dk);
    for (Index i = 0; i < r.rows(); ++i) {
      for (Index j = 0; j < r.cols(); ++j) {
        if constexpr (std::is_same_v<S, qmat::Complex>) {
          r(i, j) = S(gauss(rng), gauss(rng));
        } else {
          r(i, j) = gauss(rng);
        }
      }
    }
    locals.emplace_back((r + r.adjoint()) / 2.0);
  }

  // Work list of [begin, end) column ranges that still need splitting.
  std::vector<std::pair<Index, Index>> clusters;
  for (Index b = 0; b < d;) {
    Index e = b + 1;
    while (e < d && spec.eigenvalues(b) - spec.eigenvalues(e) <= cluster_tol * scale) ++e;
    if (e - b > 1) clusters.emplace_back(b, e);
    b = e;
  }

  for (std::size_t f = 0; f < dims.size() && !clusters.empty(); ++f) {
    std::vector<std::pair<Index, Index>> next;
    for (auto [b, e] : clusters) {
      const Index m = e - b;
      const Matrix<S> basis = spec.eigenvectors.middleCols(b, m);
      const Matrix<S> mapped = qmat::apply_factor(locals[f], dims, f, basis);
      Matrix<S> compressed = basis.adjoint() * mapped;
      compressed = ((compressed + compressed.adjoint()) / 2.0).eval();
      Eigen::SelfAdjointEigenSolver<Matrix<S>> es(compressed);
      if (es.info() != Eigen::Success) throw ConvergenceFailure("cluster alignment failed");
      spec.eigenvectors.middleCols(b, m) = basis * es.eigenvectors();
      const RealVector& mu = es.eigenvalues();  // ascending
      const double local_scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
      for (Index s = 0; s < m;) {
        Index t = s + 1;
        while (t < m && mu(t) - mu(t - 1) <= cluster_tol * local_scale) ++t;
        if (t - s > 1) next.emplace_back(b + s, b + t);
        s = t;
      }
    }
    clusters = std::move(next);
  }
  qmat::detail::fix_phases(spec.eigenvectors);
}

}  // namespace detail

/// Tests whether a pure state factors over `dims` (numerical Schmidt rank one at every cut).
template <OperatorScalar S>
ProductTest product_test(const StateVector<S>& v, const FactorDims& dims, double tol = 1e-9) {
  return detail::product_test_raw(v.amplitudes(), dims, tol);
}

template <OperatorScalar S>
struct SeparabilityReport {
  struct Entry {
    double eigenvalue = 0.0;
    bool is_product = false;
    double residual = 0.0;
  };

  bool all_product = false;
  std::vector<Entry> per_vector;

  /// Single-factor marginals of the certified state; filled only when all_product.
  std::vector<DensityOperator<S>> factors;
  /// Trace distance between the certified state and the product of its marginals.
  std::optional<double> factor_distance;
  /// factor_distance is within the certification tolerance.
  bool factorizes = false;
};

struct SeparabilityOptions {
  double product_tolerance = 1e-9;
  /// Relative eigenvalue gap below which eigenvectors are treated as one eigenspace.
  double cluster_tolerance = 1e-8;
  double factor_tolerance = 1e-8;
  /// Compute marginals and the factorization certificate when every eigenvector is a product.
  bool certify_factors = true;
  std::uint64_t seed = 0x5eedULL;
};

/// Checks whether the eigenvectors of an operator on a composite space can be
/// taken as product vectors, and if so whether the associated state
/// factorizes into its single-factor marginals.
///
/// The certified state is `state` when given, otherwise the normalized
/// exponential exp(op) / Tr exp(op) rebuilt from the aligned eigen-data.
template <OperatorScalar S>
SeparabilityReport<S> separability_report(SpectralDecomposition<S> spec, const FactorDims& dims,
                                          const SeparabilityOptions& opts = {},
                                          const std::optional<DensityOperator<S>>& state = {}) {
  if (dims.empty() || qmat::product_of(dims) != static_cast<std::size_t>(spec.dim())) {
    throw ShapeMismatch("factor dimensions do not multiply to the operator dimension");
  }
  SeparabilityReport<S> report;
  if (dims.size() > 1) detail::align_degenerate_clusters(spec, dims, opts.cluster_tolerance, opts.seed);

  report.all_product = true;
  report.per_vector.reserve(spec.dim());
  for (Index j = 0; j < spec.dim(); ++j) {
    const auto t = detail::product_test_raw<S>(spec.eigenvectors.col(j), dims, opts.product_tolerance);
    report.per_vector.push_back({spec.eigenvalues(j), t.is_product, t.residual});
    report.all_product = report.all_product && t.is_product;
  }
  if (!report.all_product || !opts.certify_factors) return report;

  DensityOperator<S> certified = [&] {
    if (state) return *state;
    RealVector w = (spec.eigenvalues.array() - spec.eigenvalues.maxCoeff()).exp().matrix();
    w /= w.sum();
    return DensityOperator<S>::from_trusted(HermitianOperator<S>(
        (spec.eigenvectors * w.asDiagonal() * spec.eigenvectors.adjoint()).eval()));
  }();
  if (certified.dim() != spec.dim()) throw ShapeMismatch("state does not match the operator");

  for (std::size_t j = 0; j < dims.size(); ++j) {
    report.factors.push_back(qmat::partial_trace(certified, dims, {j}));
  }
  DensityOperator<S> product = report.factors.front();
  for (std::size_t j = 1; j < report.factors.size(); ++j) {
    product = qmat::tensor_product(product, report.factors[j]);
  }
  report.factor_distance = wasserstein_single(certified, product);
  report.factorizes = *report.factor_distance <= opts.factor_tolerance;
  return report;
}

template <OperatorScalar S>
SeparabilityReport<S> separability_report(const HermitianOperator<S>& op, const FactorDims& dims,
                                          const SeparabilityOptions& opts = {},
                                          const std::optional<DensityOperator<S>>& state = {}) {
  if (dims.empty() || qmat::product_of(dims) != static_cast<std::size_t>(op.dim())) {
    throw ShapeMismatch("factor dimensions do not multiply to the operator dimension");
  }
  return separability_report(qmat::eig_hermitian(op), dims, opts, state);
}

struct DecayPoint {
  std::size_t n = 0;
  double error = 0.0;
};

struct DecayFit {
  /// Fitted d ln(error) / dn, the empirical per-observation exponent.
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// (n, ln error) pairs actually used.
  std::vector<std::pair<std::size_t, double>> points;
  /// Points dropped because their error was exactly zero.
  std::size_t dropped_zero = 0;
};

/// Ordinary least squares of ln(error) against n.
inline DecayFit decay_rate_fit(const std::vector<DecayPoint>& points) {
  DecayFit fit;
  std::set<std::size_t> seen;
  for (const auto& p : points) {
    if (p.n == 0) throw DomainError("decay points need n >= 1");
    if (!seen.insert(p.n).second) throw DomainError("decay points need distinct n");
    if (!(p.error >= 0.0 && p.error <= 1.0)) throw DomainError("decay errors must lie in [0, 1]");
    if (p.error == 0.0) {
      ++fit.dropped_zero;
      continue;
    }
    fit.points.emplace_back(p.n, std::log(p.error));
  }
  if (fit.points.empty() && fit.dropped_zero > 0) {
    throw AllErrorsZero("every error is exactly zero; exponent is -infinity");
  }
  if (fit.points.size() < 3) throw InsufficientData("decay fit needs at least 3 nonzero points");

  const auto m = static_cast<double>(fit.points.size());
  double sx = 0.0, sy = 0.0;
  for (auto [n, y] : fit.points) {
    sx += static_cast<double>(n);
    sy += y;
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (auto [n, y] : fit.points) {
    const double dx = static_cast<double>(n) - mx, dy = y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (auto [n, y] : fit.points) {
    const double r = y - (fit.intercept + fit.slope * static_cast<double>(n));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace qspoof::analysis
