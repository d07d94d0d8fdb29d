#pragma once

// Dense operator algebra on finite-dimensional Hilbert spaces.
//
// Everything is templated on the scalar field: `double` for real-valued
// problems (the radar scenario) and `std::complex<double>` for the general
// quantum setting. Operators are immutable values.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qspoof/detail/lapack.hpp"
#include "qspoof/error.hpp"

namespace qspoof::qmat {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;

template <typename S>
concept OperatorScalar = std::same_as<S, double> || std::same_as<S, Complex>;

template <OperatorScalar S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <OperatorScalar S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

inline constexpr std::size_t kDefaultDimensionCap = 4096;
inline constexpr double kStateTolerance = 1e-10;
inline constexpr double kDefaultLogFloor = 1e-18;

/// Dimensions of the tensor factors of a composite space, outermost first.
using FactorDims = std::vector<std::size_t>;

/// Returns base^n, throwing DimensionCapExceeded once the result passes `cap`.
inline std::size_t checked_power(std::size_t base, std::size_t n, std::size_t cap) {
  std::size_t result = 1;
  bool overflow = false;
  for (std::size_t i = 0; i < n && base > 1; ++i) {
    if (__builtin_mul_overflow(result, base, &result)) {
      overflow = true;
      break;
    }
  }
  if (base == 0 && n > 0) result = 0;
  if (overflow || result > cap) {
    std::ostringstream msg;
    msg << "dimension " << base << "^" << n;
    if (!overflow) msg << " = " << result;
    msg << " exceeds cap " << cap;
    throw DimensionCapExceeded(msg.str());
  }
  return result;
}

inline std::size_t product_of(const FactorDims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

inline double real_part(double x) { return x; }
inline double real_part(const Complex& x) { return x.real(); }

template <OperatorScalar S>
class StateVector {
 public:
  /// Normalizes `amplitudes` to unit length. Zero vectors are rejected.
  explicit StateVector(Vector<S> amplitudes) : amps_(std::move(amplitudes)) {
    const double norm = amps_.norm();
    if (amps_.size() == 0 || !(norm > 0.0) || !std::isfinite(norm)) {
      throw DomainError("state vector must be nonempty with finite nonzero norm");
    }
    amps_ /= norm;
  }

  static StateVector basis(Index dim, Index i) {
    if (i < 0 || i >= dim) throw ShapeMismatch("basis index out of range");
    Vector<S> v = Vector<S>::Zero(dim);
    v(i) = S(1);
    return StateVector(std::move(v));
  }

  Index dim() const { return amps_.size(); }
  const Vector<S>& amplitudes() const { return amps_; }
  S operator[](Index i) const { return amps_(i); }

 private:
  Vector<S> amps_;
};

template <OperatorScalar S>
StateVector<S> tensor_product(const StateVector<S>& a, const StateVector<S>& b) {
  Vector<S> out = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval();
  return StateVector<S>(std::move(out));
}

/// Square matrix stored as (A + A^dagger) / 2.
template <OperatorScalar S>
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix<S> m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw ShapeMismatch("Hermitian operator must be square");
    }
    if (m_.rows() == 0) throw ShapeMismatch("Hermitian operator must be nonempty");
    symmetrize();
  }

  static HermitianOperator identity(Index dim) {
    return HermitianOperator(Matrix<S>::Identity(dim, dim));
  }
  static HermitianOperator zero(Index dim) { return HermitianOperator(Matrix<S>::Zero(dim, dim)); }
  static HermitianOperator diagonal(std::span<const double> entries) {
    Matrix<S> m = Matrix<S>::Zero(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = S(entries[i]);
    return HermitianOperator(std::move(m));
  }
  static HermitianOperator diagonal(std::initializer_list<double> entries) {
    return diagonal(std::span<const double>(entries.begin(), entries.size()));
  }
  static HermitianOperator projector(const StateVector<S>& v) {
    return HermitianOperator(v.amplitudes() * v.amplitudes().adjoint());
  }

  Index dim() const { return m_.rows(); }
  const Matrix<S>& matrix() const { return m_; }
  S operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return real_part(m_.trace()); }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    require_same_dim(a, b);
    return HermitianOperator(a.m_ + b.m_);
  }
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    require_same_dim(a, b);
    return HermitianOperator(a.m_ - b.m_);
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) {
    return HermitianOperator(s * a.m_);
  }

 private:
  static void require_same_dim(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw ShapeMismatch("operator dimensions differ");
  }

  void symmetrize() {
    const Index n = m_.rows();
    for (Index j = 0; j < n; ++j) {
      for (Index i = j; i < n; ++i) {
        const S avg = (m_(i, j) + conj_of(m_(j, i))) * 0.5;
        m_(i, j) = avg;
        m_(j, i) = conj_of(avg);
      }
    }
  }

  static S conj_of(const S& x) {
    if constexpr (std::is_same_v<S, Complex>) {
      return std::conj(x);
    } else {
      return x;
    }
  }

  Matrix<S> m_;
};

/// Real eigenvalues sorted descending with matching orthonormal eigenvector columns.
template <OperatorScalar S>
struct SpectralDecomposition {
  RealVector eigenvalues;
  Matrix<S> eigenvectors;

  Index dim() const { return eigenvalues.size(); }
  StateVector<S> vector(Index j) const { return StateVector<S>(eigenvectors.col(j)); }

  /// Sum_j f(lambda_j) |v_j><v_j|.
  template <typename F>
  HermitianOperator<S> apply(F&& f) const {
    RealVector mapped(dim());
    for (Index j = 0; j < dim(); ++j) mapped(j) = f(eigenvalues(j));
    return HermitianOperator<S>((eigenvectors * mapped.asDiagonal() * eigenvectors.adjoint()).eval());
  }

  HermitianOperator<S> reconstruct() const {
    return apply([](double x) { return x; });
  }
};

namespace detail {

/// Makes the first non-negligible amplitude of each column real and positive.
template <OperatorScalar S>
void fix_phases(Matrix<S>& vecs) {
  for (Index c = 0; c < vecs.cols(); ++c) {
    for (Index r = 0; r < vecs.rows(); ++r) {
      const double mag = std::abs(vecs(r, c));
      if (mag > 1e-12) {
        if constexpr (std::is_same_v<S, Complex>) {
          vecs.col(c) *= std::conj(vecs(r, c)) / mag;
        } else if (vecs(r, c) < 0) {
          vecs.col(c) *= -1.0;
        }
        break;
      }
    }
  }
}

/// Stable descending permutation of `values`.
inline std::vector<Index> descending_order(const RealVector& values) {
  std::vector<Index> order(values.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values(a) > values(b); });
  return order;
}

template <OperatorScalar S>
SpectralDecomposition<S> sorted_spectral(const RealVector& values, const Matrix<S>& vectors) {
  const auto order = descending_order(values);
  SpectralDecomposition<S> out;
  out.eigenvalues.resize(values.size());
  out.eigenvectors.resize(vectors.rows(), vectors.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.eigenvalues(k) = values(order[k]);
    out.eigenvectors.col(k) = vectors.col(order[k]);
  }
  fix_phases(out.eigenvectors);
  return out;
}

}  // namespace detail

template <OperatorScalar S>
SpectralDecomposition<S> eig_hermitian(const HermitianOperator<S>& a) {
  Matrix<S> work = a.matrix();
  RealVector w;
  qspoof::detail::hermitian_eigen_inplace(work, w, true);
  // LAPACK returns ascending order.
  return detail::sorted_spectral<S>(w, work);
}

/// Eigenvalues only, sorted descending. Roughly a third of the cost of eig_hermitian.
template <OperatorScalar S>
RealVector eigenvalues_hermitian(const HermitianOperator<S>& a) {
  Matrix<S> work = a.matrix();
  RealVector w;
  qspoof::detail::hermitian_eigen_inplace(work, w, false);
  return w.reverse().eval();
}

/// Unit-trace positive semidefinite operator.
template <OperatorScalar S>
class DensityOperator {
 public:
  /// Validates positivity and unit trace within `tol`. Slightly negative
  /// eigenvalues are clamped to zero.
  explicit DensityOperator(HermitianOperator<S> op, double tol = kStateTolerance)
      : op_(std::move(op)) {
    const double tr = op_.trace();
    if (std::abs(tr - 1.0) > tol) {
      std::ostringstream msg;
      msg << "density operator trace " << tr << " differs from 1";
      throw DomainError(msg.str());
    }
    auto spec = eig_hermitian(op_);
    const double smallest = spec.eigenvalues(spec.dim() - 1);
    if (smallest < -tol) {
      std::ostringstream msg;
      msg << "density operator has eigenvalue " << smallest << " below zero";
      throw DomainError(msg.str());
    }
    if (smallest < 0.0) {
      RealVector clamped = spec.eigenvalues.cwiseMax(0.0);
      clamped /= clamped.sum();
      op_ = HermitianOperator<S>(
          (spec.eigenvectors * clamped.asDiagonal() * spec.eigenvectors.adjoint()).eval());
    }
  }

  /// Skips validation. Only for operators that are states by construction
  /// (tensor powers, partial traces, normalized exponentials of states).
  static DensityOperator from_trusted(HermitianOperator<S> op) {
    return DensityOperator(std::move(op), Trusted{});
  }

  static DensityOperator pure(const StateVector<S>& v) {
    return from_trusted(HermitianOperator<S>::projector(v));
  }

  static DensityOperator diagonal(std::initializer_list<double> probabilities) {
    return DensityOperator(HermitianOperator<S>::diagonal(probabilities));
  }

  const HermitianOperator<S>& op() const { return op_; }
  const Matrix<S>& matrix() const { return op_.matrix(); }
  Index dim() const { return op_.dim(); }

 private:
  struct Trusted {};
  DensityOperator(HermitianOperator<S> op, Trusted) : op_(std::move(op)) {}

  HermitianOperator<S> op_;
};

template <OperatorScalar S>
HermitianOperator<S> tensor_product(const HermitianOperator<S>& a, const HermitianOperator<S>& b) {
  return HermitianOperator<S>(Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval());
}

template <OperatorScalar S>
DensityOperator<S> tensor_product(const DensityOperator<S>& a, const DensityOperator<S>& b) {
  return DensityOperator<S>::from_trusted(tensor_product(a.op(), b.op()));
}

template <OperatorScalar S>
HermitianOperator<S> tensor_power(const HermitianOperator<S>& a, std::size_t n,
                                  std::size_t cap = kDefaultDimensionCap) {
  if (n == 0) throw DomainError("tensor power requires n >= 1");
  checked_power(static_cast<std::size_t>(a.dim()), n, cap);
  Matrix<S> acc = a.matrix();
  for (std::size_t i = 1; i < n; ++i) {
    acc = Eigen::kroneckerProduct(acc, a.matrix()).eval();
  }
  return HermitianOperator<S>(std::move(acc));
}

template <OperatorScalar S>
DensityOperator<S> tensor_power(const DensityOperator<S>& a, std::size_t n,
                                std::size_t cap = kDefaultDimensionCap) {
  return DensityOperator<S>::from_trusted(tensor_power(a.op(), n, cap));
}

/// Sum over positions j of I (x) ... (x) a (at j) (x) ... (x) I on n factors.
template <OperatorScalar S>
HermitianOperator<S> local_sum(const HermitianOperator<S>& a, std::size_t n,
                               std::size_t cap = kDefaultDimensionCap) {
  if (n == 0) throw DomainError("local sum requires n >= 1");
  checked_power(static_cast<std::size_t>(a.dim()), n, cap);
  const Index d = a.dim();
  Matrix<S> acc = a.matrix();
  Index left = d;
  for (std::size_t i = 1; i < n; ++i) {
    Matrix<S> next = Eigen::kroneckerProduct(acc, Matrix<S>::Identity(d, d)).eval();
    next += Eigen::kroneckerProduct(Matrix<S>::Identity(left, left), a.matrix()).eval();
    acc = std::move(next);
    left *= d;
  }
  return HermitianOperator<S>(std::move(acc));
}

/// Eigen-data of a^{(x)n} built from that of a; eigenvectors are product vectors.
template <OperatorScalar S>
SpectralDecomposition<S> tensor_power(const SpectralDecomposition<S>& a, std::size_t n,
                                      std::size_t cap = kDefaultDimensionCap) {
  if (n == 0) throw DomainError("tensor power requires n >= 1");
  checked_power(static_cast<std::size_t>(a.dim()), n, cap);
  RealVector values = a.eigenvalues;
  Matrix<S> vectors = a.eigenvectors;
  for (std::size_t i = 1; i < n; ++i) {
    values = Eigen::kroneckerProduct(values, a.eigenvalues).eval();
    vectors = Eigen::kroneckerProduct(vectors, a.eigenvectors).eval();
  }
  return detail::sorted_spectral<S>(values, vectors);
}

/// Computes (I (x) ... (x) factor_op (at position `which`) (x) ... (x) I) * m.
template <OperatorScalar S>
Matrix<S> apply_factor(const Matrix<S>& factor_op, const FactorDims& dims, std::size_t which,
                       const Matrix<S>& m) {
  if (which >= dims.size()) throw ShapeMismatch("factor index out of range");
  const auto total = static_cast<Index>(product_of(dims));
  if (m.rows() != total) throw ShapeMismatch("operand rows do not match factor dimensions");
  const auto d = static_cast<Index>(dims[which]);
  if (factor_op.rows() != d || factor_op.cols() != d) {
    throw ShapeMismatch("factor operator has wrong dimension");
  }
  Index inner = 1;
  for (std::size_t k = which + 1; k < dims.size(); ++k) inner *= static_cast<Index>(dims[k]);
  const Index outer = total / (d * inner);

  Matrix<S> out(m.rows(), m.cols());
  Vector<S> slice(d);
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index o = 0; o < outer; ++o) {
      for (Index in = 0; in < inner; ++in) {
        const Index base = o * d * inner + in;
        for (Index a = 0; a < d; ++a) slice(a) = m(base + a * inner, c);
        const Vector<S> mapped = factor_op * slice;
        for (Index a = 0; a < d; ++a) out(base + a * inner, c) = mapped(a);
      }
    }
  }
  return out;
}

/// Computes (factor_op^{(x)n}) * m without forming the Kronecker power.
template <OperatorScalar S>
Matrix<S> apply_kron_power(const Matrix<S>& factor_op, std::size_t n, const Matrix<S>& m) {
  const FactorDims dims(n, static_cast<std::size_t>(factor_op.rows()));
  Matrix<S> acc = m;
  for (std::size_t j = 0; j < n; ++j) acc = apply_factor(factor_op, dims, j, acc);
  return acc;
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their original order.
template <OperatorScalar S>
HermitianOperator<S> partial_trace(const HermitianOperator<S>& a, const FactorDims& dims,
                                   std::vector<std::size_t> keep) {
  if (dims.empty() || product_of(dims) != static_cast<std::size_t>(a.dim())) {
    throw ShapeMismatch("factor dimensions do not multiply to the operator dimension");
  }
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (auto k : keep) {
    if (k >= dims.size()) throw ShapeMismatch("kept factor index out of range");
  }

  const std::size_t nf = dims.size();
  std::vector<std::size_t> stride(nf);
  std::size_t s = 1;
  for (std::size_t k = nf; k-- > 0;) {
    stride[k] = s;
    s *= dims[k];
  }
  std::vector<bool> kept(nf, false);
  for (auto k : keep) kept[k] = true;

  // Offsets of every kept (resp. traced) multi-index inside the full index.
  auto offsets = [&](bool want_kept) {
    std::vector<Index> offs{0};
    for (std::size_t k = 0; k < nf; ++k) {
      if (kept[k] != want_kept) continue;
      std::vector<Index> next;
      next.reserve(offs.size() * dims[k]);
      for (Index base : offs) {
        for (std::size_t i = 0; i < dims[k]; ++i) {
          next.push_back(base + static_cast<Index>(i * stride[k]));
        }
      }
      offs = std::move(next);
    }
    return offs;
  };
  const auto keep_off = offsets(true);
  const auto trace_off = offsets(false);

  const auto dk = static_cast<Index>(keep_off.size());
  Matrix<S> out = Matrix<S>::Zero(dk, dk);
  const auto& m = a.matrix();
  for (Index c = 0; c < dk; ++c) {
    for (Index r = 0; r < dk; ++r) {
      S acc{0};
      for (Index t : trace_off) acc += m(keep_off[r] + t, keep_off[c] + t);
      out(r, c) = acc;
    }
  }
  return HermitianOperator<S>(std::move(out));
}

template <OperatorScalar S>
DensityOperator<S> partial_trace(const DensityOperator<S>& a, const FactorDims& dims,
                                 std::vector<std::size_t> keep) {
  return DensityOperator<S>::from_trusted(partial_trace(a.op(), dims, std::move(keep)));
}

/// Applies f to the spectrum. Eigenvalues below `floor`, when given, are
/// raised to `floor` first.
template <OperatorScalar S, typename F>
HermitianOperator<S> matrix_function(const HermitianOperator<S>& a, F&& f,
                                     std::optional<double> floor = std::nullopt) {
  const auto spec = eig_hermitian(a);
  return spec.apply([&](double x) { return f(floor ? std::max(x, *floor) : x); });
}

template <OperatorScalar S>
HermitianOperator<S> matrix_exp(const HermitianOperator<S>& a) {
  return matrix_function(a, [](double x) { return std::exp(x); });
}

/// Natural logarithm. Rank-deficient input needs a spectral floor.
template <OperatorScalar S>
HermitianOperator<S> matrix_log(const HermitianOperator<S>& a,
                                std::optional<double> floor = std::nullopt) {
  const auto spec = eig_hermitian(a);
  if (floor) {
    if (!(*floor > 0.0)) throw DomainError("logarithm floor must be positive");
  } else if (spec.eigenvalues(spec.dim() - 1) <= 0.0) {
    throw DomainError("logarithm of an operator with nonpositive eigenvalue requires a floor");
  }
  return spec.apply([&](double x) { return std::log(floor ? std::max(x, *floor) : x); });
}

/// Schatten-1 norm: sum of absolute eigenvalues.
template <OperatorScalar S>
double trace_norm(const HermitianOperator<S>& a) {
  return eigenvalues_hermitian(a).cwiseAbs().sum();
}

/// Largest absolute eigenvalue.
template <OperatorScalar S>
double operator_norm(const HermitianOperator<S>& a) {
  return eigenvalues_hermitian(a).cwiseAbs().maxCoeff();
}

/// Tr(a b) for Hermitian a, b in O(dim^2).
template <OperatorScalar S>
double trace_of_product(const Matrix<S>& a, const Matrix<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch("trace of product needs equal shapes");
  }
  return real_part(a.transpose().cwiseProduct(b).sum());
}

/// Orthogonal projector onto the span of eigenvectors with eigenvalue above `tol`.
template <OperatorScalar S>
Matrix<S> support_projector(const SpectralDecomposition<S>& spec, double tol) {
  Index r = 0;
  while (r < spec.dim() && spec.eigenvalues(r) > tol) ++r;
  const auto cols = spec.eigenvectors.leftCols(r);
  return cols * cols.adjoint();
}

}  // namespace qspoof::qmat
