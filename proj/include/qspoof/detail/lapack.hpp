#pragma once

// Thin wrappers over the LAPACK divide-and-conquer Hermitian eigensolvers.

#include <complex>
#include <sstream>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>

#include "qspoof/error.hpp"

namespace qspoof::detail {

inline void throw_convergence(const char* routine, lapack_int info, double frobenius) {
  std::ostringstream msg;
  msg << routine << " failed (info=" << info << ") on an operator with Frobenius norm "
      << frobenius;
  if (info < 0) {
    throw Error(msg.str());
  }
  throw ConvergenceFailure(msg.str());
}

/// Overwrites `a` with eigenvectors (when `vectors`) and fills ascending eigenvalues.
inline void hermitian_eigen_inplace(Eigen::MatrixXd& a, Eigen::VectorXd& w, bool vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  w.resize(a.rows());
  if (n == 0) return;
  const double fro = a.norm();
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                                         a.data(), n, w.data());
  if (info != 0) throw_convergence("dsyevd", info, fro);
}

inline void hermitian_eigen_inplace(Eigen::MatrixXcd& a, Eigen::VectorXd& w, bool vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  w.resize(a.rows());
  if (n == 0) return;
  const double fro = a.norm();
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                                         a.data(), n, w.data());
  if (info != 0) throw_convergence("zheevd", info, fro);
}

}  // namespace qspoof::detail
