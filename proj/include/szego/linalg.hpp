#ifndef SZEGO_LINALG_HPP
#define SZEGO_LINALG_HPP

// Thin LAPACK wrappers: dense symmetric eigenproblems restricted to the part
// of the spectrum below a cut, and singular values.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "szego/error.hpp"

namespace szego {

using Matrix = Eigen::MatrixXd; // column major, matches LAPACK
using Vector = Eigen::VectorXd;

struct EigenPairs {
  Vector values;  // ascending
  Matrix vectors; // one column per value (empty when not requested)
};

// Number of eigenvalues < x of the symmetric tridiagonal (diag, off), by the
// signs of the LDL^T pivots.
inline std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
  std::size_t count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
    q = diag[i] - x - (i == 0 ? 0.0 : b2 / q);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

namespace detail {
inline void check_info(lapack_int info, const char* routine) {
  if (info != 0)
    throw NumericalError(std::string(routine) + " failed (info = " + std::to_string(info) + ")");
}
} // namespace detail

// Eigenpairs of the symmetric tridiagonal matrix with eigenvalue < cut (MRRR).
inline EigenPairs tridiagonal_eigen_below(const std::vector<double>& diag, const std::vector<double>& off,
                                          double cut, bool want_vectors = true) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  EigenPairs r;
  if (n == 0) return r;
  const std::size_t m_expected = sturm_count(diag, off, cut);
  if (m_expected == 0) {
    r.values.resize(0);
    r.vectors.resize(n, 0);
    return r;
  }
  std::vector<double> d = diag;
  std::vector<double> e(off);
  e.resize(n); // dstevr uses e as workspace of length n
  Vector w(n);
  Matrix z;
  if (want_vectors) z.resize(n, static_cast<Eigen::Index>(m_expected));
  std::vector<lapack_int> isuppz(2 * n);
  lapack_int m = 0;
  // index range from the Sturm count is exact and avoids boundary ambiguity
  const lapack_int il = 1, iu = static_cast<lapack_int>(m_expected);
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', n, d.data(), e.data(), 0.0, 0.0, il, iu,
                     0.0, &m, w.data(), want_vectors ? z.data() : nullptr, n, isuppz.data());
  detail::check_info(info, "dstevr");
  r.values = w.head(m);
  if (want_vectors) {
    if (m == static_cast<lapack_int>(m_expected))
      r.vectors = std::move(z);
    else
      r.vectors = z.leftCols(m);
  }
  return r;
}

// Eigenpairs of the symmetric matrix A (lower triangle used) with eigenvalue < cut.
inline EigenPairs symmetric_eigen_below(Matrix A, double cut, bool want_vectors = true) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  EigenPairs r;
  if (n == 0) return r;
  // Gershgorin lower bound for the interval start
  double lo = std::numeric_limits<double>::infinity();
  for (lapack_int i = 0; i < n; ++i) lo = std::min(lo, A(i, i) - (A.col(i).cwiseAbs().sum() - std::abs(A(i, i))));
  if (cut <= lo) {
    r.vectors.resize(n, 0);
    return r;
  }
  Vector w(n);
  Matrix z;
  if (want_vectors) z.resize(n, n);
  std::vector<lapack_int> isuppz(2 * n);
  lapack_int m = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'V', 'L', n, A.data(), n, lo - 1.0, cut, 0, 0,
                     0.0, &m, w.data(), want_vectors ? z.data() : nullptr, n, isuppz.data());
  detail::check_info(info, "dsyevr");
  r.values = w.head(m);
  if (want_vectors) r.vectors = z.leftCols(m);
  return r;
}

// All eigenvalues of a symmetric matrix, ascending (divide and conquer).
inline Vector symmetric_eigenvalues(Matrix A) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Vector w(n);
  if (n == 0) return w;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, A.data(), n, w.data());
  detail::check_info(info, "dsyevd");
  return w;
}

// Singular values, descending.
inline Vector singular_values(Matrix A) {
  const lapack_int m = static_cast<lapack_int>(A.rows());
  const lapack_int n = static_cast<lapack_int>(A.cols());
  Vector s(std::min(m, n));
  if (m == 0 || n == 0) return s;
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, A.data(), m, s.data(), nullptr, 1, nullptr, 1);
  detail::check_info(info, "dgesdd");
  return s;
}

} // namespace szego

#endif // SZEGO_LINALG_HPP
