#ifndef SZEGO_SCHATTEN_HPP
#define SZEGO_SCHATTEN_HPP

// Trace functionals, Schatten (quasi-)norms and the off-diagonal block
// Q_L = 1_{complement} P 1_{Lambda_L}, plus the norm inequalities relating
// the perturbed and free truncated projections.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "szego/error.hpp"
#include "szego/lattice.hpp"
#include "szego/linalg.hpp"
#include "szego/spectrum.hpp"
#include "szego/testfn.hpp"

namespace szego {

// sum_i h(lambda_i), zeros by rank included as h(0)
inline double trace_h(const TruncatedSpectrum& spec, const TestFunction& h) {
  double s = 0.0;
  for (double v : spec.values) s += h(v);
  if (spec.implicit_zeros > 0) s += double(spec.implicit_zeros) * h(0.0);
  if (!std::isfinite(s)) throw NumericalError("test function '" + h.label + "' returned a non-finite value");
  return s;
}

struct SchattenNorm {
  double norm = 0.0;  // (sum sigma^p)^{1/p}
  double power = 0.0; // sum sigma^p
};

inline SchattenNorm schatten_qnorm(const Vector& sigma, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("Schatten index p must be positive");
  SchattenNorm r;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) < 0.0) throw ConfigError("singular values must be non-negative");
    if (sigma(i) > 0.0) r.power += std::pow(sigma(i), p);
  }
  r.norm = std::pow(r.power, 1.0 / p);
  return r;
}

namespace detail {

// Upper-triangular R with X = Q R, Q with orthonormal columns.
inline Matrix qr_factor(const Matrix& X) {
  if (X.rows() == 0 || X.cols() == 0) return Matrix(0, X.cols());
  Eigen::HouseholderQR<Matrix> qr(X);
  const Eigen::Index k = std::min(X.rows(), X.cols());
  return qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

// Any R with R^T R = X^T X, from the Gram eigendecomposition. Cheaper than
// Householder QR for very tall X at the cost of ~sqrt(eps) absolute accuracy
// on tiny singular values.
inline Matrix gram_factor(const Matrix& X) {
  Matrix G = Matrix::Zero(X.cols(), X.cols());
  if (X.rows() > 0) G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const Vector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return lam.asDiagonal() * es.eigenvectors().transpose();
}

inline constexpr double kQrFlopLimit = 4e9;

inline Matrix row_factor(const Matrix& X) {
  const double flops = double(X.rows()) * double(X.cols()) * double(X.cols());
  return flops <= kQrFlopLimit ? qr_factor(X) : gram_factor(X);
}

inline Matrix rows_of(const Matrix& X, const std::vector<Eigen::Index>& idx) { return X(idx, Eigen::all); }

inline Matrix hstack(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), a.cols() + b.cols());
  c << a, b;
  return c;
}

} // namespace detail

// Singular values of Q_L = V_B V_A^T (B = complement, A = region): the nonzero
// ones are those of R_B R_A^T for row factors of V_B and V_A.
inline Vector q_block(const FermiProjection& fp, const Domain& region, const LatticeOperator& op) {
  if (fp.size() != op.size()) throw ConfigError("projection and lattice sizes differ");
  const auto split = split_sites(op, region);
  if (split.outside.empty()) throw ConfigError("Q block undefined: the region covers the whole box");
  if (fp.count == 0 || split.inside.empty()) return Vector(0);
  const Matrix RA = detail::row_factor(detail::rows_of(fp.basis, split.inside));
  const Matrix RB = detail::row_factor(detail::rows_of(fp.basis, split.outside));
  return singular_values(RB * RA.transpose());
}

struct NormReport {
  double L = 0.0;
  double q2 = 0.0;       // ||Q_L||_2^2
  double q0_2 = 0.0;     // ||Q_{L,0}||_2^2
  double qdiff2 = 0.0;   // ||Q_L - Q_{L,0}||_2
  std::vector<std::pair<double, double>> qdiff2s; // (s, ||Q_L - Q_{L,0}||_{2s}^{2s})
  double pdiff2 = 0.0;   // ||P_L - P_{L,0}||_2
  double trdiff = 0.0;   // tr(P_L - P_{L,0})
  double phi = 0.0;      // ||dQ||_2^2 + 2 ||dQ||_2 ||Q_{L,0}||_2
  Vector qdiff_sigma;    // singular values of Q_L - Q_{L,0}
};

// Both projections must live on the same lattice geometry.
inline NormReport diff_stats(const FermiProjection& P, const FermiProjection& P0, const Domain& region,
                             const LatticeOperator& op, const std::vector<double>& s_list = {0.6, 0.8, 1.0}) {
  if (P.size() != op.size() || P0.size() != op.size())
    throw ConfigError("diff_stats: geometry mismatch between the projections and the lattice");
  const auto split = split_sites(op, region);
  if (split.outside.empty()) throw ConfigError("Q block undefined: the region covers the whole box");
  NormReport r;
  r.L = region.scale();

  const Matrix VA = detail::rows_of(P.basis, split.inside), VB = detail::rows_of(P.basis, split.outside);
  const Matrix WA = detail::rows_of(P0.basis, split.inside), WB = detail::rows_of(P0.basis, split.outside);

  const Vector sq = singular_values(detail::row_factor(VB) * detail::row_factor(VA).transpose());
  const Vector sq0 = singular_values(detail::row_factor(WB) * detail::row_factor(WA).transpose());
  r.q2 = sq.squaredNorm();
  r.q0_2 = sq0.squaredNorm();

  // Q_L - Q_{L,0} = [V_B W_B] D [V_A W_A]^T, P_L - P_{L,0} = [V_A W_A] D [V_A W_A]^T,
  // D = diag(I, -I)
  const Eigen::Index m = P.basis.cols(), m0 = P0.basis.cols();
  Vector dsign(m + m0);
  dsign << Vector::Ones(m), -Vector::Ones(m0);
  const Matrix XA = detail::hstack(VA, WA), XB = detail::hstack(VB, WB);
  if (m + m0 > 0 && XA.rows() > 0) {
    const Matrix RA = detail::row_factor(XA);
    const Matrix RB = detail::row_factor(XB);
    r.qdiff_sigma = singular_values(RB * dsign.asDiagonal() * RA.transpose());
    const Matrix M = RA * dsign.asDiagonal() * RA.transpose();
    r.pdiff2 = M.norm(); // Frobenius norm is invariant under the orthonormal Q
  } else {
    r.qdiff_sigma = Vector(0);
  }
  r.qdiff2 = r.qdiff_sigma.norm();
  for (double s : s_list) r.qdiff2s.emplace_back(s, schatten_qnorm(r.qdiff_sigma, 2.0 * s).power);
  r.trdiff = VA.squaredNorm() - WA.squaredNorm();
  r.phi = r.qdiff2 * r.qdiff2 + 2.0 * r.qdiff2 * std::sqrt(r.q0_2);
  return r;
}

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// ||A||_{p_theta} <= ||A||_{p0}^{1-theta} ||A||_{p1}^theta with
// 1/p_theta = theta/p1 + (1-theta)/p0
inline InequalityCheck interpolation_check(const Vector& sigma, double p0, double p1, double theta) {
  if (!(p0 > 0.0) || !(p1 >= p0)) throw ConfigError("interpolation needs 0 < p0 <= p1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("interpolation needs theta in [0, 1]");
  const double pt = 1.0 / (theta / p1 + (1.0 - theta) / p0);
  InequalityCheck c;
  c.lhs = schatten_qnorm(sigma, pt).norm;
  c.rhs = std::pow(schatten_qnorm(sigma, p0).norm, 1.0 - theta) * std::pow(schatten_qnorm(sigma, p1).norm, theta);
  c.holds = c.lhs <= c.rhs * (1.0 + 1e-12);
  return c;
}

// |tr s_n(P_L) - tr s_n(P_{L,0})| <= n phi(L); lhs from the spectra, rhs from
// the Q-block singular values.
inline InequalityCheck telescope_bound_check(const TruncatedSpectrum& spec, const TruncatedSpectrum& spec0,
                                             const NormReport& rep, int n) {
  if (n < 1) throw ConfigError("telescope bound needs n >= 1");
  const auto sn = poly_basis(n, PolyKind::Symmetric);
  InequalityCheck c;
  c.lhs = std::abs(trace_h(spec, sn) - trace_h(spec0, sn));
  c.rhs = n * rep.phi;
  // lhs and rhs are rounded independently
  c.holds = c.lhs <= c.rhs + 1e-12 * (1.0 + std::abs(trace_h(spec0, sn)));
  return c;
}

inline InequalityCheck telescope_bound_check(const FermiProjection& P, const FermiProjection& P0,
                                             const Domain& region, const LatticeOperator& op, int n) {
  const auto rep = diff_stats(P, P0, region, op, {});
  return telescope_bound_check(truncate_spectrum(P, region, op), truncate_spectrum(P0, region, op), rep, n);
}

} // namespace szego

#endif // SZEGO_SCHATTEN_HPP
