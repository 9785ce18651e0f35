#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "szego/lattice.hpp"
#include "szego/schatten.hpp"

using namespace szego;

namespace {

struct Pair {
  LatticeOperator op;
  FermiProjection P, P0;
};

Pair make_pair_on_box(double R, double v0) {
  LatticeOperator op(1, 0.05, R, Potential::square_well(1, v0, 1.0), 100000);
  auto P = fermi_projection(op, 1.2);
  auto P0 = fermi_projection(op.free_partner(), 1.2);
  return {std::move(op), std::move(P), std::move(P0)};
}

} // namespace

TEST(Schatten, QuasiNormsOfKnownVectors) {
  Vector s(3);
  s << 3.0, 4.0, 0.0;
  EXPECT_NEAR(schatten_qnorm(s, 2.0).norm, 5.0, 1e-15);
  EXPECT_NEAR(schatten_qnorm(s, 1.0).norm, 7.0, 1e-15);
  EXPECT_NEAR(schatten_qnorm(s, 0.5).power, std::sqrt(3.0) + 2.0, 1e-15);
  EXPECT_THROW(schatten_qnorm(s, 0.0), ConfigError);
  Vector neg(1);
  neg << -1.0;
  EXPECT_THROW(schatten_qnorm(neg, 1.0), ConfigError);
}

TEST(Schatten, QuasiNormTriangleFailsBelowOne) {
  // ||A + B||_p <= 2^{1/p - 1} (||A||_p + ||B||_p) but not the plain triangle
  Matrix A = Matrix::Zero(2, 2), B = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  B(1, 1) = 1.0;
  const double p = 0.5;
  const double lhs = schatten_qnorm(singular_values(A + B), p).norm;
  const double rhs = schatten_qnorm(singular_values(A), p).norm + schatten_qnorm(singular_values(B), p).norm;
  EXPECT_GT(lhs, rhs);
  EXPECT_LE(lhs, std::pow(2.0, 1.0 / p - 1.0) * rhs + 1e-12);
}

TEST(Schatten, InterpolationOnRandomSpectra) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 200; ++c) {
    Vector s(20);
    for (auto& v : s) v = std::pow(u(rng), 3.0);
    const double p0 = 0.2 + u(rng), p1 = p0 + 2.0 * u(rng), th = u(rng);
    EXPECT_TRUE(interpolation_check(s, p0, p1, th).holds);
  }
  EXPECT_THROW(interpolation_check(Vector::Ones(2), 2.0, 1.0, 0.5), ConfigError);
}

TEST(Schatten, RowFactorsAgree) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Matrix X(200, 7);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
  const Matrix R1 = detail::qr_factor(X), R2 = detail::gram_factor(X);
  EXPECT_LT((R1.transpose() * R1 - X.transpose() * X).norm(), 1e-10 * X.squaredNorm());
  EXPECT_LT((R2.transpose() * R2 - X.transpose() * X).norm(), 1e-10 * X.squaredNorm());
}

TEST(Schatten, QBlockMatchesExplicitOffDiagonalBlock) {
  const auto pr = make_pair_on_box(12.0, -5.0);
  const auto region = scale_domain(Domain::interval(-1, 1), 3.0);
  const auto split = split_sites(pr.op, region);
  const Matrix P = pr.P.matrix();
  const Matrix Q = P(split.outside, split.inside);
  Vector ref = singular_values(Q);
  Vector got = q_block(pr.P, region, pr.op);
  ASSERT_GE(ref.size(), got.size());
  for (Eigen::Index i = 0; i < got.size(); ++i) EXPECT_NEAR(got(i), ref(i), 1e-10);
  for (Eigen::Index i = got.size(); i < ref.size(); ++i) EXPECT_NEAR(ref(i), 0.0, 1e-10);
}

TEST(Schatten, DiffStatsAgainstExplicitMatrices) {
  const auto pr = make_pair_on_box(12.0, -5.0);
  const auto region = scale_domain(Domain::interval(-1, 1), 3.0);
  const auto split = split_sites(pr.op, region);
  const Matrix P = pr.P.matrix(), P0 = pr.P0.matrix();
  const Matrix dQ = P(split.outside, split.inside) - P0(split.outside, split.inside);
  const Matrix dP = P(split.inside, split.inside) - P0(split.inside, split.inside);
  const auto r = diff_stats(pr.P, pr.P0, region, pr.op, {0.5, 1.0});
  EXPECT_NEAR(r.qdiff2, dQ.norm(), 1e-10);
  EXPECT_NEAR(r.pdiff2, dP.norm(), 1e-10);
  EXPECT_NEAR(r.trdiff, dP.trace(), 1e-10);
  EXPECT_NEAR(r.q2, P(split.outside, split.inside).squaredNorm(), 1e-10);
  EXPECT_NEAR(r.qdiff2s[1].second, dQ.squaredNorm(), 1e-10);
  EXPECT_NEAR(r.qdiff2s[0].second, singular_values(dQ).sum(), 1e-8);
}

// ||Q_L||_2^2 = tr P_L - tr P_L^2 = tr s_1(P_L)
TEST(Schatten, QNormIdentity) {
  const auto pr = make_pair_on_box(15.0, 3.0);
  for (double L : {1.5, 4.0}) {
    const auto region = scale_domain(Domain::interval(-1, 1), L);
    const auto r = diff_stats(pr.P, pr.P0, region, pr.op, {});
    const double s1 = trace_h(truncate_spectrum(pr.P, region, pr.op), poly_basis(1, PolyKind::Symmetric));
    EXPECT_NEAR(r.q2, s1, 1e-10 * std::max(1.0, s1));
  }
}

TEST(Schatten, TelescopeBound) {
  const auto pr = make_pair_on_box(15.0, -5.0);
  const auto region = scale_domain(Domain::interval(-1, 1), 4.0);
  for (int n = 1; n <= 4; ++n) {
    const auto c = telescope_bound_check(pr.P, pr.P0, region, pr.op, n);
    EXPECT_TRUE(c.holds) << n << ": " << c.lhs << " vs " << c.rhs;
  }
  EXPECT_THROW(telescope_bound_check(pr.P, pr.P0, region, pr.op, 0), ConfigError);
}

TEST(Schatten, RegionCoveringTheBoxIsRejected) {
  const auto pr = make_pair_on_box(3.0, -5.0);
  EXPECT_THROW(q_block(pr.P, scale_domain(Domain::interval(-1, 1), 5.0), pr.op), ConfigError);
}

TEST(Schatten, TraceCountsImplicitZeros) {
  TruncatedSpectrum s = make_spectrum({0.5, 1.0}, 3, 1.0, "t", "", std::nullopt);
  TestFunction c;
  c.label = "c";
  c.eval = [](double l) { return 1.0 + l; };
  EXPECT_DOUBLE_EQ(trace_h(s, c), 1.5 + 2.0 + 3.0);
  EXPECT_THROW(make_spectrum({1.1}, 0, 1.0, "t", "", std::nullopt), NumericalError);
  EXPECT_EQ(make_spectrum({1.0 + 1e-9, -1e-9}, 0, 1.0, "t", "", std::nullopt).values, (std::vector<double>{0.0, 1.0}));
}
