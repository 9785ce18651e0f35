#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include "szego/cache.hpp"
#include "szego/lattice.hpp"
#include "szego/schatten.hpp"

using namespace szego;

namespace {

ModelConfig lattice_model(double E, double h, Potential V = Potential::zero(1)) {
  ModelConfig c;
  c.energy = E;
  c.engine = Engine::Lattice;
  c.lattice.spacing = h;
  c.domain = V.dimension() == 1 ? Domain::interval(-1, 1) : Domain::square(1.0);
  c.potential = std::move(V);
  return c;
}

} // namespace

TEST(Lattice, OperatorGeometry) {
  LatticeOperator op(1, 0.1, 2.0, Potential::zero(1), 1000);
  EXPECT_EQ(op.sites_per_axis(), 39);
  EXPECT_NEAR(op.site(0).x, -1.9, 1e-12);
  EXPECT_NEAR(op.site(38).x, 1.9, 1e-12);
  const Matrix H = op.dense();
  EXPECT_DOUBLE_EQ(H(0, 0), 200.0);
  EXPECT_DOUBLE_EQ(H(0, 1), -100.0);
  EXPECT_THROW(LatticeOperator(1, 0.01, 100.0, Potential::zero(1), 1000), ConfigError);
  EXPECT_THROW(LatticeOperator(3, 0.1, 1.0, Potential::zero(1), 1000), ConfigError);
}

TEST(Lattice, JumpSitesGetTheMeanValue) {
  LatticeOperator op(1, 0.5, 3.0, Potential::square_well(1, -4.0, 1.0), 1000);
  for (std::size_t k = 0; k < op.size(); ++k) {
    const double x = op.site(k).x;
    const double v = op.potential_values()[k];
    if (std::abs(std::abs(x) - 1.0) < 1e-12) EXPECT_DOUBLE_EQ(v, -2.0);
    else if (std::abs(x) < 1.0) EXPECT_DOUBLE_EQ(v, -4.0);
    else EXPECT_DOUBLE_EQ(v, 0.0);
  }
}

TEST(Lattice, FreeChainClosedFormMatchesDenseSolver) {
  LatticeOperator op(1, 0.1, 3.0, Potential::zero(1), 1000);
  const auto closed = detail::free_chain_eigen(op.sites_per_axis(), 0.1, 50.0);
  const auto dense = symmetric_eigen_below(op.dense(), 50.0);
  ASSERT_EQ(closed.values.size(), dense.values.size());
  EXPECT_LT((closed.values - dense.values).cwiseAbs().maxCoeff(), 1e-9);
  // same projection regardless of eigenvector signs
  const Matrix P1 = closed.vectors * closed.vectors.transpose();
  const Matrix P2 = dense.vectors * dense.vectors.transpose();
  EXPECT_LT((P1 - P2).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lattice, ProjectionIsAnOrthogonalProjection) {
  auto c = lattice_model(4.0, 0.05, Potential::square_well(1, -5.0, 1.0));
  const auto op = build_hamiltonian(c, 20.0);
  const auto fp = fermi_projection(op, c.energy);
  EXPECT_GT(fp.count, 0u);
  EXPECT_LT(fp.idempotency_residual, 1e-10);
  EXPECT_LT(fp.symmetry_residual, 1e-12);
  // bound states are below zero
  EXPECT_LT(fp.eigenvalues(0), 0.0);
  EXPECT_LT(fp.eigenvalues(fp.eigenvalues.size() - 1), 4.0);
}

TEST(Lattice, TwoDimensionalFreeProductBasisMatchesDense) {
  auto c = lattice_model(1.0, 0.15, Potential::zero(2));
  const auto op = build_hamiltonian(c, 1.6);
  const auto fp = fermi_projection(op, 20.0);
  const auto dense = symmetric_eigen_below(op.dense(), 20.0);
  ASSERT_EQ(fp.count, std::size_t(dense.values.size()));
  const Matrix P2 = dense.vectors * dense.vectors.transpose();
  EXPECT_LT((fp.matrix() - P2).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lattice, DegenerateFermiLevelRejected) {
  LatticeOperator op(1, 0.1, 3.0, Potential::zero(1), 1000);
  const auto chain = detail::free_chain_eigen(op.sites_per_axis(), 0.1, 10.0, false);
  EXPECT_THROW(fermi_projection(op, chain.values(2)), NumericalError);
}

TEST(Lattice, TruncatedSpectrumMatchesPrincipalSubmatrix) {
  auto c = lattice_model(4.0, 0.05, Potential::square_well(1, 3.0, 0.5));
  const auto op = build_hamiltonian(c, 8.0);
  const auto fp = fermi_projection(op, c.energy);
  const auto region = scale_domain(c.domain, 2.0);
  const auto spec = truncate_spectrum(fp, region, op);
  const auto split = split_sites(op, region);
  EXPECT_EQ(split.inside.size(), 80u);
  EXPECT_EQ(spec.size(), split.inside.size());
  auto ref = principal_spectrum(fp.matrix(), split.inside);
  std::sort(ref.begin(), ref.end());
  std::vector<double> got(spec.implicit_zeros, 0.0);
  got.insert(got.end(), spec.values.begin(), spec.values.end());
  ASSERT_EQ(got.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(got[i], std::clamp(ref[i], 0.0, 1.0), 1e-10);
  for (double v : spec.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Lattice, DiskRegionCountsSitesByRadius) {
  LatticeOperator op(2, 0.25, 3.0, Potential::zero(2), 100000);
  const auto s = split_sites(op, Domain::disk(1.0));
  EXPECT_GT(s.inside.size(), 0u);
  for (auto k : s.inside) EXPECT_LT(std::hypot(op.site(k).x, op.site(k).y), 1.0);
}

TEST(Lattice, IdsEstimateSelectsWeyl) {
  ModelConfig c;
  c.energy = 1.0;
  const double est = ids_estimate(c, 1.0, {500.0, 0.1});
  EXPECT_NEAR(est, 1.0 / std::numbers::pi, 2e-3);
  ModelConfig c2;
  c2.domain = Domain::square(1.0);
  c2.potential = Potential::zero(2);
  // Dirichlet walls cost a perimeter term of relative size ~2/R
  const double w2 = 1.0 / (4.0 * std::numbers::pi);
  const double e60 = std::abs(ids_estimate(c2, 1.0, {60.0, 0.1}) / w2 - 1.0);
  const double e200 = std::abs(ids_estimate(c2, 1.0, {200.0, 0.1}) / w2 - 1.0);
  EXPECT_LT(e200, 0.01);
  EXPECT_LT(e200, 0.5 * e60);
  c.potential = Potential::square_well(1, -1.0, 1.0);
  EXPECT_THROW(ids_estimate(c, 1.0), ConfigError);
}

TEST(Lattice, BlockNormsDecay) {
  auto c = lattice_model(1.0, 0.1, Potential::square_well(1, -2.0, 1.0));
  const auto op = build_hamiltonian(c, 40.0);
  const auto P = fermi_projection(op, c.energy);
  const auto P0 = fermi_projection(op.free_partner(), c.energy);
  const auto bd = block_norm_decay(P, P0, op);
  EXPECT_GE(bd.fitted, 3u);
  EXPECT_GT(bd.exponent, 0.5);
  EXPECT_GT(bd.envelope, 0.0);
  LatticeOperator small(1, 0.1, 10.0, Potential::square_well(1, -2.0, 1.0), 1000);
  const auto Ps = fermi_projection(small, 1.0);
  EXPECT_THROW(block_norm_decay(Ps, fermi_projection(small.free_partner(), 1.0), small), ConfigError);
}

TEST(Cache, HitReturnsIdenticalProjectionAndIsFaster) {
  const auto dir = std::filesystem::temp_directory_path() / "szego_cache_unit";
  std::filesystem::remove_all(dir);
  const EigenCache cache(dir);
  auto c = lattice_model(1.0, 0.05, Potential::square_well(1, -2.0, 1.0));
  const auto op = build_hamiltonian(c, 60.0);
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto a = fermi_projection(op, c.energy, &cache);
  const auto t1 = clock::now();
  const auto b = fermi_projection(op, c.energy, &cache);
  const auto t2 = clock::now();
  EXPECT_TRUE(std::filesystem::exists(cache.path_for(op.cache_key(c.energy))));
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.basis, b.basis);
  EXPECT_LT(t2 - t1, t1 - t0);
  // a different potential maps to a different entry
  const auto op2 = build_hamiltonian(lattice_model(1.0, 0.05, Potential::square_well(1, -3.0, 1.0)), 60.0);
  EXPECT_NE(op.cache_key(1.0), op2.cache_key(1.0));
  EXPECT_FALSE(cache.load(op2.cache_key(1.0)).has_value());
  std::filesystem::remove_all(dir);
}

TEST(Cache, DisabledAndOversizedEntries) {
  const EigenCache off;
  EXPECT_FALSE(off.enabled());
  EXPECT_FALSE(off.load("x").has_value());
  const auto dir = std::filesystem::temp_directory_path() / "szego_cache_small";
  std::filesystem::remove_all(dir);
  const EigenCache tiny(dir, 64);
  EigenPairs e;
  e.values = Vector::Ones(10);
  e.vectors = Matrix::Ones(10, 10);
  tiny.store("k", e);
  EXPECT_FALSE(tiny.load("k").has_value());
  std::filesystem::remove_all(dir);
}
