#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "szego/asymptotics.hpp"

using namespace szego;

namespace {

std::vector<TestFunction> free_hs() {
  return {renyi(1.0, LogBase::Nats), poly_basis(1, PolyKind::Symmetric), poly_basis(2, PolyKind::Symmetric)};
}

ModelConfig free_model() {
  ModelConfig c;
  c.energy = 4.0;
  return c;
}

// the default d = 1 free sweep, computed once
const SweepTable& free_sweep() {
  static const SweepTable t = run_sweep(free_model(), make_l_grid(default_grid(1), 4.0), free_hs());
  return t;
}

SweepTable synthetic(const std::vector<double>& L, const std::vector<double>& y, const std::string& label = "s:1") {
  SweepTable t;
  t.config = free_model();
  t.labels = {label};
  t.engine = "continuum-free";
  for (std::size_t i = 0; i < L.size(); ++i) {
    SweepRow r;
    r.L = L[i];
    r.traces = {y[i]};
    t.rows.push_back(r);
  }
  return t;
}

std::vector<double> geometric(double a, double b, int n) {
  std::vector<double> L;
  for (int i = 0; i < n; ++i) L.push_back(a * std::pow(b / a, double(i) / (n - 1)));
  return L;
}

} // namespace

TEST(Grid, DefaultsAndPhaseLocking) {
  const auto g = make_l_grid(default_grid(1), 4.0);
  ASSERT_EQ(g.size(), 12u);
  const double pi = std::numbers::pi;
  for (double L : g) {
    const double frac = std::fmod(2.0 * L - pi / 8.0, pi);
    EXPECT_TRUE(frac < 1e-9 || pi - frac < 1e-9) << L;
  }
  EXPECT_GE(2.0 * g.front(), 25.0);
  EXPECT_LE(2.0 * g.back(), 400.0);
  const auto g2 = make_l_grid(default_grid(2), 1.0);
  EXPECT_EQ(g2.size(), 8u);
  EXPECT_DOUBLE_EQ(g2.front(), 8.0);
  EXPECT_DOUBLE_EQ(g2.back(), 60.0);
}

TEST(Grid, Preconditions) {
  EXPECT_THROW(make_l_grid({GridKind::Geometric, GridVariable::L, 2.0, 3.0, 1}, 1.0), ConfigError);
  EXPECT_THROW(make_l_grid({GridKind::Geometric, GridVariable::L, 2.0, 400.0, 8}, 1.0), ConfigError);
  EXPECT_THROW(make_l_grid({GridKind::Geometric, GridVariable::L, 2.0, 4.0, 12}, 1.0), ConfigError);
  EXPECT_THROW(validate_l_grid({5.0}), ConfigError);
  EXPECT_THROW(validate_l_grid({1, 2, 3, 4, 5, 6, 8, 7}), ConfigError);
  EXPECT_NO_THROW(validate_l_grid(geometric(4.0, 40.0, 10)));
  EXPECT_THROW(run_sweep(free_model(), {10.0}, free_hs()), ConfigError);
}

TEST(Fit, RecoversExactSyntheticData) {
  const auto L = geometric(10.0, 200.0, 10);
  std::vector<double> y;
  for (double x : L) y.push_back(2.0 * x + 0.5 * std::log(x));
  const auto f = fit_series(L, y, 1);
  EXPECT_NEAR(f.coef(0), 2.0, 1e-10);
  EXPECT_NEAR(f.coef(1), 0.5, 1e-10);
  EXPECT_NEAR(f.coef(2), 0.0, 1e-10);
  EXPECT_LT(f.sigma(1), 1e-9);
  EXPECT_NEAR(evaluate_fit(f, 50.0), 100.0 + 0.5 * std::log(50.0), 1e-9);

  std::vector<double> y2;
  for (double x : L) y2.push_back(3.0 * x * x - 1.5 * x * std::log(x) + 0.25 * x + 7.0);
  const auto f2 = fit_series(L, y2, 2);
  EXPECT_NEAR(f2.coef(0), 3.0, 1e-10);
  EXPECT_NEAR(f2.coef(1), -1.5, 1e-8);
  EXPECT_NEAR(f2.coef(3), 7.0, 1e-5);
}

TEST(Fit, Preconditions) {
  const auto L = geometric(10.0, 200.0, 4);
  EXPECT_THROW(fit_series(L, {1, 2, 3, 4}, 1), ConfigError);
  EXPECT_THROW(fit_series(geometric(10.0, 200.0, 8), {1, 2, 3}, 1), ConfigError);
  EXPECT_THROW(fit_series(geometric(10.0, 200.0, 8), std::vector<double>(8, 1.0), 3), ConfigError);
  // duplicated L values make the basis rank deficient
  EXPECT_THROW(fit_series(std::vector<double>(8, 5.0), std::vector<double>(8, 1.0), 1), NumericalError);
}

TEST(Fit, NestedBasisLowersResidual) {
  const auto& t = free_sweep();
  for (const auto& h : free_hs()) {
    const auto lead = fit_asymptotics(t, h, kDefaultN0Convention, FitBasis::Leading);
    const auto full = fit_asymptotics(t, h);
    EXPECT_LE(full.residual_norm, lead.residual_norm) << h.label;
    EXPECT_EQ(lead.basis.size(), 2u);
    EXPECT_EQ(full.basis.size(), 3u);
  }
}

TEST(Sweep, FreeEntropyGrowsAndMatchesPrediction) {
  const auto& t = free_sweep();
  ASSERT_EQ(t.rows.size(), 12u);
  const auto y = t.column("renyi:1:nats");
  for (std::size_t i = 1; i < y.size(); ++i) EXPECT_GT(y[i], y[i - 1]);
  const auto f = fit_asymptotics(t, renyi(1.0, LogBase::Nats));
  EXPECT_NEAR(f.b(), 1.0 / 3.0, 0.05 / 3.0);
  // h(1) = 0: leading coefficient consistent with zero
  const double Lmax = t.rows.back().L;
  EXPECT_LE(std::abs(f.a()), 0.01 * f.b() * std::log(Lmax) / Lmax);
  EXPECT_THROW(t.column("renyi:3:nats"), ConfigError);
}

TEST(Sweep, CoefficientStableUnderDroppingSmallestRows) {
  const auto& t = free_sweep();
  for (const auto& h : free_hs()) {
    const double b = fit_asymptotics(t, h).b();
    const double b2 = fit_asymptotics(t, h, kDefaultN0Convention, FitBasis::Full, 2).b();
    EXPECT_LE(std::abs(b2 - b), 0.005 * std::abs(b)) << h.label;
  }
}

TEST(Sweep, PolynomialCoefficientRatio) {
  const auto& t = free_sweep();
  const double r = fit_asymptotics(t, poly_basis(1, PolyKind::Symmetric)).b() /
                   fit_asymptotics(t, poly_basis(2, PolyKind::Symmetric)).b();
  // I(s_1) / I(s_2) = B(1,1) / B(2,2) = 6
  EXPECT_NEAR(r, 6.0, 0.3);
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
  ModelConfig c;
  c.energy = 1.2;
  c.engine = Engine::Lattice;
  c.potential = Potential::square_well(1, -5.0, 1.0);
  c.lattice.box_half_width = 30.0;
  const auto grid = geometric(4.0, 20.0, 8);
  SweepOptions one, two;
  two.threads = 2;
  const auto a = run_sweep(c, grid, free_hs(), one);
  const auto b = run_sweep(c, grid, free_hs(), two);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].traces, b.rows[i].traces);
    EXPECT_EQ(a.rows[i].norms->qdiff2, b.rows[i].norms->qdiff2);
    EXPECT_EQ(a.rows[i].norms->phi, b.rows[i].norms->phi);
  }
}

TEST(Sweep, AbortKeepsCompletedRows) {
  ModelConfig c;
  c.energy = 1.2;
  c.engine = Engine::Lattice;
  c.lattice.box_half_width = 12.0; // too small for the last rows
  const auto grid = geometric(4.0, 20.0, 8);
  try {
    run_sweep(c, grid, free_hs());
    FAIL() << "expected an abort";
  } catch (const SweepAborted& e) {
    EXPECT_EQ(e.exit_code, 2);
    EXPECT_GT(e.partial.rows.size(), 0u);
    EXPECT_LT(e.partial.rows.size(), grid.size());
    EXPECT_NE(std::string(e.what()).find("does not cover"), std::string::npos);
  }
}

TEST(Stability, SelfComparisonPasses) {
  const auto& t = free_sweep();
  const auto s = stability_report(t, t, renyi(1.0, LogBase::Nats));
  for (double d : s.delta) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(s.overall, Verdict::Pass);
}

TEST(Stability, ConstantOffsetIsLowerOrder) {
  const auto L = geometric(12.5, 200.0, 12);
  std::vector<double> y0, yV;
  for (double x : L) {
    y0.push_back(0.1 * std::log(x) + 0.3);
    yV.push_back(0.1 * std::log(x) + 0.3 + 0.7);
  }
  const auto r = stability_report(synthetic(L, yV), synthetic(L, y0), poly_basis(1, PolyKind::Symmetric));
  EXPECT_EQ(r.trend, Verdict::Pass);
  EXPECT_EQ(r.coefficient, Verdict::Pass);
  EXPECT_EQ(r.overall, Verdict::Pass);
}

TEST(Stability, GrowingDifferenceFailsOrIsInconclusive) {
  const auto L = geometric(12.5, 200.0, 12);
  std::vector<double> y0, yV;
  for (double x : L) {
    y0.push_back(0.1 * std::log(x));
    yV.push_back(0.2 * std::log(x));
  }
  const auto r = stability_report(synthetic(L, yV), synthetic(L, y0), poly_basis(1, PolyKind::Symmetric));
  EXPECT_EQ(r.coefficient, Verdict::Fail);
  EXPECT_EQ(r.overall, Verdict::Fail);
  // non-monotone ratio alone is only inconclusive
  std::vector<double> yW;
  for (std::size_t i = 0; i < L.size(); ++i) yW.push_back(y0[i] + (i % 2 ? 0.02 : 0.0) * std::log(L[i]));
  const auto w = stability_report(synthetic(L, yW), synthetic(L, y0), poly_basis(1, PolyKind::Symmetric));
  EXPECT_EQ(w.trend, Verdict::Inconclusive);
}

TEST(Stability, MismatchedTablesRejected) {
  const auto L = geometric(12.5, 200.0, 12);
  auto L2 = L;
  L2[3] *= 1.01;
  const std::vector<double> y(12, 1.0);
  EXPECT_THROW(stability_report(synthetic(L, y), synthetic(L2, y), poly_basis(1, PolyKind::Symmetric)), ConfigError);
  auto t = synthetic(L, y);
  t.config.energy = 2.0;
  EXPECT_THROW(stability_report(t, synthetic(L, y), poly_basis(1, PolyKind::Symmetric)), ConfigError);
}

TEST(Suite, InjectedFailureIsIsolated) {
  VerificationSuite s;
  s.add("ok", [] { return CheckResult{"", Verdict::Pass, "", {}}; });
  s.add("violated", [] {
    const Vector sigma = Vector::LinSpaced(5, 0.1, 1.0);
    auto c = interpolation_check(sigma, 1.0, 2.0, 0.5);
    c.rhs *= 0.5; // synthetic violation
    return CheckResult{"", c.lhs <= c.rhs ? Verdict::Pass : Verdict::Fail, "", {}};
  });
  s.add("throws", []() -> CheckResult { throw NumericalError("boom"); });
  s.add("later", [] { return CheckResult{"", Verdict::Inconclusive, "", {}}; });
  const auto r = s.run();
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].verdict, Verdict::Pass);
  EXPECT_EQ(r[1].verdict, Verdict::Fail);
  EXPECT_EQ(r[1].name, "violated");
  EXPECT_EQ(r[2].verdict, Verdict::Fail);
  EXPECT_EQ(r[2].detail, "error: boom");
  EXPECT_EQ(r[3].verdict, Verdict::Inconclusive);
  EXPECT_EQ(overall_verdict(r), Verdict::Fail);
  EXPECT_EQ(overall_verdict({r[0], r[3]}), Verdict::Inconclusive);
  EXPECT_EQ(overall_verdict({r[0]}), Verdict::Pass);
}

TEST(Checks, NormChecksNeedLatticeTables) {
  EXPECT_EQ(VerificationSuite().size(), 0u);
  const auto& t = free_sweep();
  EXPECT_THROW(check_telescope(t), ConfigError);
  EXPECT_THROW(check_q2_identity(t), ConfigError);
}

TEST(Checks, IdsArbitration) {
  const auto a = arbitrate_n0(1, 1.0, {500.0, 0.1});
  EXPECT_GE(a.estimate, 0.315);
  EXPECT_LE(a.estimate, 0.322);
  EXPECT_EQ(a.selected, N0Convention::Weyl);
  EXPECT_EQ(check_ids(1, 1.0, N0Convention::Weyl).verdict, Verdict::Pass);
  EXPECT_EQ(check_ids(1, 1.0, N0Convention::AsPrinted).verdict, Verdict::Fail);
}
