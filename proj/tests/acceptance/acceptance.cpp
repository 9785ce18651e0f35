// Acceptance run: one PASS/FAIL line per criterion, numbered 1 to 10.
//
//   szego_acceptance [--only 1,3] [--known-failures 4] [--slow]
//
// Criterion 8 (d = 2) takes about 5 minutes and runs only with --slow.
// Exit status is 0 when the set of failing criteria equals the
// --known-failures set, so a known failure that starts passing is reported
// as well.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "CLI11.hpp"

#include "szego/asymptotics.hpp"

using namespace szego;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

////////////////////////////////////////////////////////////////////////////////
// shared sweeps, computed on first use

const std::vector<TestFunction>& stability_hs() {
  static const std::vector<TestFunction> hs{renyi(2.0, LogBase::Nats), poly_basis(1, PolyKind::Symmetric),
                                            poly_basis(2, PolyKind::Symmetric)};
  return hs;
}

ModelConfig continuum_1d(Potential V) {
  ModelConfig c;
  c.energy = 4.0;
  c.domain = Domain::interval(-1.0, 1.0);
  c.potential = std::move(V);
  return c;
}

std::vector<TestFunction> free_hs() {
  auto hs = stability_hs();
  hs.insert(hs.begin(), {renyi(1.0, LogBase::Nats), renyi(5.0, LogBase::Nats)});
  return hs;
}

const SweepTable& free_sweep() {
  static const SweepTable t = run_sweep(continuum_1d(Potential::zero(1)), make_l_grid(default_grid(1), 4.0), free_hs());
  return t;
}

const SweepTable& potential_sweep(double v0) {
  static std::map<double, SweepTable> cache;
  auto it = cache.find(v0);
  if (it == cache.end())
    it = cache.emplace(v0, run_sweep(continuum_1d(Potential::square_well(1, v0, 1.0)),
                                     make_l_grid(default_grid(1), 4.0), stability_hs()))
             .first;
  return it->second;
}

// quadrature of the raw integrand, no substitution
double widom_oracle(const TestFunction& h) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double h1 = h.value_at_one;
  auto f = [&](double l, double lc) {
    const double one_minus = l > 0.5 ? lc : 1.0 - l;
    return (h(l) - l * h1) / (l * one_minus);
  };
  return ts.integrate(f, 0.0, 1.0) / (4.0 * kPi * kPi);
}

////////////////////////////////////////////////////////////////////////////////
// criteria

Outcome free_area_law() {
  const auto f = fit_asymptotics(free_sweep(), renyi(1.0, LogBase::Nats));
  return {rel(f.b(), 1.0 / 3.0) <= 0.05, fmt("b = %.6f vs 1/3 (rel %.2e)", f.b(), rel(f.b(), 1.0 / 3.0))};
}

Outcome renyi_family() {
  Outcome o{true, ""};
  for (double a : {2.0, 5.0}) {
    const auto h = renyi(a, LogBase::Nats);
    const auto f = fit_asymptotics(free_sweep(), h);
    const double want = (1.0 + 1.0 / a) / 6.0;
    const double I = widom_functional(h), Io = widom_oracle(h);
    o.pass = o.pass && rel(f.b(), want) <= 0.05 && std::abs(I - Io) <= 1e-8;
    o.detail += fmt("alpha %g: b = %.6f vs %.6f (rel %.2e), |I - oracle| = %.1e; ", a, f.b(), want, rel(f.b(), want),
                    std::abs(I - Io));
  }
  o.detail.resize(o.detail.size() - 2);
  return o;
}

Outcome stability(double v0) {
  Outcome o{true, ""};
  for (const auto& h : stability_hs()) {
    const auto s = stability_report(potential_sweep(v0), free_sweep(), h);
    const bool ok = s.rel_diff <= 0.05 && s.trend == Verdict::Pass;
    o.pass = o.pass && ok;
    o.detail += fmt("%s: b_V %.5f b_0 %.5f rel %.2e trend %s; ", h.label.c_str(), s.b_V, s.b_0, s.rel_diff,
                    to_string(s.trend));
  }
  o.detail.resize(o.detail.size() - 2);
  return o;
}

Outcome lattice_cross() {
  ModelConfig c = continuum_1d(Potential::zero(1));
  c.engine = Engine::Lattice;
  c.lattice.spacing = 0.1 / std::sqrt(c.energy);
  const auto h = renyi(1.0, LogBase::Nats);
  const auto lat = run_sweep(c, make_l_grid(default_grid(1), c.energy), {h});
  const auto a = lat.column(h.label), b = free_sweep().column(h.label);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel(a[i], b[i]));
  return {worst <= 0.01, fmt("max relative lattice/Nystrom difference %.2e over %zu rows", worst, a.size())};
}

Outcome n0_arbitration() {
  const auto arb = arbitrate_n0(1, 1.0);
  ModelConfig c;
  c.energy = 1.0;
  c.engine = Engine::Lattice;
  c.lattice.spacing = 0.1;
  const auto id = identity_function();
  const auto t = run_sweep(c, make_l_grid({GridKind::Geometric, GridVariable::L, 10.0, 100.0, 10}, 1.0), {id});
  const auto f = fit_asymptotics(t, id, arb.selected, FitBasis::Leading);
  const double want = n0(1.0, 1, arb.selected) * c.domain.volume();
  const bool in_window = arb.estimate >= 0.315 && arb.estimate <= 0.322;
  return {in_window && arb.selected == N0Convention::Weyl && rel(f.a(), want) <= 0.02,
          fmt("ids_estimate %.5f selects %s; leading fit a = %.5f vs N0|Lambda| = %.5f (rel %.2e)", arb.estimate,
              to_string(arb.selected), f.a(), want, rel(f.a(), want))};
}

Outcome norm_suite() {
  ModelConfig c;
  c.energy = 1.2;
  c.engine = Engine::Lattice;
  c.lattice.spacing = 0.05;
  c.lattice.box_half_width = 60.0;
  c.potential = Potential::square_well(1, -5.0, 1.0);
  const auto t = run_sweep(c, make_l_grid({GridKind::Geometric, GridVariable::L, 4.0, 40.0, 10}, c.energy),
                           {renyi(1.0, LogBase::Nats)});
  VerificationSuite s;
  s.add("a", [&] { return check_qdiff_plateau(t); });
  s.add("b", [&] { return check_pdiff_trend(t); });
  s.add("c", [&] { return check_trdiff_bounded(t); });
  s.add("d", [&] { return check_telescope(t); });
  s.add("e", [&] { return check_interpolation(t); });
  s.add("f", [&] { return check_bound_shape(t); });
  s.add("g", [&] { return check_q2_identity(t); });
  const auto r = s.run();
  Outcome o{overall_verdict(r) == Verdict::Pass, ""};
  for (const auto& x : r) o.detail += "(" + x.name + ") " + to_string(x.verdict) + " ";
  o.detail.pop_back();
  return o;
}

Outcome free_2d() {
  ModelConfig c;
  c.energy = 1.0;
  c.domain = Domain::square(1.0);
  c.potential = Potential::zero(2);
  c.continuum.nodes_per_wavelength = 7.0;
  const auto h = renyi(1.0, LogBase::Nats);
  const auto t = run_sweep(c, make_l_grid(default_grid(2), c.energy), {h});
  const auto f = fit_asymptotics(t, h);
  return {std::abs(f.rel_err_b) <= 0.15,
          fmt("b = %.5f vs %.5f (rel %.2e)", f.b(), f.prediction->b_pred, std::abs(f.rel_err_b))};
}

Outcome membership() {
  int wrong = 0, cases = 0;
  for (double a : {0.4, 0.6, 1.0, 1.5, 2.0, 5.0})
    for (int d : {1, 2, 3}) {
      ++cases;
      if (check_membership(renyi(a, LogBase::Nats), d).in_H_d != (d > 1.0 / a)) ++wrong;
    }
  return {wrong == 0, fmt("%d of %d (alpha, d) cases disagree with d > 1/alpha", wrong, cases)};
}

Outcome widom_golden() {
  const double i_id = widom_functional(identity_function());
  const double i_s1 = widom_functional(poly_basis(1, PolyKind::Symmetric));
  const double i_h1 = widom_functional(renyi(1.0, LogBase::Bits));
  bool ok = i_id == 0.0 && std::abs(i_s1 - 1.0 / (4.0 * kPi * kPi)) <= 1e-12 &&
            std::abs(i_h1 - 1.0 / (12.0 * std::log(2.0))) <= 1e-10;

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), pos(0.0, 2.0);
  std::uniform_int_distribution<int> deg(1, 6), kind(0, 1);
  int bad = 0;
  for (int c = 0; c < 500; ++c) {
    const auto f = poly_basis(deg(rng), kind(rng) ? PolyKind::Symmetric : PolyKind::Antisymmetric);
    const auto g = poly_basis(deg(rng), kind(rng) ? PolyKind::Symmetric : PolyKind::Antisymmetric);
    const double x = coef(rng), y = coef(rng), z = coef(rng), u = pos(rng), v = pos(rng);
    auto mix = [&](double p, double q) {
      TestFunction h;
      h.label = "mix";
      h.eval = [=](double l) { return p * f(l) + q * g(l) + z * l; };
      h.value_at_one = z;
      return h;
    };
    const double If = widom_functional(f), Ig = widom_functional(g);
    if (std::abs(widom_functional(mix(x, y)) - (x * If + y * Ig)) > 1e-11) ++bad;
    // h(l) - l h(1) = u f + v g >= 0
    if (!(widom_functional(mix(u, v)) > 0.0)) ++bad;
  }
  ok = ok && bad == 0;
  return {ok, fmt("I(id) = %g, I(s1) - 1/4pi^2 = %.1e, I(h1 bits) - 1/(12 ln 2) = %.1e, %d of 1000 property cases fail",
                  i_id, i_s1 - 1.0 / (4.0 * kPi * kPi), i_h1 - 1.0 / (12.0 * std::log(2.0)), bad)};
}

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
  bool slow = false;
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only, known;
  bool slow = false;
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--known-failures", known, "criteria expected to fail")->delimiter(',');
  app.add_flag("--slow", slow, "include the d = 2 run");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "free 1D enhanced area law", 120, free_area_law},
      {2, "Renyi family coefficients", 120, renyi_family},
      {3, "stability, square well v0 = -5", 600, [] { return stability(-5.0); }},
      {4, "stability, square barrier v0 = +5", 600, [] { return stability(5.0); }},
      {5, "lattice vs Nystrom, free d = 1", 300, lattice_cross},
      {6, "N0 arbitration", 120, n0_arbitration},
      {7, "lattice norm inequalities", 600, norm_suite},
      {8, "free d = 2 square", 1800, free_2d, true},
      {9, "membership rule", 10, membership},
      {10, "Widom functional golden values", 10, widom_golden},
  };

  const std::set<int> expected(known.begin(), known.end());
  std::set<int> failed;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    if (c.slow && !slow) {
      std::printf("criterion %2d  SKIP  %s: slow suite, run with --slow\n", c.id, c.title);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // the shared free sweep is charged to the first criterion that needs it
    const bool in_time = sec <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) failed.insert(c.id);
    std::printf("criterion %2d  %s  %s: %s [%.1f s%s]%s\n", c.id, pass ? "PASS" : "FAIL", c.title, o.detail.c_str(), sec,
                in_time ? "" : fmt(" > %.0f s budget", c.budget_seconds).c_str(),
                !pass && expected.count(c.id) ? " (known failure)" : "");
    std::fflush(stdout);
  }

  std::set<int> ran_expected;
  for (int k : expected)
    for (const auto& c : all)
      if (c.id == k && (only.empty() || std::find(only.begin(), only.end(), k) != only.end()) && (!c.slow || slow))
        ran_expected.insert(k);
  const bool as_expected = failed == ran_expected;
  std::printf("%zu failing criteria; %s\n", failed.size(),
              as_expected ? "matches the known-failure list" : "DIFFERS from the known-failure list");
  return as_expected ? 0 : 1;
}
