#ifndef SZEGO_VERIFY_HPP
#define SZEGO_VERIFY_HPP

// Full verification run for one experiment: the perturbed and free sweeps,
// coefficient checks against the prediction, stability per test function,
// the lattice norm checks and N_0 arbitration.

#include <optional>
#include <string>
#include <vector>

#include "szego/asymptotics.hpp"
#include "szego/config.hpp"

namespace szego {

struct VerifyOutcome {
  std::optional<SweepTable> with_v;
  std::optional<SweepTable> free;
  std::string sweep_error;
  std::vector<CheckResult> checks;
  Verdict overall = Verdict::Fail;
};

namespace detail {

inline const SweepTable& need(const VerifyOutcome& o, const std::optional<SweepTable>& t) {
  if (!t) throw NumericalError("sweep failed: " + o.sweep_error);
  return *t;
}

} // namespace detail

// The checks refer to c and o, which must outlive the suite.
inline VerificationSuite build_suite(const ExperimentConfig& c, const VerifyOutcome& o) {
  VerificationSuite suite;
  const auto hs = c.test_functions();
  using detail::need;
  for (const auto& h : c.coefficient_checks ? hs : std::vector<TestFunction>{}) {
    suite.add("prediction:" + h.label, [&c, &o, h] {
      const auto f = fit_asymptotics(need(o, o.free), h, c.convention);
      CheckResult r;
      r.metrics = {{"b_fit", f.b()}, {"b_pred", f.prediction->b_pred}, {"sigma_b", f.sigma(1)}};
      if (f.prediction->b_pred == 0.0) {
        r.verdict = Verdict::Inconclusive;
        r.detail = "zero predicted coefficient; no relative comparison";
        return r;
      }
      r.metrics.emplace_back("rel_err_b", f.rel_err_b);
      r.verdict = std::abs(f.rel_err_b) <= c.prediction_tol ? Verdict::Pass : Verdict::Fail;
      r.detail = "free sweep b relative error " + detail::fmt17(f.rel_err_b);
      return r;
    });
    suite.add("stability:" + h.label, [&c, &o, h] { return check_stability(need(o, o.with_v), need(o, o.free), h, c.rel_tol); });
  }
  if (c.engine == Engine::Lattice) {
    suite.add("qdiff_plateau", [&o] { return check_qdiff_plateau(need(o, o.with_v)); });
    suite.add("pdiff_trend", [&o] { return check_pdiff_trend(need(o, o.with_v)); });
    suite.add("trdiff_bounded", [&o] { return check_trdiff_bounded(need(o, o.with_v)); });
    suite.add("telescope", [&o] { return check_telescope(need(o, o.with_v)); });
    suite.add("interpolation", [&o] { return check_interpolation(need(o, o.with_v)); });
    suite.add("bound_shape", [&o] { return check_bound_shape(need(o, o.with_v)); });
    suite.add("q2_identity", [&o] { return check_q2_identity(need(o, o.with_v)); });
    if (c.model().dimension() >= 2) suite.add("small_o_trend", [&o] { return check_small_o_trend(need(o, o.with_v)); });
  }
  suite.add("n0_arbitration", [&c] { return check_ids(c.model().dimension(), c.energy, c.convention); });
  return suite;
}

inline VerifyOutcome run_verify(const ExperimentConfig& c, const SweepOptions& opt) {
  c.validate();
  VerifyOutcome o;
  const auto grid = c.l_grid();
  const auto hs = c.test_functions();
  try {
    o.with_v = run_sweep(c.model(), grid, hs, opt);
    if (c.model().potential.is_zero()) o.free = o.with_v;
    else o.free = run_sweep(c.free_reference().model(), grid, hs, opt);
  } catch (const SweepAborted& e) {
    o.sweep_error = e.what();
  }
  o.checks = build_suite(c, o).run();
  o.overall = overall_verdict(o.checks);
  return o;
}

} // namespace szego

#endif // SZEGO_VERIFY_HPP
