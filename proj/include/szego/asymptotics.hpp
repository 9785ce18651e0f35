#ifndef SZEGO_ASYMPTOTICS_HPP
#define SZEGO_ASYMPTOTICS_HPP

// L-sweeps of tr h(P_L), least-squares extraction of the two leading
// coefficients, and the checks comparing a perturbed sweep with the free one.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "szego/cache.hpp"
#include "szego/continuum.hpp"
#include "szego/error.hpp"
#include "szego/lattice.hpp"
#include "szego/model.hpp"
#include "szego/schatten.hpp"
#include "szego/spectrum.hpp"
#include "szego/testfn.hpp"
#include "szego/widom.hpp"

namespace szego {

////////////////////////////////////////////////////////////////////////////////
//
// L-grids
//
////////////////////////////////////////////////////////////////////////////////

enum class GridKind { Geometric, PhaseLocked };
enum class GridVariable { KfL, L };

inline const char* to_string(GridKind k) { return k == GridKind::Geometric ? "geometric" : "phase_locked"; }
inline const char* to_string(GridVariable v) { return v == GridVariable::KfL ? "kfl" : "L"; }

inline GridKind parse_grid_kind(const std::string& s) {
  if (s == "geometric") return GridKind::Geometric;
  if (s == "phase_locked") return GridKind::PhaseLocked;
  throw ConfigError("unknown grid kind '" + s + "' (expected geometric or phase_locked)");
}

inline GridVariable parse_grid_variable(const std::string& s) {
  if (s == "kfl") return GridVariable::KfL;
  if (s == "L") return GridVariable::L;
  throw ConfigError("unknown grid variable '" + s + "' (expected kfl or L)");
}

struct GridSpec {
  GridKind kind = GridKind::PhaseLocked;
  GridVariable variable = GridVariable::KfL;
  double min = 25.0;
  double max = 400.0;
  int points = 12;
};

inline GridSpec default_grid(int d) {
  if (d == 2) return {GridKind::Geometric, GridVariable::KfL, 8.0, 60.0, 8};
  return {};
}

inline constexpr double kMinGridRatio = 1.15;
inline constexpr double kMaxGridRatio = 1.6;
inline constexpr int kMinGridPoints = 8;

// Geometric targets; the phase-locked kind snaps k_F L onto pi/8 + pi Z,
// where the oscillating corrections of the free traces vanish.
inline std::vector<double> make_l_grid(const GridSpec& g, double E) {
  if (!(E > 0.0)) throw ConfigError("grid construction needs E > 0");
  if (g.points < 2) throw ConfigError("an L-grid needs at least 2 points (single-point grid rejected)");
  if (g.points < kMinGridPoints)
    throw ConfigError("an L-grid needs at least " + std::to_string(kMinGridPoints) + " points");
  if (!(g.min > 0.0) || !(g.max > g.min)) throw ConfigError("grid needs 0 < min < max");
  const double ratio = std::pow(g.max / g.min, 1.0 / (g.points - 1));
  if (ratio < kMinGridRatio - 1e-12 || ratio > kMaxGridRatio + 1e-12)
    throw ConfigError("grid ratio " + detail::fmt17(ratio) + " outside [1.15, 1.6]");
  const double kF = std::sqrt(E);
  const double to_L = g.variable == GridVariable::KfL ? 1.0 / kF : 1.0;
  const double pi = std::numbers::pi;
  std::vector<double> out;
  for (int i = 0; i < g.points; ++i) {
    double x = g.min * std::pow(ratio, i);
    if (i == g.points - 1) x = g.max;
    if (g.kind == GridKind::PhaseLocked) {
      const double kfl = g.variable == GridVariable::KfL ? x : x * kF;
      const double t = (kfl - pi / 8.0) / pi;
      const double j = i == 0 ? std::ceil(t - 1e-9) : i == g.points - 1 ? std::floor(t + 1e-9) : std::round(t);
      const double snapped = pi / 8.0 + j * pi;
      x = g.variable == GridVariable::KfL ? snapped : snapped / kF;
    }
    out.push_back(x * to_L);
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) throw ConfigError("phase-locked grid collapses two points; widen the range");
  if (out.front() < 1.0) throw ConfigError("grid starts below L = 1");
  return out;
}

inline void validate_l_grid(const std::vector<double>& L) {
  if (L.size() < 2) throw ConfigError("single-point grid rejected: a sweep needs at least 2 L values");
  if (L.size() < std::size_t(kMinGridPoints))
    throw ConfigError("an L-grid needs at least " + std::to_string(kMinGridPoints) + " points");
  for (std::size_t i = 1; i < L.size(); ++i)
    if (!(L[i] > L[i - 1])) throw ConfigError("L-grid must be strictly increasing");
  if (!(L.front() >= 1.0)) throw ConfigError("L-grid must start at L >= 1");
  const double ratio = std::pow(L.back() / L.front(), 1.0 / double(L.size() - 1));
  if (ratio < kMinGridRatio - 1e-12 || ratio > kMaxGridRatio + 1e-12)
    throw ConfigError("mean grid ratio " + detail::fmt17(ratio) + " outside [1.15, 1.6]");
}

////////////////////////////////////////////////////////////////////////////////
//
// Sweeps
//
////////////////////////////////////////////////////////////////////////////////

struct SweepRow {
  double L = 0.0;
  std::vector<double> traces;       // one per test function
  std::optional<NormReport> norms;  // lattice engine only
  double s1_trace = 0.0;            // tr s_1(P_L)
  std::vector<InequalityCheck> telescope; // n = 1..4, lattice engine only
  std::size_t spectrum_size = 0;
  double max_clip = 0.0;
  double seconds = 0.0;
};

struct SweepTable {
  ModelConfig config;
  std::vector<std::string> labels;
  std::vector<double> s_list;
  std::string engine;
  std::vector<SweepRow> rows;

  bool has_norms() const { return !rows.empty() && rows.front().norms.has_value(); }

  std::vector<double> Ls() const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.L);
    return out;
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return i;
    throw ConfigError("sweep has no trace column for '" + label + "'");
  }

  std::vector<double> column(const std::string& label) const {
    const std::size_t j = index_of(label);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.traces[j]);
    return out;
  }
};

struct SweepAborted : std::runtime_error {
  SweepTable partial;
  int exit_code;
  SweepAborted(const std::string& what, SweepTable t, int code)
      : std::runtime_error(what), partial(std::move(t)), exit_code(code) {}
};

struct SweepOptions {
  std::vector<double> s_list{0.6, 0.8, 1.0};
  unsigned threads = 1;
  const EigenCache* cache = nullptr;
  // called from worker threads under a lock, in completion order
  std::function<void(const SweepRow&)> progress;
};

inline std::string engine_tag(const ModelConfig& cfg) {
  if (cfg.engine == Engine::Lattice) return "lattice";
  return cfg.potential.is_zero() ? "continuum-free" : "continuum-scattering";
}

namespace detail {

inline const TestFunction& s1_function() {
  static const TestFunction s1 = poly_basis(1, PolyKind::Symmetric);
  return s1;
}

inline void fill_traces(SweepRow& row, const TruncatedSpectrum& spec, const std::vector<TestFunction>& hs) {
  for (const auto& h : hs) row.traces.push_back(trace_h(spec, h));
  row.s1_trace = trace_h(spec, s1_function());
  row.spectrum_size = spec.size();
  row.max_clip = spec.max_clip;
}

// Projections for one box; shared by every row when the box is fixed.
struct LatticeState {
  LatticeOperator op;
  FermiProjection fp;
  std::optional<FermiProjection> fp0; // unset when V = 0
};

inline std::shared_ptr<const LatticeState> lattice_state(const ModelConfig& cfg, double R, const EigenCache* cache) {
  auto op = build_hamiltonian(cfg, R);
  auto fp = fermi_projection(op, cfg.energy, cache);
  std::optional<FermiProjection> fp0;
  if (!cfg.potential.is_zero()) fp0.emplace(fermi_projection(op.free_partner(), cfg.energy, cache));
  return std::make_shared<const LatticeState>(LatticeState{std::move(op), std::move(fp), std::move(fp0)});
}

inline SweepRow lattice_row(const ModelConfig& cfg, const LatticeState& st, double L,
                            const std::vector<TestFunction>& hs, const SweepOptions& opt) {
  SweepRow row;
  row.L = L;
  const Domain region = scale_domain(cfg.domain, L);
  if (!(region.extent() < st.op.box_half_width()))
    throw ConfigError("lattice box half-width " + detail::fmt17(st.op.box_half_width()) + " does not cover Lambda_L");
  const auto spec = truncate_spectrum(st.fp, region, st.op);
  fill_traces(row, spec, hs);
  const FermiProjection& P0 = st.fp0 ? *st.fp0 : st.fp;
  if (st.fp0) {
    row.norms = diff_stats(st.fp, P0, region, st.op, opt.s_list);
  } else {
    // V = 0: every difference vanishes, only ||Q_L||_2^2 is left
    NormReport n;
    n.L = L;
    n.q2 = n.q0_2 = q_block(st.fp, region, st.op).squaredNorm();
    for (double s : opt.s_list) n.qdiff2s.emplace_back(s, 0.0);
    n.qdiff_sigma = Vector(0);
    row.norms = n;
  }
  const auto spec0 = st.fp0 ? truncate_spectrum(P0, region, st.op) : spec;
  for (int n = 1; n <= 4; ++n) row.telescope.push_back(telescope_bound_check(spec, spec0, *row.norms, n));
  return row;
}

inline SweepRow continuum_row(const ModelConfig& cfg, const KernelEvaluator& K, double L,
                              const std::vector<TestFunction>& hs) {
  SweepRow row;
  row.L = L;
  const Domain region = scale_domain(cfg.domain, L);
  fill_traces(row, nystrom_spectrum(K, region, cfg.continuum), hs);
  return row;
}

} // namespace detail

// Rows are computed independently and stored by grid index, so the table does
// not depend on the thread count.
inline SweepTable run_sweep(const ModelConfig& cfg, const std::vector<double>& grid,
                            const std::vector<TestFunction>& hs, const SweepOptions& opt = {}) {
  cfg.validate();
  validate_l_grid(grid);
  SweepTable table;
  table.config = cfg;
  for (const auto& h : hs) table.labels.push_back(h.label);
  table.s_list = opt.s_list;
  table.engine = engine_tag(cfg);

  std::optional<KernelEvaluator> kernel;
  if (cfg.engine == Engine::ContinuumKernel)
    kernel.emplace(cfg.potential.is_zero() ? free_kernel(cfg.energy, cfg.dimension())
                                           : perturbed_kernel(cfg.potential, cfg.energy, cfg.continuum));

  std::shared_ptr<const detail::LatticeState> fixed;
  if (cfg.engine == Engine::Lattice && cfg.lattice.box_half_width) {
    try {
      fixed = detail::lattice_state(cfg, *cfg.lattice.box_half_width, opt.cache);
    } catch (const ConfigError& e) {
      throw SweepAborted(std::string("sweep aborted: ") + e.what(), std::move(table), 2);
    } catch (const std::exception& e) {
      throw SweepAborted(std::string("sweep aborted: ") + e.what(), std::move(table), 1);
    }
  }

  std::vector<std::optional<SweepRow>> rows(grid.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::string error;
  int code = 1;
  std::size_t error_index = grid.size();

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        SweepRow row;
        if (kernel) {
          row = detail::continuum_row(cfg, *kernel, grid[i], hs);
        } else {
          const auto st = fixed ? fixed : detail::lattice_state(cfg, cfg.box_half_width(grid[i]), opt.cache);
          row = detail::lattice_row(cfg, *st, grid[i], hs, opt);
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard lk(mu);
        if (opt.progress) opt.progress(row);
        rows[i] = std::move(row);
      } catch (const ConfigError& e) {
        std::lock_guard lk(mu);
        if (i < error_index) { error_index = i; error = e.what(); code = 2; }
        failed = true;
      } catch (const std::exception& e) {
        std::lock_guard lk(mu);
        if (i < error_index) { error_index = i; error = e.what(); code = 1; }
        failed = true;
      }
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(opt.threads, unsigned(grid.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& r : rows)
    if (r) table.rows.push_back(std::move(*r));
  if (failed)
    throw SweepAborted("sweep aborted at L = " + detail::fmt17(grid[error_index]) + ": " + error, std::move(table), code);
  return table;
}

////////////////////////////////////////////////////////////////////////////////
//
// Fits
//
////////////////////////////////////////////////////////////////////////////////

enum class FitBasis { Full, Leading };

struct FitResult {
  std::string label;
  int dimension = 1;
  std::vector<std::string> basis;
  Vector coef;    // a, b, then c, d for the full basis
  Vector sigma;   // leave-one-out jackknife spread per coefficient
  double residual_norm = 0.0;
  double condition = 0.0;        // design matrix as is
  double scaled_condition = 0.0; // after unit column scaling
  std::size_t rows = 0;
  std::optional<AsymptoticPrediction> prediction;
  double rel_err_a = std::numeric_limits<double>::quiet_NaN();
  double rel_err_b = std::numeric_limits<double>::quiet_NaN();

  double a() const { return coef(0); }
  double b() const { return coef(1); }
};

namespace detail {

inline std::vector<std::string> basis_labels(int d, FitBasis b) {
  std::vector<std::string> out = d == 1 ? std::vector<std::string>{"L", "ln L", "1"}
                                        : std::vector<std::string>{"L^2", "L ln L", "L", "1"};
  if (b == FitBasis::Leading) out.resize(2);
  return out;
}

inline Matrix design_matrix(const std::vector<double>& L, int d, FitBasis b) {
  const auto k = Eigen::Index(basis_labels(d, b).size());
  Matrix A(Eigen::Index(L.size()), k);
  for (std::size_t i = 0; i < L.size(); ++i) {
    const double x = L[i], lx = std::log(x);
    const double col[4] = {std::pow(x, d), std::pow(x, d - 1) * lx, std::pow(x, d - 1), 1.0};
    for (Eigen::Index j = 0; j < k; ++j) A(Eigen::Index(i), j) = col[j];
  }
  return A;
}

inline Vector solve_scaled(const Matrix& A, const Vector& y, double* scaled_cond = nullptr) {
  Vector scale = A.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (scale(j) == 0.0) scale(j) = 1.0;
  const Matrix As = A * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (scaled_cond) *scaled_cond = cond;
  if (!(cond < 1e12)) throw NumericalError("rank-deficient design matrix (scaled condition " + detail::fmt17(cond) + ")");
  return svd.solve(y).cwiseQuotient(scale);
}

} // namespace detail

// Least squares of y against the basis at the given L values.
inline FitResult fit_series(const std::vector<double>& L, const std::vector<double>& y, int d,
                            FitBasis basis = FitBasis::Full) {
  if (d != 1 && d != 2) throw ConfigError("fits are implemented for d = 1 and d = 2");
  if (L.size() != y.size()) throw ConfigError("fit: L and value columns differ in length");
  FitResult f;
  f.dimension = d;
  f.basis = detail::basis_labels(d, basis);
  const std::size_t k = f.basis.size();
  if (L.size() < k + 2)
    throw ConfigError("fit needs at least " + std::to_string(k + 2) + " rows, got " + std::to_string(L.size()));
  for (double x : L)
    if (!(x > 0.0)) throw ConfigError("fit needs positive L");
  const Matrix A = detail::design_matrix(L, d, basis);
  const Vector yy = Eigen::Map<const Vector>(y.data(), Eigen::Index(y.size()));
  f.coef = detail::solve_scaled(A, yy, &f.scaled_condition);
  f.residual_norm = (A * f.coef - yy).norm();
  f.rows = L.size();
  const Vector sv = Eigen::JacobiSVD<Matrix>(A).singularValues();
  f.condition = sv(0) / sv(sv.size() - 1);

  const std::size_t n = L.size();
  std::vector<Vector> loo;
  for (std::size_t drop = 0; drop < n; ++drop) {
    Matrix Ai(Eigen::Index(n - 1), A.cols());
    Vector yi(Eigen::Index(n - 1));
    for (std::size_t i = 0, r = 0; i < n; ++i) {
      if (i == drop) continue;
      Ai.row(Eigen::Index(r)) = A.row(Eigen::Index(i));
      yi(Eigen::Index(r)) = yy(Eigen::Index(i));
      ++r;
    }
    loo.push_back(detail::solve_scaled(Ai, yi));
  }
  Vector mean = Vector::Zero(A.cols());
  for (const auto& c : loo) mean += c;
  mean /= double(n);
  Vector var = Vector::Zero(A.cols());
  for (const auto& c : loo) var += (c - mean).cwiseAbs2();
  f.sigma = (var * (double(n - 1) / double(n))).cwiseSqrt();
  return f;
}

inline FitResult fit_asymptotics(const SweepTable& t, const TestFunction& h,
                                 N0Convention conv = kDefaultN0Convention, FitBasis basis = FitBasis::Full,
                                 std::size_t drop_first = 0) {
  auto L = t.Ls();
  auto y = t.column(h.label);
  if (drop_first >= L.size()) throw ConfigError("fit: dropping every row");
  L.erase(L.begin(), L.begin() + long(drop_first));
  y.erase(y.begin(), y.begin() + long(drop_first));
  FitResult f = fit_series(L, y, t.config.dimension(), basis);
  f.label = h.label;
  f.prediction = predict_trace(h, t.config.energy, t.config.domain, conv);
  if (f.prediction->a_pred != 0.0) f.rel_err_a = (f.a() - f.prediction->a_pred) / f.prediction->a_pred;
  if (f.prediction->b_pred != 0.0) f.rel_err_b = (f.b() - f.prediction->b_pred) / f.prediction->b_pred;
  return f;
}

// Fitted basis evaluated at L.
inline double evaluate_fit(const FitResult& f, double L) {
  const FitBasis b = f.basis.size() == 2 ? FitBasis::Leading : FitBasis::Full;
  const Matrix A = detail::design_matrix({L}, f.dimension, b);
  return A.row(0).dot(f.coef);
}

////////////////////////////////////////////////////////////////////////////////
//
// Verdicts
//
////////////////////////////////////////////////////////////////////////////////

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
  case Verdict::Pass: return "pass";
  case Verdict::Fail: return "fail";
  default: return "inconclusive";
  }
}

namespace detail {

inline std::size_t top_half_start(std::size_t n) { return n / 2; }

inline bool non_increasing(const std::vector<double>& v, std::size_t from) {
  for (std::size_t i = from + 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] * (1.0 + 1e-12) + 1e-15) return false;
  return true;
}

inline double surface_scale(double L, int d) { return std::pow(L, d - 1) * std::log(L); }

} // namespace detail

struct StabilityReport {
  std::string label;
  std::vector<double> L;
  std::vector<double> delta; // tr h(P_L) - tr h(P_{L,0})
  std::vector<double> ratio; // |delta| / (L^{d-1} ln L)
  Verdict trend = Verdict::Inconclusive;
  Verdict coefficient = Verdict::Fail;
  Verdict overall = Verdict::Fail;
  double b_V = 0.0, b_0 = 0.0;
  double sigma_V = 0.0, sigma_0 = 0.0;
  double tolerance = 0.0; // allowed |b_V - b_0|
  double rel_diff = 0.0;  // |b_V - b_0| / |b_0|
};

inline constexpr double kStabilityRelTol = 0.05;

inline StabilityReport stability_report(const SweepTable& withV, const SweepTable& free, const TestFunction& h,
                                        double rel_tol = kStabilityRelTol) {
  if (withV.rows.size() != free.rows.size()) throw ConfigError("stability: sweeps have different row counts");
  for (std::size_t i = 0; i < withV.rows.size(); ++i)
    if (std::abs(withV.rows[i].L - free.rows[i].L) > 1e-12 * withV.rows[i].L)
      throw ConfigError("stability: sweeps use different L-grids");
  if (withV.config.energy != free.config.energy) throw ConfigError("stability: sweeps use different E");
  if (withV.config.domain.describe() != free.config.domain.describe())
    throw ConfigError("stability: sweeps use different domains");
  if (withV.config.engine != free.config.engine) throw ConfigError("stability: sweeps use different engines");

  StabilityReport r;
  r.label = h.label;
  const int d = withV.config.dimension();
  const auto yV = withV.column(h.label), y0 = free.column(h.label);
  r.L = withV.Ls();
  for (std::size_t i = 0; i < r.L.size(); ++i) {
    r.delta.push_back(yV[i] - y0[i]);
    const double s = detail::surface_scale(r.L[i], d);
    if (!(s > 0.0)) throw ConfigError("stability: ratio undefined at L <= 1");
    r.ratio.push_back(std::abs(r.delta.back()) / s);
  }
  r.trend = detail::non_increasing(r.ratio, detail::top_half_start(r.ratio.size())) ? Verdict::Pass
                                                                                    : Verdict::Inconclusive;
  const auto fV = fit_asymptotics(withV, h);
  const auto f0 = fit_asymptotics(free, h);
  r.b_V = fV.b();
  r.b_0 = f0.b();
  r.sigma_V = fV.sigma(1);
  r.sigma_0 = f0.sigma(1);
  r.tolerance = std::max(3.0 * std::hypot(r.sigma_V, r.sigma_0), rel_tol * std::abs(r.b_0));
  const double diff = std::abs(r.b_V - r.b_0);
  r.rel_diff = r.b_0 != 0.0 ? diff / std::abs(r.b_0) : diff;
  r.coefficient = diff <= r.tolerance ? Verdict::Pass : Verdict::Fail;
  if (r.coefficient == Verdict::Fail) r.overall = Verdict::Fail;
  else r.overall = r.trend;
  return r;
}

////////////////////////////////////////////////////////////////////////////////
//
// Verification suite
//
////////////////////////////////////////////////////////////////////////////////

struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::Fail;
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;
};

// Each check runs in isolation: an exception becomes a failed check.
class VerificationSuite {
public:
  void add(std::string name, std::function<CheckResult()> fn) { checks_.emplace_back(std::move(name), std::move(fn)); }

  std::vector<CheckResult> run() const {
    std::vector<CheckResult> out;
    for (const auto& [name, fn] : checks_) {
      CheckResult r;
      try {
        r = fn();
      } catch (const std::exception& e) {
        r.verdict = Verdict::Fail;
        r.detail = std::string("error: ") + e.what();
      }
      r.name = name;
      out.push_back(std::move(r));
    }
    return out;
  }

  std::size_t size() const { return checks_.size(); }

private:
  std::vector<std::pair<std::string, std::function<CheckResult()>>> checks_;
};

inline Verdict overall_verdict(const std::vector<CheckResult>& rs) {
  bool inconclusive = false;
  for (const auto& r : rs) {
    if (r.verdict == Verdict::Fail) return Verdict::Fail;
    if (r.verdict == Verdict::Inconclusive) inconclusive = true;
  }
  return inconclusive ? Verdict::Inconclusive : Verdict::Pass;
}

////////////////////////////////////////////////////////////////////////////////
//
// Lattice norm checks on a sweep with NormReports
//
////////////////////////////////////////////////////////////////////////////////

inline constexpr double kBoundSlack = 1.1;

namespace detail {

inline void need_norms(const SweepTable& t) {
  if (!t.has_norms()) throw ConfigError("norm checks need a lattice sweep (no NormReports in the table)");
}

inline std::vector<double> norm_column(const SweepTable& t, const std::function<double(const NormReport&)>& f) {
  std::vector<double> out;
  for (const auto& r : t.rows) out.push_back(f(*r.norms));
  return out;
}

inline double max_of(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = from; i < to; ++i) m = std::max(m, v[i]);
  return m;
}

} // namespace detail

// max over L >= L_max/2 of ||dQ||_2 against its value at the grid point
// nearest L_max/2
inline CheckResult check_qdiff_plateau(const SweepTable& t) {
  detail::need_norms(t);
  const auto L = t.Ls();
  const auto q = detail::norm_column(t, [](const NormReport& n) { return n.qdiff2; });
  const double half = 0.5 * L.back();
  std::size_t anchor = 0;
  for (std::size_t i = 1; i < L.size(); ++i)
    if (std::abs(L[i] - half) < std::abs(L[anchor] - half)) anchor = i;
  double top = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i)
    if (L[i] >= half) top = std::max(top, q[i]);
  CheckResult r;
  r.metrics = {{"anchor_L", L[anchor]}, {"anchor_value", q[anchor]}, {"top_max", top}};
  r.verdict = top <= kBoundSlack * q[anchor] ? Verdict::Pass : Verdict::Fail;
  r.detail = "max ||dQ||_2 on the top half " + detail::fmt17(top) + " vs 1.1 x " + detail::fmt17(q[anchor]);
  return r;
}

// ||dP||_2^2 / ln L non-increasing on the top half
inline CheckResult check_pdiff_trend(const SweepTable& t) {
  detail::need_norms(t);
  const auto L = t.Ls();
  const auto p = detail::norm_column(t, [](const NormReport& n) { return n.pdiff2 * n.pdiff2; });
  std::vector<double> ratio;
  for (std::size_t i = 0; i < L.size(); ++i) ratio.push_back(p[i] / detail::surface_scale(L[i], t.config.dimension()));
  const std::size_t h = detail::top_half_start(L.size());
  const bool bounded = detail::max_of(ratio, h, ratio.size()) <= kBoundSlack * detail::max_of(ratio, 0, h);
  const bool mono = detail::non_increasing(ratio, h);
  CheckResult r;
  r.metrics = {{"ratio_first", ratio.front()}, {"ratio_last", ratio.back()}};
  r.verdict = bounded && mono ? Verdict::Pass : bounded ? Verdict::Inconclusive : Verdict::Fail;
  r.detail = std::string("||dP||_2^2/ln L ") + (mono ? "non-increasing" : "not monotone") + " on the top half, " +
             (bounded ? "bounded" : "growing");
  return r;
}

// |tr dP| / ln L: top-half max within 1.1 x bottom-half max
inline CheckResult check_trdiff_bounded(const SweepTable& t) {
  detail::need_norms(t);
  const auto L = t.Ls();
  const auto tr = detail::norm_column(t, [](const NormReport& n) { return std::abs(n.trdiff); });
  std::vector<double> ratio;
  for (std::size_t i = 0; i < L.size(); ++i) ratio.push_back(tr[i] / detail::surface_scale(L[i], t.config.dimension()));
  const std::size_t h = detail::top_half_start(L.size());
  const double lo = detail::max_of(ratio, 0, h), hi = detail::max_of(ratio, h, ratio.size());
  CheckResult r;
  r.metrics = {{"bottom_max", lo}, {"top_max", hi}};
  r.verdict = hi <= kBoundSlack * lo ? Verdict::Pass : Verdict::Fail;
  r.detail = "|tr dP|/ln L top-half max " + detail::fmt17(hi) + " vs bottom-half max " + detail::fmt17(lo);
  return r;
}

inline CheckResult check_telescope(const SweepTable& t) {
  detail::need_norms(t);
  CheckResult r;
  r.verdict = Verdict::Pass;
  double worst = 0.0;
  for (const auto& row : t.rows)
    for (std::size_t n = 0; n < row.telescope.size(); ++n) {
      const auto& c = row.telescope[n];
      if (c.rhs > 0.0) worst = std::max(worst, c.lhs / c.rhs);
      if (!c.holds) {
        r.verdict = Verdict::Fail;
        r.detail += "violated at L = " + detail::fmt17(row.L) + ", n = " + std::to_string(n + 1) + "; ";
      }
    }
  r.metrics = {{"max_lhs_over_rhs", worst}};
  if (r.verdict == Verdict::Pass) r.detail = "telescope bound holds for n = 1..4 on every row";
  return r;
}

// Random singular-value sets plus every real dQ instance of the table.
inline CheckResult check_interpolation(const SweepTable& t, unsigned seed = 12345, int random_cases = 200) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto params = [&] {
    const double p0 = 0.05 + 1.95 * u(rng);
    const double p1 = p0 + 4.0 * u(rng);
    return std::array<double, 3>{p0, p1, u(rng)};
  };
  int failures = 0, cases = 0;
  for (int c = 0; c < random_cases; ++c) {
    const int n = 1 + int(u(rng) * 40);
    Vector s(n);
    for (int i = 0; i < n; ++i) s(i) = std::pow(u(rng), 1.0 + 6.0 * u(rng)) * 10.0;
    const auto p = params();
    failures += !interpolation_check(s, p[0], p[1], p[2]).holds;
    ++cases;
  }
  for (const auto& row : t.rows) {
    if (!row.norms || row.norms->qdiff_sigma.size() == 0) continue;
    for (int k = 0; k < 5; ++k) {
      const auto p = params();
      failures += !interpolation_check(row.norms->qdiff_sigma, p[0], p[1], p[2]).holds;
      ++cases;
    }
    // interpolation exponents with p_theta = 2s, p1 = 2
    for (double s : t.s_list) {
      const double p0 = std::min(1.0, 2.0 * s);
      const double theta = 1.0 - p0 / s * (1.0 - s) / (2.0 - p0);
      failures += !interpolation_check(row.norms->qdiff_sigma, p0, 2.0, theta).holds;
      ++cases;
    }
  }
  CheckResult r;
  r.metrics = {{"cases", double(cases)}, {"failures", double(failures)}};
  r.verdict = failures == 0 ? Verdict::Pass : Verdict::Fail;
  r.detail = std::to_string(failures) + " violations in " + std::to_string(cases) + " instances";
  return r;
}

// ||dQ||_{2s}^{2s} <= C L^{2d(1-s)/(2-p0)}, p0 = min(1, 2s): C fitted on the
// first third of the sweep, checked with 10% slack on the rest.
inline CheckResult check_bound_shape(const SweepTable& t) {
  detail::need_norms(t);
  const auto L = t.Ls();
  const int d = t.config.dimension();
  const std::size_t n_fit = std::max<std::size_t>(1, (L.size() + 2) / 3);
  CheckResult r;
  r.verdict = Verdict::Pass;
  for (std::size_t k = 0; k < t.s_list.size(); ++k) {
    const double s = t.s_list[k];
    const double p0 = std::min(1.0, 2.0 * s);
    const double gamma = 2.0 * d * (1.0 - s) / (2.0 - p0);
    double C = 0.0;
    for (std::size_t i = 0; i < n_fit; ++i) C = std::max(C, t.rows[i].norms->qdiff2s[k].second / std::pow(L[i], gamma));
    double worst = 0.0;
    for (std::size_t i = n_fit; i < L.size(); ++i) {
      const double v = t.rows[i].norms->qdiff2s[k].second;
      worst = std::max(worst, C > 0.0 ? v / (C * std::pow(L[i], gamma)) : v > 0.0 ? HUGE_VAL : 0.0);
    }
    r.metrics.emplace_back("C_s" + detail::fmt17(s), C);
    r.metrics.emplace_back("worst_ratio_s" + detail::fmt17(s), worst);
    if (!(worst <= kBoundSlack)) {
      r.verdict = Verdict::Fail;
      r.detail += "s = " + detail::fmt17(s) + " exceeds the fitted bound by " + detail::fmt17(worst) + "; ";
    }
  }
  if (r.verdict == Verdict::Pass) r.detail = "fitted bound holds on the validation rows for every s";
  return r;
}

// ||Q_L||_2^2 = tr s_1(P_L)
inline constexpr double kIdentityTolerance = 1e-10;

inline CheckResult check_q2_identity(const SweepTable& t) {
  detail::need_norms(t);
  double worst = 0.0;
  for (const auto& row : t.rows)
    worst = std::max(worst, std::abs(row.norms->q2 - row.s1_trace) / std::max(1.0, std::abs(row.s1_trace)));
  CheckResult r;
  r.metrics = {{"max_rel_error", worst}};
  r.verdict = worst <= kIdentityTolerance ? Verdict::Pass : Verdict::Fail;
  r.detail = "max relative mismatch " + detail::fmt17(worst);
  return r;
}

// ||dQ||_{2s}^{2s} / L^{d-1} non-increasing on the top half, s > 1/d
inline CheckResult check_small_o_trend(const SweepTable& t) {
  detail::need_norms(t);
  const auto L = t.Ls();
  const int d = t.config.dimension();
  CheckResult r;
  r.verdict = Verdict::Pass;
  int used = 0;
  for (std::size_t k = 0; k < t.s_list.size(); ++k) {
    const double s = t.s_list[k];
    if (!(s > 1.0 / d)) continue;
    ++used;
    std::vector<double> ratio;
    for (std::size_t i = 0; i < L.size(); ++i) ratio.push_back(t.rows[i].norms->qdiff2s[k].second / std::pow(L[i], d - 1));
    r.metrics.emplace_back("ratio_last_s" + detail::fmt17(s), ratio.back());
    if (!detail::non_increasing(ratio, detail::top_half_start(ratio.size()))) {
      r.verdict = Verdict::Inconclusive;
      r.detail += "s = " + detail::fmt17(s) + " not monotone on the top half; ";
    }
  }
  if (used == 0) {
    r.verdict = Verdict::Inconclusive;
    r.detail = "no configured s exceeds 1/d";
  } else if (r.verdict == Verdict::Pass) {
    r.detail = "ratio non-increasing on the top half for every s > 1/d";
  }
  return r;
}

// Which N_0 normalization the lattice eigenvalue count supports.
struct IdsArbitration {
  double estimate = 0.0;
  double as_printed = 0.0;
  double weyl = 0.0;
  N0Convention selected = kDefaultN0Convention;
  double rel_error = 0.0; // of the selected value
};

inline IdsArbitration arbitrate_n0(int d, double E, IdsOptions opt = {}) {
  ModelConfig c;
  c.energy = E;
  c.domain = d == 1 ? Domain::interval(-1.0, 1.0) : Domain::square(1.0);
  c.potential = Potential::zero(d);
  IdsArbitration a;
  a.estimate = ids_estimate(c, E, opt);
  a.as_printed = n0(E, d, N0Convention::AsPrinted);
  a.weyl = n0(E, d, N0Convention::Weyl);
  const double ea = std::abs(a.estimate - a.as_printed), ew = std::abs(a.estimate - a.weyl);
  a.selected = ew <= ea ? N0Convention::Weyl : N0Convention::AsPrinted;
  a.rel_error = std::min(ea, ew) / n0(E, d, a.selected);
  return a;
}

inline CheckResult check_ids(int d, double E, N0Convention configured, double rel_tol = 0.02) {
  IdsOptions opt;
  opt.spacing = 0.1 / std::max(1.0, std::sqrt(E));
  if (d == 2) opt.box_half_width = 60.0;
  const auto a = arbitrate_n0(d, E, opt);
  CheckResult r;
  r.metrics = {{"estimate", a.estimate}, {"as_printed", a.as_printed}, {"weyl", a.weyl}, {"rel_error", a.rel_error}};
  r.verdict = a.selected == configured && a.rel_error <= rel_tol ? Verdict::Pass : Verdict::Fail;
  r.detail = std::string("eigenvalue count selects ") + to_string(a.selected) + " (configured " + to_string(configured) +
             ")";
  return r;
}

inline CheckResult check_stability(const SweepTable& withV, const SweepTable& free, const TestFunction& h,
                                   double rel_tol = kStabilityRelTol) {
  const auto s = stability_report(withV, free, h, rel_tol);
  CheckResult r;
  r.verdict = s.overall;
  r.metrics = {{"b_V", s.b_V}, {"b_0", s.b_0}, {"rel_diff", s.rel_diff}, {"tolerance", s.tolerance},
               {"ratio_last", s.ratio.back()}};
  r.detail = std::string("coefficient ") + to_string(s.coefficient) + ", trend " + to_string(s.trend);
  return r;
}

} // namespace szego

#endif // SZEGO_ASYMPTOTICS_HPP
