#ifndef SZEGO_CONTINUUM_HPP
#define SZEGO_CONTINUUM_HPP

// Continuum Fermi-projection kernels: the free kernels in d = 1, 2 and the
// 1D kernel of -d^2/dx^2 + V built from bound states and scattering states,
// plus Nystrom discretization of the truncated operator.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "szego/error.hpp"
#include "szego/linalg.hpp"
#include "szego/model.hpp"
#include "szego/quadrature.hpp"
#include "szego/spectrum.hpp"

namespace szego {

using cplx = std::complex<double>;

////////////////////////////////////////////////////////////////////////////////
//
// Fundamental system of -u'' + V u = eps u on the support [-a, a]
//
////////////////////////////////////////////////////////////////////////////////

// c(a) = 1, c'(a) = 0, s(a) = 0, s'(a) = 1, integrated leftwards to -a.
struct FundamentalSystem {
  double c = 1.0, dc = 0.0, s = 0.0, ds = 1.0; // at x = -a
  double icc = 0.0, ics = 0.0, iss = 0.0;       // int_{-a}^{a} c^2, c s, s^2
  std::vector<std::array<double, 4>> at;        // (c, c', s, s') at requested points
};

inline constexpr double kOdeAbsTol = 1e-12;
inline constexpr double kOdeRelTol = 1e-10;

// points: inside [-a, a], any order
inline FundamentalSystem integrate_fundamental(const Potential& V, double eps, const std::vector<double>& points) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 7>;
  const double a = V.support_radius();
  FundamentalSystem fs;
  fs.at.assign(points.size(), {0.0, 0.0, 0.0, 0.0});
  if (a == 0.0) {
    // degenerate support: c = 1, s = 0 at the single point
    for (auto& p : fs.at) p = {1.0, 0.0, 0.0, 1.0};
    return fs;
  }

  // segment cuts, descending from a to -a
  std::vector<double> cuts{a};
  for (double b : V.breakpoints())
    if (b > -a && b < a) cuts.push_back(b);
  cuts.push_back(-a);
  std::sort(cuts.begin(), cuts.end(), std::greater<>());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return points[i] > points[j]; });

  State y{1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
  std::size_t next = 0;
  auto stepper = ode::make_controlled(kOdeAbsTol, kOdeRelTol, ode::runge_kutta_dopri5<State>());

  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double hi = cuts[seg], lo = cuts[seg + 1];
    // V is continuous inside the segment; evaluate it there even at the ends
    const double nudge = 1e-12 * (hi - lo);
    auto rhs = [&](const State& u, State& du, double x) {
      const double q = V(std::clamp(x, lo + nudge, hi - nudge)) - eps;
      du[0] = u[1];
      du[1] = q * u[0];
      du[2] = u[3];
      du[3] = q * u[2];
      // integrals accumulate with the leftward orientation flipped below
      du[4] = -u[0] * u[0];
      du[5] = -u[0] * u[2];
      du[6] = -u[2] * u[2];
    };
    std::vector<double> times{hi};
    std::vector<std::size_t> idx{std::size_t(-1)};
    while (next < order.size() && points[order[next]] >= lo) {
      const double p = std::min(points[order[next]], hi);
      times.push_back(p);
      idx.push_back(order[next]);
      ++next;
    }
    times.push_back(lo);
    idx.push_back(std::size_t(-1));
    // integrate_times needs strictly monotone times
    std::vector<double> t2;
    std::vector<std::vector<std::size_t>> owners;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!t2.empty() && times[i] == t2.back()) {
        if (idx[i] != std::size_t(-1)) owners.back().push_back(idx[i]);
        continue;
      }
      t2.push_back(times[i]);
      owners.push_back({});
      if (idx[i] != std::size_t(-1)) owners.back().push_back(idx[i]);
    }
    std::size_t obs = 0;
    auto observer = [&](const State& u, double) {
      for (std::size_t o : owners[obs]) fs.at[o] = {u[0], u[1], u[2], u[3]};
      ++obs;
    };
    const double dt = -std::min(0.01, 0.1 * (hi - lo));
    try {
      if (t2.size() >= 2)
        ode::integrate_times(stepper, rhs, y, t2.begin(), t2.end(), dt, observer,
                             ode::max_step_checker(1000000));
    } catch (const std::exception& e) {
      throw NumericalError(std::string("ODE integration across supp V failed (step-size underflow?): ") +
                           e.what());
    }
  }
  fs.c = y[0];
  fs.dc = y[1];
  fs.s = y[2];
  fs.ds = y[3];
  fs.icc = y[4];
  fs.ics = y[5];
  fs.iss = y[6];
  return fs;
}

////////////////////////////////////////////////////////////////////////////////
//
// Scattering states
//
////////////////////////////////////////////////////////////////////////////////

// phi_L = e^{ikx} + r e^{-ikx} (x < -a), t e^{ikx} (x > a)
// phi_R = e^{-ikx} + r_right e^{ikx} (x > a), t_right e^{-ikx} (x < -a)
struct ScatteringSolution {
  double k = 0.0;
  double a = 0.0;
  cplx r, t, r_right, t_right;
  // interior representation: phi_L = gl_c c + gl_s s, phi_R = gr_c c + gr_s s
  cplx gl_c, gl_s, gr_c, gr_s;
  std::shared_ptr<const Potential> potential;

  // valid for |x| >= a
  cplx left_exterior(double x) const {
    const cplx i(0.0, 1.0);
    return x <= -a ? std::exp(i * k * x) + r * std::exp(-i * k * x) : t * std::exp(i * k * x);
  }
  cplx right_exterior(double x) const {
    const cplx i(0.0, 1.0);
    return x >= a ? std::exp(-i * k * x) + r_right * std::exp(i * k * x) : t_right * std::exp(-i * k * x);
  }

  // Evaluate both states at arbitrary points (ODE pass for interior points).
  void evaluate(const std::vector<double>& xs, std::vector<cplx>& left, std::vector<cplx>& right) const {
    left.resize(xs.size());
    right.resize(xs.size());
    std::vector<double> inner;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::abs(xs[i]) < a) {
        inner.push_back(xs[i]);
        where.push_back(i);
      } else {
        left[i] = left_exterior(xs[i]);
        right[i] = right_exterior(xs[i]);
      }
    }
    if (!inner.empty()) {
      const auto fs = integrate_fundamental(*potential, k * k, inner);
      for (std::size_t j = 0; j < inner.size(); ++j) {
        const double c = fs.at[j][0], s = fs.at[j][2];
        left[where[j]] = gl_c * c + gl_s * s;
        right[where[j]] = gr_c * c + gr_s * s;
      }
    }
  }
};

namespace detail {

inline ScatteringSolution scattering_from(const Potential& V, double k, const FundamentalSystem& fs) {
  const cplx i(0.0, 1.0);
  const double a = V.support_radius();
  ScatteringSolution sol;
  sol.k = k;
  sol.a = a;
  const cplx ik = i * k;
  // left incidence: w = c + ik s equals e^{ik(x-a)} for x > a
  const cplx U = fs.c + ik * fs.s, dU = fs.dc + ik * fs.ds;
  const cplx A = (U + dU / ik) * std::exp(ik * a) / 2.0;
  const cplx B = (U - dU / ik) * std::exp(-ik * a) / 2.0;
  sol.t = std::exp(-ik * a) / A;
  sol.r = B / A;
  sol.gl_c = sol.t * std::exp(ik * a);
  sol.gl_s = sol.gl_c * ik;
  // right incidence: v = alpha c + beta s equals e^{-ik(x+a)} for x < -a (Wronskian 1)
  const cplx alpha = fs.ds + ik * fs.s;
  const cplx beta = -ik * fs.c - fs.dc;
  const cplx C = (alpha + beta / ik) * std::exp(-ik * a) / 2.0;
  const cplx D = (alpha - beta / ik) * std::exp(ik * a) / 2.0;
  sol.t_right = std::exp(-ik * a) / D;
  sol.r_right = C / D;
  sol.gr_c = alpha / D;
  sol.gr_s = beta / D;
  sol.potential = std::make_shared<const Potential>(V);
  return sol;
}

} // namespace detail

inline ScatteringSolution solve_scattering(const Potential& V, double k) {
  if (V.dimension() != 1) throw ConfigError("scattering solutions are implemented for d = 1");
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("scattering needs k > 0");
  return detail::scattering_from(V, k, integrate_fundamental(V, k * k, {}));
}

////////////////////////////////////////////////////////////////////////////////
//
// Bound states
//
////////////////////////////////////////////////////////////////////////////////

// u = c - kappa s decays to the right; psi = u / sqrt(norm2) inside supp V.
struct BoundState {
  double energy = 0.0;
  double kappa = 0.0;
  double norm2 = 1.0;
  double u_left = 0.0; // u(-a)
  bool reliable = true;
  std::shared_ptr<const Potential> potential;

  std::vector<double> evaluate(const std::vector<double>& xs) const {
    const double a = potential->support_radius();
    const double scale = 1.0 / std::sqrt(norm2);
    std::vector<double> out(xs.size());
    std::vector<double> inner;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      if (x >= a)
        out[i] = scale * std::exp(-kappa * (x - a));
      else if (x <= -a)
        out[i] = scale * u_left * std::exp(kappa * (x + a));
      else {
        inner.push_back(x);
        where.push_back(i);
      }
    }
    if (!inner.empty()) {
      const auto fs = integrate_fundamental(*potential, -kappa * kappa, inner);
      for (std::size_t j = 0; j < inner.size(); ++j)
        out[where[j]] = scale * (fs.at[j][0] - kappa * fs.at[j][2]);
    }
    return out;
  }
  double operator()(double x) const { return evaluate({x})[0]; }
};

inline constexpr double kThresholdEnergy = 1e-8;

inline std::vector<BoundState> bound_states(const Potential& V) {
  if (V.dimension() != 1) throw ConfigError("bound states are implemented for d = 1");
  std::vector<BoundState> out;
  double vmin = V.lower_bound();
  if (V.kind() == PotentialKind::Bump) vmin = std::min(0.0, V.components()[0].height);
  if (!(vmin < 0.0)) return out;
  const double a = V.support_radius();
  const double kmax = std::sqrt(-vmin);
  // u'(-a) - kappa u(-a): vanishes when u also decays to the left
  auto det = [&](double kappa) {
    const auto fs = integrate_fundamental(V, -kappa * kappa, {});
    return (fs.dc - kappa * fs.ds) - kappa * (fs.c - kappa * fs.s);
  };
  const int grid = 400 + 200 * int(std::ceil(2.0 * a * kmax / std::numbers::pi));
  std::vector<double> ks{1e-9};
  for (int j = 1; j <= grid; ++j) ks.push_back(kmax * j / grid);
  std::vector<double> ds(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) ds[j] = det(ks[j]);
  auto add = [&](double kappa) {
    const auto fs = integrate_fundamental(V, -kappa * kappa, {});
    BoundState b;
    b.kappa = kappa;
    b.energy = -kappa * kappa;
    b.u_left = fs.c - kappa * fs.s;
    const double inner = fs.icc - 2.0 * kappa * fs.ics + kappa * kappa * fs.iss;
    b.norm2 = inner + 1.0 / (2.0 * kappa) + b.u_left * b.u_left / (2.0 * kappa);
    b.reliable = std::abs(b.energy) >= kThresholdEnergy;
    b.potential = std::make_shared<const Potential>(V);
    out.push_back(b);
  };
  for (std::size_t j = 0; j + 1 < ks.size(); ++j) {
    if (ds[j] == 0.0) {
      add(ks[j]);
      continue;
    }
    if (ds[j] * ds[j + 1] >= 0.0) continue;
    double lo = ks[j], hi = ks[j + 1], dlo = ds[j];
    while (hi - lo > 1e-13 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      const double dm = det(mid);
      if (dm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((dm < 0.0) == (dlo < 0.0)) {
        lo = mid;
        dlo = dm;
      } else {
        hi = mid;
      }
    }
    add(0.5 * (lo + hi));
  }
  if (ds.back() == 0.0) add(ks.back());
  std::sort(out.begin(), out.end(), [](const BoundState& x, const BoundState& y) { return x.energy < y.energy; });
  return out;
}

////////////////////////////////////////////////////////////////////////////////
//
// Kernel evaluators
//
////////////////////////////////////////////////////////////////////////////////

enum class KernelKind { Free, Scattering };

inline double sinc_kernel(double kF, double dx) {
  const double z = kF * dx;
  if (std::abs(z) < 1e-4) return kF / std::numbers::pi * (1.0 - z * z / 6.0);
  return std::sin(z) / (std::numbers::pi * dx);
}

inline double bessel_kernel(double kF, double r) {
  const double z = kF * r;
  if (z < 1e-4) return kF * kF / (4.0 * std::numbers::pi) * (1.0 - z * z / 8.0);
  return kF * std::cyl_bessel_j(1.0, z) / (2.0 * std::numbers::pi * r);
}

struct KRule {
  QuadratureRule rule;
  double reach = 0.0; // max |x| the rule was converged for
};

class KernelEvaluator {
public:
  int dimension() const { return dim_; }
  double energy() const { return energy_; }
  double fermi_wavenumber() const { return std::sqrt(energy_); }
  KernelKind provenance() const { return kind_; }
  const std::vector<BoundState>& bound_states() const { return bound_; }
  const Potential* potential() const { return potential_.get(); }
  const ContinuumParams& params() const { return params_; }

  double operator()(const Point& x, const Point& y) const {
    if (kind_ == KernelKind::Free) {
      const double kF = fermi_wavenumber();
      if (dim_ == 1) return sinc_kernel(kF, x.x - y.x);
      return bessel_kernel(kF, std::hypot(x.x - y.x, x.y - y.y));
    }
    const Matrix F = factor({x.x, y.x});
    return F.row(0).dot(F.row(1));
  }
  double operator()(double x, double y) const { return (*this)(Point{x, 0.0}, Point{y, 0.0}); }

  // F with K(x_i, x_j) = (F F^T)_ij: bound states, then per k-node
  // sqrt(w/2pi) (Re phi_L, Im phi_L, Re phi_R, Im phi_R).
  Matrix factor(const std::vector<double>& xs) const {
    if (dim_ != 1) throw ConfigError("kernel factorization is implemented for d = 1");
    double reach = 0.0;
    for (double x : xs) reach = std::max(reach, std::abs(x));
    const KRule kr = k_rule(reach);
    return factor_with(xs, kr.rule);
  }

  // Gauss-Legendre rule in k on [0, k_F] converged (relative 1e-7 against
  // the doubled rule) for |x|, |y| <= reach.
  KRule k_rule(double reach) const {
    const double kF = fermi_wavenumber();
    const int order = params_.k_panel_order;
    int panels = int(std::ceil(params_.k_oversampling * kF * 2.0 * reach / std::numbers::pi / order)) + 2;
    const double scale = kF / std::numbers::pi;
    std::vector<double> probe{-reach, -0.5 * reach, 0.0, 0.37 * reach, reach};
    if (potential_) {
      const double a = potential_->support_radius();
      probe.push_back(0.5 * a);
      probe.push_back(-0.8 * a);
    }
    for (int attempt = 0; attempt < 8; ++attempt) {
      const auto r1 = build_rule(panels);
      const auto r2 = build_rule(2 * panels);
      const Matrix F1 = factor_with(probe, r1), F2 = factor_with(probe, r2);
      const Matrix K1 = F1 * F1.transpose(), K2 = F2 * F2.transpose();
      const double diff = (K1 - K2).cwiseAbs().maxCoeff();
      if (diff <= 1e-7 * scale) return {r2, reach};
      panels *= 2;
    }
    throw NumericalError("k-quadrature of the scattering kernel did not converge to 1e-7");
  }

  static KernelEvaluator make_free(double E, int d) {
    KernelEvaluator k;
    k.dim_ = d;
    k.energy_ = E;
    k.kind_ = KernelKind::Free;
    return k;
  }

  static KernelEvaluator make_scattering(const Potential& V, double E, const ContinuumParams& params) {
    KernelEvaluator k;
    k.dim_ = 1;
    k.energy_ = E;
    k.kind_ = KernelKind::Scattering;
    k.potential_ = std::make_shared<const Potential>(V);
    k.params_ = params;
    k.bound_ = szego::bound_states(V);
    return k;
  }

private:
  // Equal panels on [0, k_F], each split where |r(k)| jumps between nodes.
  QuadratureRule build_rule(int panels) const {
    const double kF = fermi_wavenumber();
    const int order = params_.k_panel_order;
    std::vector<double> edges;
    for (int p = 0; p <= panels; ++p) edges.push_back(kF * p / panels);
    if (potential_ && !potential_->is_zero()) {
      for (int pass = 0; pass < 4; ++pass) {
        std::vector<double> refined{edges.front()};
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
          const double lo = edges[i], hi = edges[i + 1];
          double worst = 0.0;
          cplx prev;
          for (int j = 0; j <= 8; ++j) {
            const double k = lo + (hi - lo) * (j + 0.5) / 9.0;
            const cplx r = solve_scattering(*potential_, k).r;
            if (j > 0) worst = std::max(worst, std::abs(r - prev));
            prev = r;
          }
          if (worst > 0.05) refined.push_back(0.5 * (lo + hi));
          refined.push_back(hi);
        }
        if (refined.size() == edges.size()) break;
        edges = std::move(refined);
      }
    }
    return composite_rule(edges, order);
  }

  Matrix factor_with(const std::vector<double>& xs, const QuadratureRule& rule) const {
    const Eigen::Index n = Eigen::Index(xs.size());
    const Eigen::Index nb = Eigen::Index(bound_.size());
    const Eigen::Index nk = Eigen::Index(rule.size());
    Matrix F(n, nb + 4 * nk);
    for (Eigen::Index b = 0; b < nb; ++b) {
      const auto v = bound_[b].evaluate(xs);
      for (Eigen::Index i = 0; i < n; ++i) F(i, b) = v[i];
    }
    const cplx I(0.0, 1.0);
    std::vector<cplx> left, right;
    for (Eigen::Index q = 0; q < nk; ++q) {
      const double k = rule.nodes[q];
      const double wq = std::sqrt(rule.weights[q] / (2.0 * std::numbers::pi));
      if (potential_->is_zero()) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double c = std::cos(k * xs[i]), s = std::sin(k * xs[i]);
          F(i, nb + 4 * q) = wq * c;
          F(i, nb + 4 * q + 1) = wq * s;
          F(i, nb + 4 * q + 2) = wq * c;
          F(i, nb + 4 * q + 3) = -wq * s;
        }
        continue;
      }
      const auto sol = solve_scattering(*potential_, k);
      sol.evaluate(xs, left, right);
      for (Eigen::Index i = 0; i < n; ++i) {
        F(i, nb + 4 * q) = wq * left[i].real();
        F(i, nb + 4 * q + 1) = wq * left[i].imag();
        F(i, nb + 4 * q + 2) = wq * right[i].real();
        F(i, nb + 4 * q + 3) = wq * right[i].imag();
      }
    }
    return F;
  }

  int dim_ = 1;
  double energy_ = 1.0;
  KernelKind kind_ = KernelKind::Free;
  std::shared_ptr<const Potential> potential_;
  ContinuumParams params_;
  std::vector<BoundState> bound_;
};

inline KernelEvaluator free_kernel(double E, int d) {
  if (!(E > 0.0) || !std::isfinite(E)) throw ConfigError("free kernel needs E > 0");
  if (d != 1 && d != 2) throw ConfigError("free kernel implemented for d = 1 and d = 2");
  return KernelEvaluator::make_free(E, d);
}

inline KernelEvaluator perturbed_kernel(const Potential& V, double E, const ContinuumParams& params = {}) {
  if (V.dimension() != 1) throw ConfigError("perturbed kernels exist for d = 1 only; use the lattice engine in d = 2");
  if (!(E > 0.0) || !std::isfinite(E)) throw ConfigError("perturbed kernel needs E > 0");
  return KernelEvaluator::make_scattering(V, E, params);
}

////////////////////////////////////////////////////////////////////////////////
//
// Nystrom discretization
//
////////////////////////////////////////////////////////////////////////////////

inline constexpr std::size_t kMaxNystromBlock = 12000;

namespace detail {

// 1D composite rule on [lo, hi], panels no wider than `order` nodes per
// ppw-th of a local wavelength, cut at the potential's breakpoints.
inline QuadratureRule nystrom_rule_1d(double lo, double hi, double kF, const Potential* V, const ContinuumParams& p) {
  const double width_free = p.panel_order * (2.0 * std::numbers::pi / kF) / p.nodes_per_wavelength;
  std::vector<double> cuts{lo};
  double a = 0.0, k_in = kF;
  if (V && !V->is_zero()) {
    a = V->support_radius();
    k_in = std::sqrt(kF * kF + V->sup_norm());
    for (double b : V->breakpoints())
      if (b > lo && b < hi) cuts.push_back(b);
    if (-a > lo && -a < hi) cuts.push_back(-a);
    if (a > lo && a < hi) cuts.push_back(a);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double width_in = p.panel_order * (2.0 * std::numbers::pi / k_in) / p.nodes_per_wavelength;
  std::vector<double> edges{cuts.front()};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double w = (a > 0.0 && std::abs(mid) < a) ? width_in : width_free;
    const auto sub = panel_edges(cuts[i], cuts[i + 1], {}, w);
    edges.insert(edges.end(), sub.begin() + 1, sub.end());
  }
  return composite_rule(edges, p.panel_order);
}

inline std::vector<double> eig_of_gram_or_outer(const Matrix& B) {
  // nonzero spectrum of B B^T from the smaller of the two products
  Matrix G;
  if (B.cols() < B.rows()) {
    G = Matrix::Zero(B.cols(), B.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose());
  } else {
    G = Matrix::Zero(B.rows(), B.rows());
    G.selfadjointView<Eigen::Lower>().rankUpdate(B);
  }
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  const Vector ev = symmetric_eigenvalues(G);
  return {ev.data(), ev.data() + ev.size()};
}

} // namespace detail

inline std::string nystrom_tag(const ContinuumParams& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "ppw=%.17g order=%d", p.nodes_per_wavelength, p.panel_order);
  return buf;
}

inline TruncatedSpectrum nystrom_spectrum(const KernelEvaluator& K, const Domain& region, const ContinuumParams& p) {
  if (region.dimension() != K.dimension()) throw ConfigError("region and kernel dimensions differ");
  if (p.nodes_per_wavelength < 6.0)
    throw ConfigError("insufficient Nystrom node density: need >= 6 nodes per Fermi wavelength");
  const double kF = K.fermi_wavenumber();
  const std::string engine = K.provenance() == KernelKind::Free ? "continuum-free" : "continuum-scattering";

  if (K.dimension() == 1) {
    const auto rule = detail::nystrom_rule_1d(region.lower(), region.upper(), kF, K.potential(), p);
    const Eigen::Index n = Eigen::Index(rule.size());
    if (std::size_t(n) > kMaxNystromBlock) throw ConfigError("Nystrom matrix too large; lower the node density");
    std::vector<double> sw(n);
    for (Eigen::Index i = 0; i < n; ++i) sw[i] = std::sqrt(rule.weights[i]);
    std::vector<double> vals;
    std::size_t zeros = 0;
    if (K.provenance() == KernelKind::Free) {
      Matrix A(n, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i)
          A(i, j) = A(j, i) = sw[i] * sw[j] * sinc_kernel(kF, rule.nodes[i] - rule.nodes[j]);
      const Vector ev = symmetric_eigenvalues(std::move(A));
      vals.assign(ev.data(), ev.data() + ev.size());
    } else {
      Matrix B = K.factor(rule.nodes);
      for (Eigen::Index i = 0; i < n; ++i) B.row(i) *= sw[i];
      vals = detail::eig_of_gram_or_outer(B);
      if (B.cols() < n) zeros = std::size_t(n - B.cols());
    }
    return make_spectrum(std::move(vals), zeros, region.scale(), engine, nystrom_tag(p), region);
  }

  if (K.provenance() != KernelKind::Free) throw ConfigError("d = 2 Nystrom supports the free kernel only");

  if (region.shape() == Shape::Square) {
    // four parity sectors on the quadrant [0, w]^2
    const double w = region.half_width();
    const double width = p.panel_order * (2.0 * std::numbers::pi / kF) / p.nodes_per_wavelength;
    const auto r1 = composite_rule(panel_edges(0.0, w, {}, width), p.panel_order);
    const Eigen::Index m = Eigen::Index(r1.size());
    const Eigen::Index nq = m * m;
    if (std::size_t(nq) > kMaxNystromBlock) throw ConfigError("2D Nystrom sector too large; lower the node density");
    std::vector<double> xs(nq), ys(nq), sw(nq);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < m; ++i) {
        xs[i + m * j] = r1.nodes[i];
        ys[i + m * j] = r1.nodes[j];
        sw[i + m * j] = std::sqrt(r1.weights[i] * r1.weights[j]);
      }
    std::array<Matrix, 4> sector;
    for (auto& s : sector) s = Matrix::Zero(nq, nq);
    const int sx[4] = {1, -1, 1, -1}, sy[4] = {1, 1, -1, -1};
    // sector (a, b): sum over reflections sigma of a^{[sx<0]} b^{[sy<0]} K(p, sigma q)
    const int sa[4] = {1, 1, -1, -1}, sb[4] = {1, -1, 1, -1};
    for (int r = 0; r < 4; ++r) {
      for (Eigen::Index q = 0; q < nq; ++q)
        for (Eigen::Index pi = q; pi < nq; ++pi) {
          const double kv = sw[pi] * sw[q] * bessel_kernel(kF, std::hypot(xs[pi] - sx[r] * xs[q], ys[pi] - sy[r] * ys[q]));
          for (int s = 0; s < 4; ++s) {
            const double sign = (sx[r] < 0 ? sa[s] : 1) * (sy[r] < 0 ? sb[s] : 1);
            sector[s](pi, q) += sign * kv;
          }
        }
    }
    std::vector<double> vals;
    vals.reserve(4 * nq);
    for (auto& s : sector) {
      s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
      const Vector ev = symmetric_eigenvalues(std::move(s));
      vals.insert(vals.end(), ev.data(), ev.data() + ev.size());
    }
    return make_spectrum(std::move(vals), 0, region.scale(), engine, nystrom_tag(p), region);
  }

  // disk: Gauss-Legendre in r (weight r dr) times the trapezoidal rule in angle
  const double R = region.radius();
  const double width = p.panel_order * (2.0 * std::numbers::pi / kF) / p.nodes_per_wavelength;
  const auto rr = composite_rule(panel_edges(0.0, R, {}, width), p.panel_order);
  const int nth = std::max(16, int(std::ceil(p.nodes_per_wavelength * kF * R)));
  const Eigen::Index n = Eigen::Index(rr.size()) * nth;
  if (std::size_t(n) > kMaxNystromBlock) throw ConfigError("2D Nystrom disk too large; lower the node density");
  std::vector<double> xs(n), ys(n), sw(n);
  for (std::size_t i = 0; i < rr.size(); ++i)
    for (int t = 0; t < nth; ++t) {
      const double th = 2.0 * std::numbers::pi * t / nth;
      const Eigen::Index k = Eigen::Index(i) * nth + t;
      xs[k] = rr.nodes[i] * std::cos(th);
      ys[k] = rr.nodes[i] * std::sin(th);
      sw[k] = std::sqrt(rr.weights[i] * rr.nodes[i] * 2.0 * std::numbers::pi / nth);
    }
  Matrix A(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i)
      A(i, j) = A(j, i) = sw[i] * sw[j] * bessel_kernel(kF, std::hypot(xs[i] - xs[j], ys[i] - ys[j]));
  const Vector ev = symmetric_eigenvalues(std::move(A));
  return make_spectrum({ev.data(), ev.data() + ev.size()}, 0, region.scale(), engine, nystrom_tag(p), region);
}

} // namespace szego

#endif // SZEGO_CONTINUUM_HPP
