#ifndef SZEGO_WIDOM_HPP
#define SZEGO_WIDOM_HPP

// Coefficients of the two-term expansion
//   tr h(P_L) ~ N0(E) h(1) |Lambda| L^d + Sigma0(E) I(h) |dLambda| L^{d-1} ln L.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "szego/error.hpp"
#include "szego/model.hpp"
#include "szego/testfn.hpp"

namespace szego {

// as_printed: 1/Gamma((d+1)/2) (E/4pi)^{d/2}; weyl: 1/Gamma(d/2+1) (E/4pi)^{d/2}.
// Weyl is the default; the lattice counting oracle (ids_estimate) selects it.
enum class N0Convention { AsPrinted, Weyl };

inline constexpr N0Convention kDefaultN0Convention = N0Convention::Weyl;

inline const char* to_string(N0Convention c) {
  return c == N0Convention::AsPrinted ? "as_printed" : "weyl";
}

inline N0Convention parse_n0_convention(const std::string& s) {
  if (s == "as_printed") return N0Convention::AsPrinted;
  if (s == "weyl") return N0Convention::Weyl;
  throw ConfigError("unknown N0 convention '" + s + "' (expected as_printed or weyl)");
}

inline double n0(double E, int d, N0Convention conv = kDefaultN0Convention) {
  if (!(E >= 0.0) || !std::isfinite(E)) throw ConfigError("n0 needs E >= 0");
  if (d < 1) throw ConfigError("dimension must be >= 1");
  if (E == 0.0) return 0.0;
  const double g = conv == N0Convention::AsPrinted ? std::tgamma((d + 1) / 2.0) : std::tgamma(d / 2.0 + 1.0);
  return std::pow(E / (4.0 * std::numbers::pi), d / 2.0) / g;
}

inline double sigma0(double E, int d) {
  if (!(E > 0.0) || !std::isfinite(E)) throw ConfigError("sigma0 needs E > 0");
  if (d < 1) throw ConfigError("dimension must be >= 1");
  return 2.0 / std::tgamma((d + 1) / 2.0) * std::pow(E / (4.0 * std::numbers::pi), (d - 1) / 2.0);
}

// Raised when adaptive refinement of I(h) stalls; carries the best estimate.
class QuadratureError : public NumericalError {
public:
  QuadratureError(const std::string& what, double partial, double error_estimate)
      : NumericalError(what), partial(partial), error_estimate(error_estimate) {}
  double partial;
  double error_estimate;
};

inline constexpr double kWidomTolerance = 1e-10;

namespace detail {

struct PieceSum {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

// int_0^b f(t) dt for f with an integrable power singularity at 0: adaptive
// Gauss-Kronrod on dyadic pieces [b 2^{-k-1}, b 2^{-k}], stopping once the
// geometric tail estimate drops below tol.
template <class F>
PieceSum integrate_to_zero(F&& f, double b, double tol) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  PieceSum s;
  double prev = 0.0;
  double hi = b;
  for (int k = 0; k < 400; ++k) {
    const double lo = 0.5 * hi;
    double e = 0.0;
    // mapped to [0, 1]: boost's error estimate carries a floor that does not
    // shrink with the interval width
    const double w = hi - lo;
    const double v = GK::integrate([&](double s) { return w * f(lo + w * s); }, 0.0, 1.0, 10, 1e-11, &e);
    s.value += v;
    s.error += e;
    hi = lo;
    if (!std::isfinite(v)) return s;
    if (k >= 2) {
      const double r = prev != 0.0 ? std::abs(v / prev) : 0.0;
      const double tail = r < 0.95 ? std::abs(v) * r / (1.0 - r) : std::numeric_limits<double>::infinity();
      if (tail < 1e-4 * tol) {
        s.error += tail;
        s.converged = true;
        return s;
      }
    }
    prev = v;
  }
  return s;
}

} // namespace detail

// I(h) = (1/4pi^2) int_0^1 (h(l) - l h(1)) / (l(1-l)) dl
//
// Split at 1/2 and substitute l = t^2 (resp. 1-l = t^2): an O(l^a) numerator
// becomes an O(t^{2a-1}) integrand, integrable for every a > 0.
inline double widom_functional(const TestFunction& h, double tol = kWidomTolerance) {
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  const double h1 = h.value_at_one;
  const double t_half = std::sqrt(0.5);

  auto lower = [&](double t) {
    const double l = t * t;
    return 2.0 * (h(l) - l * h1) / (t * (1.0 - l));
  };
  // For symmetric h evaluate h(t^2) instead of h(1 - t^2) to avoid
  // cancellation in 1 - t^2 near the upper endpoint.
  auto upper = [&](double t) {
    const double u = t * t;
    const double l = 1.0 - u;
    const double hv = h.symmetric ? h(u) : h(l);
    return 2.0 * (hv - l * h1) / (t * l);
  };

  const double scale = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  double value = 0.0, err = 0.0;
  bool converged = true;
  for (const auto& piece : {detail::integrate_to_zero(lower, t_half, 0.05 * tol / scale),
                             detail::integrate_to_zero(upper, t_half, 0.05 * tol / scale)}) {
    value += scale * piece.value;
    err += scale * piece.error;
    converged = converged && piece.converged;
  }
  if (!std::isfinite(value) || !converged || !(err <= tol))
    throw QuadratureError("Widom functional did not converge for '" + h.label + "': estimate " +
                              detail::fmt17(value) + ", error " + detail::fmt17(err),
                          value, err);
  return value;
}

struct AsymptoticPrediction {
  double a_pred = 0.0; // coefficient of L^d
  double b_pred = 0.0; // coefficient of L^{d-1} ln L
  double energy = 0.0;
  int dimension = 1;
  std::string label;
  N0Convention convention = kDefaultN0Convention;
};

inline AsymptoticPrediction predict_trace(const TestFunction& h, double E, const Domain& domain,
                                          N0Convention conv = kDefaultN0Convention) {
  const int d = domain.dimension();
  AsymptoticPrediction p;
  p.energy = E;
  p.dimension = d;
  p.label = h.label;
  p.convention = conv;
  const double s0 = sigma0(E, d);
  p.a_pred = h.value_at_one == 0.0 ? 0.0 : n0(E, d, conv) * h.value_at_one * domain.volume();
  p.b_pred = s0 * widom_functional(h) * domain.surface();
  return p;
}

// Coefficient of L^{d-1} ln L for the Renyi entropy of index alpha.
inline double entropy_slope(double alpha, double E, const Domain& domain, LogBase base) {
  const int d = domain.dimension();
  if (!(d > 1.0 / alpha))
    throw ConfigError("entropy slope undefined: h_alpha belongs to H_d if and only if d > 1/alpha "
                      "(alpha = " + detail::fmt17(alpha) + ", d = " + std::to_string(d) + ")");
  return sigma0(E, d) * widom_functional(renyi(alpha, base)) * domain.surface();
}

} // namespace szego

#endif // SZEGO_WIDOM_HPP
