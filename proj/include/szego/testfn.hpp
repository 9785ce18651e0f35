#ifndef SZEGO_TESTFN_HPP
#define SZEGO_TESTFN_HPP

// Test functions h : [0,1] -> R for trace functionals tr h(P_L): Renyi
// entropy functions, the polynomial basis s_n / a_n, the identity, and a
// numerical membership check for the admissible classes H_d and H_{d,0}.

#include <cmath>
#include <charconv>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "szego/error.hpp"

namespace szego {

enum class LogBase { Nats, Bits };

struct TestFunction {
  std::string label;
  std::function<double(double)> eval;
  // Declared Hoelder exponent at both endpoints (h(l) = O(l^alpha),
  // h(1) - h(1-l) = O(l^alpha)); log_factor marks an extra |ln l| factor.
  std::optional<double> holder;
  bool log_factor = false;
  bool symmetric = false;
  double value_at_one = 0.0;
  std::optional<LogBase> log_base;

  double operator()(double lambda) const { return eval(lambda); }
};

////////////////////////////////////////////////////////////////////////////////

// Renyi entropy function h_alpha, with 0 log 0 := 0 at the endpoints.
inline TestFunction renyi(double alpha, LogBase base) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("Renyi index must be positive, got " + std::to_string(alpha));
  const double scale = base == LogBase::Bits ? 1.0 / std::numbers::ln2 : 1.0;

  // evaluate on the lower half only so the symmetry is exact
  auto half = [alpha](double x) -> double {
    if (x <= 0.0) return 0.0;
    if (alpha == 1.0) return -x * std::log(x) - (1.0 - x) * std::log1p(-x);
    // log(x^a + (1-x)^a) = a log(1-x) + log1p((x/(1-x))^a)
    const double t = std::pow(x / (1.0 - x), alpha);
    return (alpha * std::log1p(-x) + std::log1p(t)) / (1.0 - alpha);
  };

  TestFunction h;
  char buf[64];
  std::snprintf(buf, sizeof buf, "renyi:%g:%s", alpha, base == LogBase::Bits ? "bits" : "nats");
  h.label = buf;
  h.eval = [half, scale](double l) {
    if (l <= 0.0 || l >= 1.0) return 0.0;
    const double x = l <= 0.5 ? l : 1.0 - l;
    return scale * half(x);
  };
  h.holder = std::min(alpha, 1.0);
  h.log_factor = alpha == 1.0;
  h.symmetric = true;
  h.value_at_one = 0.0;
  h.log_base = base;
  return h;
}

enum class PolyKind { Symmetric, Antisymmetric };

// s_n(l) = [l(1-l)]^n and a_n(l) = l s_n(l)
inline TestFunction poly_basis(int n, PolyKind kind) {
  if (n < 1) throw ConfigError("polynomial basis index must be >= 1 (s_0 = 1 violates h(0) = 0)");
  TestFunction h;
  const bool sym = kind == PolyKind::Symmetric;
  h.label = (sym ? "s:" : "a:") + std::to_string(n);
  h.eval = [n, sym](double l) {
    const double s = std::pow(l * (1.0 - l), n);
    return sym ? s : l * s;
  };
  h.holder = static_cast<double>(n);
  h.symmetric = sym;
  h.value_at_one = 0.0;
  return h;
}

inline TestFunction identity_function() {
  TestFunction h;
  h.label = "id";
  h.eval = [](double l) { return l; };
  h.holder = 1.0;
  h.value_at_one = 1.0;
  return h;
}

// h - h(1) id, which vanishes at both endpoints
inline TestFunction shift_to_vanishing(const TestFunction& h) {
  const double h1 = h.value_at_one;
  if (h1 == 0.0) return h;
  TestFunction g;
  g.label = h.label + "-shifted";
  g.eval = [f = h.eval, h1](double l) { return f(l) - h1 * l; };
  if (h.holder) g.holder = std::min(*h.holder, 1.0);
  g.log_factor = h.log_factor;
  g.symmetric = false;
  g.value_at_one = 0.0;
  g.log_base = h.log_base;
  return g;
}

// Names: "renyi:<alpha>:bits|nats", "s:<n>", "a:<n>", "id".
inline TestFunction parse_test_function(std::string_view name) {
  auto fail = [&] { return ConfigError("unknown test function '" + std::string(name) + "'"); };
  auto parse_double = [&](std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw fail();
    return v;
  };
  if (name == "id") return identity_function();
  const auto c1 = name.find(':');
  if (c1 == std::string_view::npos) throw fail();
  const auto head = name.substr(0, c1);
  const auto rest = name.substr(c1 + 1);
  if (head == "s" || head == "a") {
    const double n = parse_double(rest);
    if (n != std::floor(n)) throw fail();
    return poly_basis(static_cast<int>(n), head == "s" ? PolyKind::Symmetric : PolyKind::Antisymmetric);
  }
  if (head == "renyi") {
    const auto c2 = rest.find(':');
    if (c2 == std::string_view::npos) throw fail();
    const double alpha = parse_double(rest.substr(0, c2));
    const auto base = rest.substr(c2 + 1);
    if (base != "bits" && base != "nats") throw fail();
    auto h = renyi(alpha, base == "bits" ? LogBase::Bits : LogBase::Nats);
    h.label = std::string(name);
    return h;
  }
  throw fail();
}

////////////////////////////////////////////////////////////////////////////////
//
// membership in H_d / H_{d,0}
//
////////////////////////////////////////////////////////////////////////////////

struct MembershipReport {
  bool in_H_d = false;
  bool in_H_d0 = false;
  // least-squares exponent beta and log power gamma of
  //   ln|tail(l)| ~ c + beta ln l + gamma ln ln(1/l)
  // (worse of the two endpoint tails)
  double estimated_alpha = 0.0;
  double estimated_log_power = 0.0;
  // estimate far enough from the threshold to decide on its own
  bool conclusive = true;
  // declared metadata agrees with the estimate (true when nothing declared)
  bool declared_consistent = true;
  bool symmetric = false;
  std::optional<std::string> failure;
};

inline constexpr double kExponentTolerance = 0.05;

namespace detail {

struct TailFit {
  double beta = std::numeric_limits<double>::infinity();
  double gamma = 0.0;
};

// Fit over l = 2^-5 ... 2^-30; identically zero tails have infinite exponent.
inline std::optional<TailFit> fit_tail(const std::function<double(double)>& tail) {
  std::vector<double> ys, ls;
  for (int j = 5; j <= 30; ++j) {
    const double l = std::ldexp(1.0, -j);
    const double v = tail(l);
    if (!std::isfinite(v)) return std::nullopt;
    if (v != 0.0) {
      ls.push_back(l);
      ys.push_back(std::log(std::abs(v)));
    }
  }
  TailFit fit;
  if (ys.size() < 6) return fit;
  Eigen::MatrixXd A(ys.size(), 3);
  Eigen::VectorXd y(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = std::log(ls[i]);
    A(i, 2) = std::log(-std::log(ls[i]));
    y(i) = ys[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  fit.beta = c(1);
  fit.gamma = c(2);
  return fit;
}

} // namespace detail

inline MembershipReport check_membership(const TestFunction& h, int d) {
  if (d < 1) throw ConfigError("dimension must be >= 1");
  MembershipReport rep;

  const double h0 = h(0.0);
  const double h1 = h(1.0);
  if (!std::isfinite(h0) || !std::isfinite(h1)) {
    rep.failure = "evaluator returned a non-finite endpoint value";
    return rep;
  }

  auto lower = detail::fit_tail([&](double l) { return h(l); });
  auto upper = detail::fit_tail([&](double l) { return h1 - h(1.0 - l); });
  if (!lower || !upper) {
    rep.failure = "evaluator returned non-finite values near an endpoint";
    return rep;
  }
  const auto& worst = lower->beta <= upper->beta ? *lower : *upper;
  rep.estimated_alpha = worst.beta;
  rep.estimated_log_power = std::isfinite(worst.beta) ? worst.gamma : 0.0;

  double max_dev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double l = i / 1000.0;
    const double dev = std::abs(h(l) - h(1.0 - l));
    if (!std::isfinite(dev)) {
      rep.failure = "evaluator returned non-finite values on [0,1]";
      return rep;
    }
    max_dev = std::max(max_dev, dev);
  }
  rep.symmetric = max_dev <= 1e-12;

  const bool vanishes_at_zero = std::abs(h0) <= 1e-12;
  const double tol = kExponentTolerance;
  const bool est_log = rep.estimated_log_power > 0.5;

  // decision from an exponent/log pair
  auto decide = [d](double beta, bool logf) {
    if (d >= 2) return beta > 1.0 / d;
    return beta > 1.0 || (beta == 1.0 && !logf);
  };

  bool member = false;
  if (h.holder) {
    member = decide(*h.holder, h.log_factor);
    if (std::isfinite(rep.estimated_alpha)) {
      // the true exponent may exceed the declared one, never fall short of it
      rep.declared_consistent = rep.estimated_alpha >= *h.holder - tol;
      if (*h.holder == 1.0 && std::abs(rep.estimated_alpha - 1.0) < tol)
        rep.declared_consistent = rep.declared_consistent && est_log == h.log_factor;
    }
  } else {
    const double threshold = d >= 2 ? 1.0 / d : 1.0;
    const double beta = rep.estimated_alpha;
    if (beta >= threshold + tol) {
      member = true;
    } else if (beta <= threshold - tol) {
      member = false;
    } else if (d == 1) {
      // beta ~ 1: decided by the log power (l vs l ln l)
      member = !est_log;
      rep.conclusive = std::abs(rep.estimated_log_power - 0.5) > 0.25;
    } else {
      member = beta > threshold;
      rep.conclusive = false;
    }
  }

  rep.in_H_d = vanishes_at_zero && member && (d >= 2 || rep.symmetric);
  rep.in_H_d0 = rep.in_H_d && std::abs(h1) <= 1e-12;
  return rep;
}

} // namespace szego

#endif // SZEGO_TESTFN_HPP
