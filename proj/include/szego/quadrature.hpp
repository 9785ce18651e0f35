#ifndef SZEGO_QUADRATURE_HPP
#define SZEGO_QUADRATURE_HPP

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "szego/error.hpp"

namespace szego {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Newton iteration on P_n from the Chebyshev-like initial guesses; nodes
// ascending on [-1, 1].
inline QuadratureRule compute_gauss_legendre(int n) {
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // one more derivative evaluation at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

} // namespace detail

// Cached n-point Gauss-Legendre rule on [-1, 1].
inline const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre order must be >= 1");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

// Composite rule: `order`-point Gauss-Legendre on each [edges[i], edges[i+1]].
inline QuadratureRule composite_rule(const std::vector<double>& edges, int order) {
  const auto& g = gauss_legendre(order);
  QuadratureRule r;
  r.nodes.reserve((edges.size() - 1) * order);
  r.weights.reserve((edges.size() - 1) * order);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    const double half = 0.5 * (edges[i + 1] - edges[i]);
    for (int k = 0; k < order; ++k) {
      r.nodes.push_back(mid + half * g.nodes[k]);
      r.weights.push_back(half * g.weights[k]);
    }
  }
  return r;
}

// Panel edges on [a, b] with the given interior breakpoints kept as edges and
// every panel no wider than max_width (uniform subdivision per segment).
inline std::vector<double> panel_edges(double a, double b, std::vector<double> breaks, double max_width) {
  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::vector<double> edges{a};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len <= 0.0) continue;
    const int n = std::max(1, static_cast<int>(std::ceil(len / max_width - 1e-12)));
    for (int k = 1; k < n; ++k) edges.push_back(cuts[i] + len * k / n);
    edges.push_back(cuts[i + 1]);
  }
  return edges;
}

} // namespace szego

#endif // SZEGO_QUADRATURE_HPP
