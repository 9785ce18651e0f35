#ifndef SZEGO_MODEL_HPP
#define SZEGO_MODEL_HPP

// Geometry and potentials: bounded domains containing the origin, their
// scaled copies L*Lambda, and compactly supported bounded potentials.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "szego/error.hpp"

namespace szego {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double norm_inf(const Point& p, int dim) {
  return dim == 1 ? std::abs(p.x) : std::max(std::abs(p.x), std::abs(p.y));
}

inline double norm_2(const Point& p, int dim) {
  return dim == 1 ? std::abs(p.x) : std::hypot(p.x, p.y);
}

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// shortest text that parses back to the same double
inline std::string fmt_short(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
} // namespace detail

////////////////////////////////////////////////////////////////////////////////
//
// Domain
//
////////////////////////////////////////////////////////////////////////////////

enum class Shape { Interval, Square, Disk };

class Domain {
public:
  static Domain interval(double a, double b) {
    if (!(std::isfinite(a) && std::isfinite(b)))
      throw ConfigError("interval endpoints must be finite");
    if (!(a < 0.0 && 0.0 < b))
      throw ConfigError("interval [" + detail::fmt17(a) + ", " + detail::fmt17(b) +
                        "] must contain 0 in its interior (a < 0 < b)");
    Domain d;
    d.shape_ = Shape::Interval;
    d.dim_ = 1;
    d.lo_ = a;
    d.hi_ = b;
    return d;
  }

  static Domain square(double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw ConfigError("square half-width must be positive and finite");
    Domain d;
    d.shape_ = Shape::Square;
    d.dim_ = 2;
    d.lo_ = -half_width;
    d.hi_ = half_width;
    return d;
  }

  static Domain disk(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw ConfigError("disk radius must be positive and finite");
    Domain d;
    d.shape_ = Shape::Disk;
    d.dim_ = 2;
    d.lo_ = -radius;
    d.hi_ = radius;
    return d;
  }

  Shape shape() const { return shape_; }
  int dimension() const { return dim_; }
  double scale() const { return scale_; }

  // interval: [lower, upper]; square: [-w, w] per axis; disk: [-r, r]
  double lower() const { return scale_ * lo_; }
  double upper() const { return scale_ * hi_; }
  double half_width() const { return scale_ * hi_; }
  double radius() const { return scale_ * hi_; }

  double volume() const {
    switch (shape_) {
    case Shape::Interval: return upper() - lower();
    case Shape::Square: return 4.0 * half_width() * half_width();
    case Shape::Disk: return std::numbers::pi * radius() * radius();
    }
    return 0.0;
  }

  // counting measure (two endpoints) in d = 1
  double surface() const {
    switch (shape_) {
    case Shape::Interval: return 2.0;
    case Shape::Square: return 8.0 * half_width();
    case Shape::Disk: return 2.0 * std::numbers::pi * radius();
    }
    return 0.0;
  }

  // max |x|_inf over the closure
  double extent() const { return std::max(-lower(), upper()); }

  bool contains(const Point& p, double slack = 1e-12) const {
    switch (shape_) {
    case Shape::Interval: return p.x >= lower() - slack && p.x <= upper() + slack;
    case Shape::Square: return norm_inf(p, 2) <= half_width() + slack;
    case Shape::Disk: return std::hypot(p.x, p.y) <= radius() + slack;
    }
    return false;
  }

  Domain scaled(double L) const {
    Domain d = *this;
    d.scale_ = scale_ * L;
    return d;
  }

  std::string describe() const {
    switch (shape_) {
    case Shape::Interval:
      return "interval " + detail::fmt17(lower()) + " " + detail::fmt17(upper());
    case Shape::Square: return "square " + detail::fmt17(half_width());
    case Shape::Disk: return "disk " + detail::fmt17(radius());
    }
    return {};
  }

private:
  Domain() = default;

  Shape shape_ = Shape::Interval;
  int dim_ = 1;
  double lo_ = -1.0;
  double hi_ = 1.0;
  double scale_ = 1.0;
};

// kind in {"interval", "square", "disk"}
inline Domain make_domain(std::string_view kind, const std::vector<double>& params) {
  auto need = [&](std::size_t n) {
    if (params.size() != n)
      throw ConfigError("domain '" + std::string(kind) + "' expects " + std::to_string(n) +
                        " parameter(s), got " + std::to_string(params.size()));
  };
  if (kind == "interval") {
    need(2);
    return Domain::interval(params[0], params[1]);
  }
  if (kind == "square") {
    need(1);
    return Domain::square(params[0]);
  }
  if (kind == "disk") {
    need(1);
    return Domain::disk(params[0]);
  }
  throw ConfigError("unknown domain kind '" + std::string(kind) + "'");
}

// Sweeps only ever grow the region, so L < 1 is rejected.
inline Domain scale_domain(const Domain& domain, double L) {
  if (!(L >= 1.0) || !std::isfinite(L))
    throw ConfigError("scale factor must satisfy L >= 1, got " + detail::fmt17(L));
  return domain.scaled(L);
}

////////////////////////////////////////////////////////////////////////////////
//
// Potential
//
////////////////////////////////////////////////////////////////////////////////

enum class PotentialKind { Zero, SquareWell, Bump, Wells };

// Square well centred at `center` with |x - center|_inf <= half_width.
struct Well {
  Point center;
  double height = 0.0;
  double half_width = 0.0;
};

class Potential {
public:
  static Potential zero(int dim) {
    check_dim(dim);
    Potential p;
    p.dim_ = dim;
    return p;
  }

  // v0 < 0 is a well, v0 > 0 a barrier
  static Potential square_well(int dim, double v0, double half_width) {
    check_dim(dim);
    check_finite(v0, half_width);
    Potential p;
    p.dim_ = dim;
    p.kind_ = PotentialKind::SquareWell;
    p.wells_.push_back({Point{}, v0, half_width});
    return p;
  }

  // v0 * exp(1 - 1/(1 - (|x|/a)^2)) inside |x| < a
  static Potential bump(int dim, double v0, double radius) {
    check_dim(dim);
    check_finite(v0, radius);
    Potential p;
    p.dim_ = dim;
    p.kind_ = PotentialKind::Bump;
    p.wells_.push_back({Point{}, v0, radius});
    return p;
  }

  static Potential wells(int dim, std::vector<Well> ws) {
    check_dim(dim);
    if (ws.empty()) throw ConfigError("a sum of wells needs at least one well");
    for (const auto& w : ws) {
      check_finite(w.height, w.half_width);
      if (!std::isfinite(w.center.x) || !std::isfinite(w.center.y))
        throw ConfigError("well centres must be finite");
      if (dim == 1 && w.center.y != 0.0) throw ConfigError("1D well with a y-offset");
    }
    Potential p;
    p.dim_ = dim;
    p.kind_ = PotentialKind::Wells;
    p.wells_ = std::move(ws);
    return p;
  }

  int dimension() const { return dim_; }
  PotentialKind kind() const { return kind_; }
  bool is_zero() const { return kind_ == PotentialKind::Zero; }
  const std::vector<Well>& components() const { return wells_; }

  double operator()(const Point& p) const {
    switch (kind_) {
    case PotentialKind::Zero: return 0.0;
    case PotentialKind::SquareWell:
      return norm_inf(p, dim_) <= wells_[0].half_width ? wells_[0].height : 0.0;
    case PotentialKind::Bump: {
      const double r = norm_2(p, dim_) / wells_[0].half_width;
      if (r >= 1.0) return 0.0;
      return wells_[0].height * std::exp(1.0 - 1.0 / (1.0 - r * r));
    }
    case PotentialKind::Wells: {
      double v = 0.0;
      for (const auto& w : wells_) {
        const Point q{p.x - w.center.x, p.y - w.center.y};
        if (norm_inf(q, dim_) <= w.half_width) v += w.height;
      }
      return v;
    }
    }
    return 0.0;
  }

  double operator()(double x) const { return (*this)(Point{x, 0.0}); }

  // V vanishes for |x|_inf > support_radius()
  double support_radius() const {
    double r = 0.0;
    for (const auto& w : wells_)
      r = std::max(r, norm_inf(w.center, dim_) + w.half_width);
    return r;
  }

  double sup_norm() const {
    double s = 0.0;
    for (const auto& w : wells_) s += std::abs(w.height);
    return s;
  }

  // lower bound on inf V (0 when V >= 0)
  double lower_bound() const {
    double s = 0.0;
    for (const auto& w : wells_) s += std::min(0.0, w.height);
    return s;
  }

  // Points (d = 1) where V or its derivatives jump; includes the support edges.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (const auto& w : wells_) {
      b.push_back(w.center.x - w.half_width);
      b.push_back(w.center.x + w.half_width);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  std::string describe() const {
    switch (kind_) {
    case PotentialKind::Zero: return "zero";
    case PotentialKind::SquareWell:
      return "square " + detail::fmt17(wells_[0].height) + " " + detail::fmt17(wells_[0].half_width);
    case PotentialKind::Bump:
      return "bump " + detail::fmt17(wells_[0].height) + " " + detail::fmt17(wells_[0].half_width);
    case PotentialKind::Wells: {
      std::string s = "wells";
      for (const auto& w : wells_) {
        s += " " + detail::fmt17(w.center.x);
        if (dim_ == 2) s += ":" + detail::fmt17(w.center.y);
        s += ":" + detail::fmt17(w.height) + ":" + detail::fmt17(w.half_width);
      }
      return s;
    }
    }
    return {};
  }

private:
  Potential() = default;

  static void check_dim(int dim) {
    if (dim != 1 && dim != 2) throw ConfigError("potentials are supported in d = 1 and d = 2 only");
  }
  static void check_finite(double v0, double a) {
    if (!std::isfinite(v0)) throw ConfigError("potential height must be finite (bounded V)");
    if (!(a > 0.0) || !std::isfinite(a))
      throw ConfigError("potential support radius must be positive and finite (compact support)");
  }

  int dim_ = 1;
  PotentialKind kind_ = PotentialKind::Zero;
  std::vector<Well> wells_;
};

// kind in {"zero", "square", "bump", "wells"}; wells take (center, v0, a)
// triples in d = 1 and (cx, cy, v0, a) quadruples in d = 2.
inline Potential make_potential(std::string_view kind, int dim, const std::vector<double>& params) {
  if (kind == "zero") {
    if (!params.empty()) throw ConfigError("zero potential takes no parameters");
    return Potential::zero(dim);
  }
  if (kind == "square" || kind == "bump") {
    if (params.size() != 2)
      throw ConfigError("potential '" + std::string(kind) + "' expects (v0, radius)");
    return kind == "square" ? Potential::square_well(dim, params[0], params[1])
                            : Potential::bump(dim, params[0], params[1]);
  }
  if (kind == "wells") {
    const std::size_t stride = dim == 1 ? 3 : 4;
    if (params.empty() || params.size() % stride != 0)
      throw ConfigError("wells expect groups of " + std::to_string(stride) + " numbers");
    std::vector<Well> ws;
    for (std::size_t i = 0; i < params.size(); i += stride) {
      Well w;
      w.center.x = params[i];
      if (dim == 2) w.center.y = params[i + 1];
      w.height = params[i + stride - 2];
      w.half_width = params[i + stride - 1];
      ws.push_back(w);
    }
    return Potential::wells(dim, std::move(ws));
  }
  throw ConfigError("unknown potential kind '" + std::string(kind) + "'");
}

////////////////////////////////////////////////////////////////////////////////
//
// ModelConfig
//
////////////////////////////////////////////////////////////////////////////////

enum class Engine { Lattice, ContinuumKernel };

struct LatticeParams {
  double spacing = 0.05;
  // fixed box; when unset the margin rule below is applied per L
  std::optional<double> box_half_width;
  double box_scale = 6.0;
  std::size_t max_sites = 60000;
};

struct ContinuumParams {
  double nodes_per_wavelength = 10.0;
  int panel_order = 16;
  int k_panel_order = 64;
  double k_oversampling = 1.5;
};

inline constexpr double kDispersionGuard = 0.15;

struct ModelConfig {
  double energy = 1.0;
  Domain domain = Domain::interval(-1.0, 1.0);
  Potential potential = Potential::zero(1);
  Engine engine = Engine::ContinuumKernel;
  LatticeParams lattice;
  ContinuumParams continuum;

  int dimension() const { return domain.dimension(); }
  double fermi_wavenumber() const { return std::sqrt(energy); }

  void validate() const {
    if (!(energy > 0.0) || !std::isfinite(energy))
      throw ConfigError("Fermi energy must be positive, got " + detail::fmt17(energy));
    if (potential.dimension() != domain.dimension())
      throw ConfigError("potential and domain dimensions differ");
    if (engine == Engine::Lattice) {
      if (!(lattice.spacing > 0.0)) throw ConfigError("lattice spacing must be positive");
      if (std::sqrt(energy) * lattice.spacing > kDispersionGuard + 1e-12)
        throw ConfigError("lattice dispersion guard violated: sqrt(E)*h = " +
                          detail::fmt17(std::sqrt(energy) * lattice.spacing) + " > 0.15");
      if (!(lattice.box_scale >= 1.0)) throw ConfigError("lattice.box_scale must be >= 1");
    } else {
      if (continuum.nodes_per_wavelength < 6.0)
        throw ConfigError("Nystrom needs at least 6 nodes per Fermi wavelength");
      if (continuum.panel_order < 2 || continuum.k_panel_order < 2)
        throw ConfigError("quadrature panel orders must be >= 2");
      if (domain.dimension() == 2 && !potential.is_zero())
        throw ConfigError("the continuum engine supports V != 0 only in d = 1; use the lattice engine");
    }
  }

  // Minimum distance between Lambda_L and the Dirichlet walls.
  double box_margin() const {
    return std::max({8.0 / std::sqrt(energy), 2.0 * potential.support_radius(), 5.0});
  }

  // Half-width of the auxiliary Dirichlet box used at scale L.
  double box_half_width(double L) const {
    if (lattice.box_half_width) return *lattice.box_half_width;
    return lattice.box_scale * L * domain.extent() + box_margin();
  }
};

} // namespace szego

#endif // SZEGO_MODEL_HPP
