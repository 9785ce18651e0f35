#ifndef SZEGO_LATTICE_HPP
#define SZEGO_LATTICE_HPP

// Finite-difference -Laplacian + V on a Dirichlet box [-R, R]^d, its Fermi
// projection, and spectra of the projection truncated to a region.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "szego/cache.hpp"
#include "szego/error.hpp"
#include "szego/linalg.hpp"
#include "szego/model.hpp"
#include "szego/spectrum.hpp"

namespace szego {

// Dense eigensolves in d = 2 beyond this size take minutes and gigabytes.
inline constexpr std::size_t kMaxDenseSites = 8000;

class LatticeOperator {
public:
  LatticeOperator(int dim, double spacing, double box_half_width, Potential potential, std::size_t max_sites)
      : dim_(dim), h_(spacing), potential_(std::move(potential)) {
    if (dim != 1 && dim != 2) throw ConfigError("lattice supports d = 1 and d = 2");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("lattice spacing must be positive");
    if (!(box_half_width > spacing)) throw ConfigError("lattice box must be wider than one spacing");
    if (potential_.dimension() != dim) throw ConfigError("potential dimension differs from lattice dimension");
    intervals_ = static_cast<long>(std::ceil(2.0 * box_half_width / spacing - 1e-9));
    n_axis_ = intervals_ - 1;
    const double sites = dim == 1 ? double(n_axis_) : double(n_axis_) * double(n_axis_);
    if (sites > double(max_sites))
      throw ConfigError("lattice would have " + std::to_string(static_cast<long long>(sites)) +
                        " sites (cap " + std::to_string(max_sites) +
                        "); shrink the box half-width R or raise the spacing h");
    v_.resize(size());
    // average over the neighbouring quadrants: a site sitting exactly on a
    // jump of V gets the mean of the one-sided values
    const double eps = 1e-9 * spacing;
    for (std::size_t k = 0; k < size(); ++k) {
      const Point p = site(k);
      if (dim == 1) {
        v_[k] = 0.5 * (potential_(p.x - eps) + potential_(p.x + eps));
      } else {
        v_[k] = 0.25 * (potential_(Point{p.x - eps, p.y - eps}) + potential_(Point{p.x + eps, p.y - eps}) +
                        potential_(Point{p.x - eps, p.y + eps}) + potential_(Point{p.x + eps, p.y + eps}));
      }
    }
  }

  int dimension() const { return dim_; }
  double spacing() const { return h_; }
  // effective half-width: 2R is a whole number of spacings
  double box_half_width() const { return 0.5 * intervals_ * h_; }
  long sites_per_axis() const { return n_axis_; }
  std::size_t size() const { return dim_ == 1 ? n_axis_ : std::size_t(n_axis_) * n_axis_; }
  const Potential& potential() const { return potential_; }
  bool is_free() const { return potential_.is_zero(); }
  const std::vector<double>& potential_values() const { return v_; }

  // x_i = -R + (i + 1) h, written so that the grid is exactly symmetric
  double axis_coordinate(long i) const { return (double(i + 1) - 0.5 * double(intervals_)) * h_; }

  Point site(std::size_t k) const {
    if (dim_ == 1) return {axis_coordinate(long(k)), 0.0};
    return {axis_coordinate(long(k % n_axis_)), axis_coordinate(long(k / n_axis_))};
  }

  // d = 1 tridiagonal entries
  std::vector<double> diagonal() const {
    std::vector<double> d(size());
    const double c = 2.0 * dim_ / (h_ * h_);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = c + v_[k];
    return d;
  }
  std::vector<double> off_diagonal() const {
    if (dim_ != 1) throw ConfigError("off_diagonal() is the d = 1 band");
    return std::vector<double>(n_axis_ > 0 ? n_axis_ - 1 : 0, -1.0 / (h_ * h_));
  }

  Matrix dense() const {
    const std::size_t n = size();
    if (dim_ == 2 && n > kMaxDenseSites)
      throw ConfigError("d = 2 lattice with " + std::to_string(n) + " sites exceeds the dense limit " +
                        std::to_string(kMaxDenseSites) + "; shrink R or raise h");
    Matrix A = Matrix::Zero(Eigen::Index(n), Eigen::Index(n));
    const auto d = diagonal();
    const double t = -1.0 / (h_ * h_);
    for (std::size_t k = 0; k < n; ++k) A(k, k) = d[k];
    if (dim_ == 1) {
      for (std::size_t k = 0; k + 1 < n; ++k) A(k, k + 1) = A(k + 1, k) = t;
    } else {
      for (long j = 0; j < n_axis_; ++j)
        for (long i = 0; i < n_axis_; ++i) {
          const long k = i + n_axis_ * j;
          if (i + 1 < n_axis_) A(k, k + 1) = A(k + 1, k) = t;
          if (j + 1 < n_axis_) A(k, k + n_axis_) = A(k + n_axis_, k) = t;
        }
    }
    return A;
  }

  // Eigenvalues of the 1D Dirichlet chain along one axis (free part).
  std::vector<double> axis_diagonal() const { return std::vector<double>(n_axis_, 2.0 / (h_ * h_)); }
  std::vector<double> axis_off_diagonal() const { return std::vector<double>(n_axis_ - 1, -1.0 / (h_ * h_)); }

  LatticeOperator free_partner() const {
    LatticeOperator op = *this;
    op.potential_ = Potential::zero(dim_);
    std::fill(op.v_.begin(), op.v_.end(), 0.0);
    return op;
  }

  std::string cache_key(double E) const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "lattice d=%d h=%.17g n=%ld E=%.17g V=", dim_, h_, n_axis_, E);
    return buf + potential_.describe();
  }

private:
  int dim_;
  double h_;
  Potential potential_;
  long intervals_ = 0;
  long n_axis_ = 0;
  std::vector<double> v_;
};

inline LatticeOperator build_hamiltonian(const ModelConfig& cfg, double box_half_width) {
  cfg.validate();
  if (cfg.engine != Engine::Lattice) throw ConfigError("build_hamiltonian needs the lattice engine");
  return LatticeOperator(cfg.dimension(), cfg.lattice.spacing, box_half_width, cfg.potential,
                         cfg.lattice.max_sites);
}

// Box chosen by the margin rule for region scale L.
inline LatticeOperator build_hamiltonian_for(const ModelConfig& cfg, double L) {
  return build_hamiltonian(cfg, cfg.box_half_width(L));
}

////////////////////////////////////////////////////////////////////////////////
//
// Fermi projection
//
////////////////////////////////////////////////////////////////////////////////

// P = V V^T with V the orthonormal eigenvectors below E; P itself is formed
// only on request.
struct FermiProjection {
  double energy = 0.0;
  Vector eigenvalues;
  Matrix basis; // size x count
  std::size_t count = 0;
  double idempotency_residual = 0.0; // max |P^2 - P| (bound when exact = false)
  double symmetry_residual = 0.0;    // max |P - P^T|
  bool residuals_exact = false;

  std::size_t size() const { return std::size_t(basis.rows()); }

  Matrix matrix() const {
    const auto n = basis.rows();
    Matrix P = Matrix::Zero(n, n);
    if (count > 0) P.selfadjointView<Eigen::Lower>().rankUpdate(basis);
    P.triangularView<Eigen::StrictlyUpper>() = P.transpose();
    return P;
  }
};

inline constexpr double kFermiDegeneracy = 1e-9;

namespace detail {

inline void check_fermi_gap(const std::vector<double>& levels_near, double E) {
  for (double v : levels_near)
    if (std::abs(v - E) <= kFermiDegeneracy * E)
      throw NumericalError("degenerate Fermi level: eigenvalue " + fmt17(v) + " within 1e-9*E of E = " +
                           fmt17(E));
}

// Dirichlet chain with N = n + 1 intervals, closed form:
//   mu_j = 4 sin^2(j pi / 2N) / h^2,  v_j(i) = sqrt(2/N) sin(j pi (i+1) / N).
// Used for V = 0, where the general tridiagonal solver spends O(n m^2) on
// reorthogonalizing clustered vectors.
inline EigenPairs free_chain_eigen(long n, double h, double cut, bool want_vectors = true) {
  const long N = n + 1;
  const double pi = std::numbers::pi;
  long m = 0;
  while (m < n) {
    const double s = std::sin((m + 1) * pi / (2.0 * N));
    if (4.0 * s * s / (h * h) >= cut) break;
    ++m;
  }
  EigenPairs r;
  r.values.resize(m);
  for (long j = 1; j <= m; ++j) {
    const double s = std::sin(j * pi / (2.0 * N));
    r.values(j - 1) = 4.0 * s * s / (h * h);
  }
  if (want_vectors) {
    r.vectors.resize(n, m);
    const double norm = std::sqrt(2.0 / N);
    for (long j = 1; j <= m; ++j)
      for (long i = 0; i < n; ++i) {
        // reduce j (i+1) mod 2N exactly before scaling, keeps sin accurate
        const long q = (j * (i + 1)) % (2 * N);
        r.vectors(i, j - 1) = norm * std::sin(q * pi / N);
      }
  }
  return r;
}

// d = 2 free box: products of 1D chain eigenvectors with mu_i + mu_j < E
inline EigenPairs free_square_eigen(const LatticeOperator& op, double E) {
  auto chain = free_chain_eigen(op.sites_per_axis(), op.spacing(), E, true);
  const Eigen::Index k = chain.values.size();
  std::vector<std::pair<double, std::pair<Eigen::Index, Eigen::Index>>> pairs;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double e = chain.values(i) + chain.values(j);
      if (std::abs(e - E) <= kFermiDegeneracy * E)
        throw NumericalError("degenerate Fermi level: eigenvalue " + fmt17(e) + " within 1e-9*E of E");
      if (e < E) pairs.push_back({e, {i, j}});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](auto& a, auto& b) { return a.first < b.first; });
  const long n = op.sites_per_axis();
  EigenPairs r;
  r.values.resize(Eigen::Index(pairs.size()));
  r.vectors.resize(n * n, Eigen::Index(pairs.size()));
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    r.values(c) = pairs[c].first;
    const auto [i, j] = pairs[c].second;
    // site index = x + n y
    for (long y = 0; y < n; ++y) r.vectors.col(c).segment(y * n, n) = chain.vectors.col(i) * chain.vectors(y, j);
  }
  return r;
}

} // namespace detail

inline FermiProjection fermi_projection(const LatticeOperator& op, double E, const EigenCache* cache = nullptr) {
  if (!std::isfinite(E)) throw ConfigError("Fermi energy must be finite");
  FermiProjection fp;
  fp.energy = E;
  const std::string key = op.cache_key(E);

  std::optional<EigenPairs> pairs;
  if (cache) pairs = cache->load(key);
  if (!pairs) {
    if (op.dimension() == 1 && op.is_free()) {
      auto chain = detail::free_chain_eigen(op.sites_per_axis(), op.spacing(), E + kFermiDegeneracy * std::abs(E));
      std::vector<double> near;
      Eigen::Index m = 0;
      for (Eigen::Index i = 0; i < chain.values.size(); ++i) {
        if (chain.values(i) >= E - kFermiDegeneracy * std::abs(E)) near.push_back(chain.values(i));
        if (chain.values(i) < E) m = i + 1;
      }
      detail::check_fermi_gap(near, E);
      if (m < chain.values.size()) {
        chain.values.conservativeResize(m);
        chain.vectors.conservativeResize(Eigen::NoChange, m);
      }
      pairs = std::move(chain);
    } else if (op.dimension() == 1) {
      const auto d = op.diagonal();
      const auto o = op.off_diagonal();
      const double lo = E - kFermiDegeneracy * std::abs(E), hi = E + kFermiDegeneracy * std::abs(E);
      if (sturm_count(d, o, lo) != sturm_count(d, o, hi))
        throw NumericalError("degenerate Fermi level: an eigenvalue lies within 1e-9*E of E = " +
                             detail::fmt17(E));
      pairs = tridiagonal_eigen_below(d, o, E, true);
    } else if (op.is_free()) {
      pairs = detail::free_square_eigen(op, E);
    } else {
      auto all = symmetric_eigen_below(op.dense(), E + kFermiDegeneracy * std::abs(E), true);
      std::vector<double> near;
      Eigen::Index m = 0;
      for (Eigen::Index i = 0; i < all.values.size(); ++i) {
        if (all.values(i) >= E - kFermiDegeneracy * std::abs(E)) near.push_back(all.values(i));
        if (all.values(i) < E) m = i + 1;
      }
      detail::check_fermi_gap(near, E);
      EigenPairs p;
      p.values = all.values.head(m);
      p.vectors = all.vectors.leftCols(m);
      pairs = std::move(p);
    }
    if (cache) cache->store(key, *pairs);
  }
  fp.eigenvalues = std::move(pairs->values);
  fp.basis = std::move(pairs->vectors);
  if (fp.basis.rows() == 0) fp.basis.resize(Eigen::Index(op.size()), 0);
  fp.count = std::size_t(fp.eigenvalues.size());

  // P^2 - P = V (V^T V - I) V^T
  if (fp.count > 0) {
    Matrix G = Matrix::Zero(Eigen::Index(fp.count), Eigen::Index(fp.count));
    G.selfadjointView<Eigen::Lower>().rankUpdate(fp.basis.transpose());
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
    G -= Matrix::Identity(G.rows(), G.cols());
    if (fp.size() <= 1000) {
      const Matrix P = fp.basis * fp.basis.transpose();
      fp.idempotency_residual = (fp.basis * G * fp.basis.transpose()).cwiseAbs().maxCoeff();
      fp.symmetry_residual = (P - P.transpose()).cwiseAbs().maxCoeff();
      fp.residuals_exact = true;
    } else {
      const double row2 = fp.basis.rowwise().squaredNorm().maxCoeff();
      fp.idempotency_residual = G.norm() * row2;
      fp.symmetry_residual = 0.0; // P = V V^T is formed symmetric
    }
  }
  return fp;
}

////////////////////////////////////////////////////////////////////////////////
//
// Truncation to a region
//
////////////////////////////////////////////////////////////////////////////////

// Half-open membership so that an interval [-L, L) holds exactly 2L/h sites
// when 2L/h is an integer.
inline bool site_in_region(const Domain& region, const Point& p, double h) {
  const double eps = 1e-9 * h;
  switch (region.shape()) {
  case Shape::Interval: return p.x >= region.lower() - eps && p.x < region.upper() - eps;
  case Shape::Square: {
    const double w = region.half_width();
    return p.x >= -w - eps && p.x < w - eps && p.y >= -w - eps && p.y < w - eps;
  }
  case Shape::Disk: return std::hypot(p.x, p.y) < region.radius() - eps;
  }
  return false;
}

struct RegionSplit {
  std::vector<Eigen::Index> inside;
  std::vector<Eigen::Index> outside;
};

inline RegionSplit split_sites(const LatticeOperator& op, const Domain& region) {
  if (region.dimension() != op.dimension()) throw ConfigError("region and lattice dimensions differ");
  RegionSplit s;
  for (std::size_t k = 0; k < op.size(); ++k)
    (site_in_region(region, op.site(k), op.spacing()) ? s.inside : s.outside).push_back(Eigen::Index(k));
  return s;
}

// Gram matrix X^T X of the selected rows of X, exactly symmetric.
inline Matrix row_gram(const Matrix& X, const std::vector<Eigen::Index>& rows) {
  const Eigen::Index m = X.cols();
  Matrix G = Matrix::Zero(m, m);
  if (rows.empty() || m == 0) return G;
  const Matrix XA = X(rows, Eigen::all);
  G.selfadjointView<Eigen::Lower>().rankUpdate(XA.transpose());
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  return G;
}

inline std::string lattice_tag(const LatticeOperator& op) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "h=%.17g R=%.17g sites=%zu", op.spacing(), op.box_half_width(), op.size());
  return buf;
}

// Nonzero spectrum of 1_A V V^T 1_A equals the spectrum of V_A^T V_A (m x m);
// the remaining |A| - m eigenvalues are zero by rank.
inline TruncatedSpectrum truncate_spectrum(const FermiProjection& fp, const Domain& region,
                                           const LatticeOperator& op) {
  if (fp.size() != op.size()) throw ConfigError("projection and lattice sizes differ");
  const auto split = split_sites(op, region);
  const std::size_t nA = split.inside.size();
  const std::size_t m = fp.count;
  std::vector<double> vals;
  std::size_t zeros = 0;
  if (m > 0 && nA > 0) {
    const Vector ev = symmetric_eigenvalues(row_gram(fp.basis, split.inside));
    const std::size_t keep = std::min(nA, m);
    vals.assign(ev.data() + (m - keep), ev.data() + m);
  }
  if (nA > m) zeros = nA - m;
  return make_spectrum(std::move(vals), zeros, region.scale(), "lattice", lattice_tag(op), region);
}

// Spectrum of a principal submatrix of an explicit symmetric P.
inline std::vector<double> principal_spectrum(const Matrix& P, const std::vector<Eigen::Index>& idx) {
  const Matrix S = P(idx, idx);
  const Vector ev = symmetric_eigenvalues(S);
  return {ev.data(), ev.data() + ev.size()};
}

////////////////////////////////////////////////////////////////////////////////
//
// Integrated density of states by eigenvalue counting
//
////////////////////////////////////////////////////////////////////////////////

struct IdsOptions {
  double box_half_width = 500.0;
  double spacing = 0.1;
};

namespace detail {

inline double count_density(int d, double E, double R, double h) {
  LatticeOperator op(d, h, R, Potential::zero(d), std::size_t(-1));
  const double vol = std::pow(2.0 * op.box_half_width(), d);
  auto dd = op.axis_diagonal();
  auto oo = op.axis_off_diagonal();
  if (d == 1) return double(sturm_count(dd, oo, E)) / vol;
  // pairs of chain eigenvalues, two-pointer count of mu_i + mu_j < E
  const auto chain = tridiagonal_eigen_below(dd, oo, E, false);
  const Eigen::Index k = chain.values.size();
  double count = 0.0;
  Eigen::Index j = k;
  for (Eigen::Index i = 0; i < k; ++i) {
    while (j > 0 && chain.values(i) + chain.values(j - 1) >= E) --j;
    count += double(j);
  }
  return count / vol;
}

} // namespace detail

// #{eigenvalues < E} / box volume for -Laplacian, Richardson-extrapolated
// over the spacings h and h/2 (O(h^2) dispersion error).
inline double ids_estimate(const ModelConfig& cfg, double E, IdsOptions opt = {}) {
  if (!cfg.potential.is_zero()) throw ConfigError("ids_estimate needs V = 0");
  if (!(E >= 0.0)) throw ConfigError("ids_estimate needs E >= 0");
  if (E == 0.0) return 0.0;
  const int d = cfg.dimension();
  const double coarse = detail::count_density(d, E, opt.box_half_width, opt.spacing);
  const double fine = detail::count_density(d, E, opt.box_half_width, 0.5 * opt.spacing);
  return (4.0 * fine - coarse) / 3.0;
}

////////////////////////////////////////////////////////////////////////////////
//
// Unit-cube block norms of P - P0
//
////////////////////////////////////////////////////////////////////////////////

struct BlockNorm {
  long n[2] = {0, 0};
  long m[2] = {0, 0};
  double norm = 0.0; // Frobenius norm of 1_{Gamma_n} (P - P0) 1_{Gamma_m}
};

struct BlockDecay {
  std::vector<BlockNorm> table;
  long ell = 0;            // blocks with |n|_inf, |m|_inf <= ell excluded from the fit
  double exponent = 0.0;   // beta in norm ~ c2 * form^{-beta}
  double c2 = 0.0;         // exp(intercept)
  double envelope = 0.0;   // max norm * form over the fit window
  std::size_t fitted = 0;
};

// form(n, m) = (|n| |m|)^{(d-1)/2} (|n| + |m|)
inline double block_form(const BlockNorm& b, int d) {
  const double nn = d == 1 ? std::abs(double(b.n[0])) : std::hypot(double(b.n[0]), double(b.n[1]));
  const double mm = d == 1 ? std::abs(double(b.m[0])) : std::hypot(double(b.m[0]), double(b.m[1]));
  return std::pow(nn * mm, 0.5 * (d - 1)) * (nn + mm);
}

inline BlockDecay block_norm_decay(const FermiProjection& P, const FermiProjection& P0, const LatticeOperator& op,
                                   double cube = 1.0) {
  if (P.size() != op.size() || P0.size() != op.size()) throw ConfigError("projection sizes differ from lattice");
  const int d = op.dimension();
  const double supp = op.potential().support_radius();
  const double R = op.box_half_width();
  if ((R - supp) / cube < 20.0)
    throw ConfigError("block decay needs >= 20 unit cubes per side beyond supp V (have " +
                      detail::fmt17((R - supp) / cube) + ")");

  BlockDecay out;
  out.ell = long(std::ceil(supp / cube));
  const Matrix D = P.matrix() - P0.matrix();
  // cubes centred on integer multiples of `cube`
  const long half = long(std::floor(R / cube + 0.5));
  const long side = 2 * half + 1;
  auto cube_of = [&](double x) { return long(std::floor(x / cube + 0.5)); };
  std::vector<long> cell(op.size());
  for (std::size_t k = 0; k < op.size(); ++k) {
    const Point p = op.site(k);
    const long cx = cube_of(p.x) + half;
    const long cy = d == 2 ? cube_of(p.y) + half : 0;
    cell[k] = cx + side * cy;
  }
  const long cells = d == 1 ? side : side * side;
  std::vector<double> acc(std::size_t(cells) * cells, 0.0);
  for (Eigen::Index j = 0; j < D.cols(); ++j)
    for (Eigen::Index i = 0; i < D.rows(); ++i) acc[cell[i] * cells + cell[j]] += D(i, j) * D(i, j);

  auto coords = [&](long c, long out_[2]) {
    out_[0] = c % side - half;
    out_[1] = d == 2 ? c / side - half : 0;
  };
  std::vector<double> xs, ys;
  // fit window stays clear of the walls
  const long far = long(std::floor(0.5 * R / cube));
  for (long a = 0; a < cells; ++a)
    for (long b = 0; b < cells; ++b) {
      const double v = acc[a * cells + b];
      if (v <= 0.0) continue;
      BlockNorm bn;
      coords(a, bn.n);
      coords(b, bn.m);
      bn.norm = std::sqrt(v);
      out.table.push_back(bn);
      const long ninf = std::max(std::abs(bn.n[0]), std::abs(bn.n[1]));
      const long minf = std::max(std::abs(bn.m[0]), std::abs(bn.m[1]));
      if (ninf > out.ell && minf > out.ell && ninf <= far && minf <= far) {
        const double f = block_form(bn, d);
        xs.push_back(std::log(f));
        ys.push_back(std::log(bn.norm));
        out.envelope = std::max(out.envelope, bn.norm * f);
      }
    }
  out.fitted = xs.size();
  if (xs.size() >= 3) {
    Matrix A(Eigen::Index(xs.size()), 2);
    Vector y(Eigen::Index(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      A(i, 0) = 1.0;
      A(i, 1) = xs[i];
      y(i) = ys[i];
    }
    const Vector c = A.colPivHouseholderQr().solve(y);
    out.c2 = std::exp(c(0));
    out.exponent = -c(1);
  }
  return out;
}

} // namespace szego

#endif // SZEGO_LATTICE_HPP
