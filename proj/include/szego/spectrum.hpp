#ifndef SZEGO_SPECTRUM_HPP
#define SZEGO_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "szego/error.hpp"
#include "szego/model.hpp"

namespace szego {

inline constexpr double kClipTolerance = 1e-6;

// Spectrum of a truncated Fermi projection 1_A P 1_A. Eigenvalues that are
// zero by rank (region larger than the rank of P) are kept as a count.
struct TruncatedSpectrum {
  std::vector<double> values; // ascending, clipped into [0, 1]
  std::size_t implicit_zeros = 0;
  double L = 1.0;
  std::string engine;
  std::string discretization;
  std::optional<Domain> domain;
  double max_clip = 0.0; // largest distance moved by clipping

  std::size_t size() const { return values.size() + implicit_zeros; }
};

// Clip raw eigenvalues into [0, 1]; anything further out than kClipTolerance
// means the discretization is inconsistent.
inline TruncatedSpectrum make_spectrum(std::vector<double> raw, std::size_t implicit_zeros, double L,
                                       std::string engine, std::string discretization,
                                       std::optional<Domain> domain) {
  TruncatedSpectrum s;
  double worst = 0.0;
  for (double& v : raw) {
    if (!std::isfinite(v)) throw NumericalError("non-finite eigenvalue in truncated spectrum");
    const double c = std::clamp(v, 0.0, 1.0);
    worst = std::max(worst, std::abs(c - v));
    v = c;
  }
  if (worst > kClipTolerance)
    throw NumericalError("truncated spectrum leaves [0,1] by " + detail::fmt17(worst) +
                         " (> 1e-6): discretization inconsistent");
  std::sort(raw.begin(), raw.end());
  s.values = std::move(raw);
  s.implicit_zeros = implicit_zeros;
  s.L = L;
  s.engine = std::move(engine);
  s.discretization = std::move(discretization);
  s.domain = std::move(domain);
  s.max_clip = worst;
  return s;
}

} // namespace szego

#endif // SZEGO_SPECTRUM_HPP
