#pragma once

// Discretized Fourier transforms of sampled functions.
//
// Convention used by every spectral computation in the library: cyclic
// frequency and the kernel e^{+i 2 pi xi x}, i.e.
//   F(xi) = \int f(x) e^{+i 2 pi xi x} dx.
// Under this kernel the template exp(-i 2 pi w x) sits at xi = +w, so the
// complex templates are progressive (supported on xi >= 0).

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "winr/numerics.hpp"

namespace winr {

struct SpectrumReport {
  int dim = 1;
  std::vector<double> freq_x;  // ascending
  std::vector<double> freq_y;  // ascending, 2D only
  std::vector<Cplx> values;    // row-major, y slow
  double bin_area = 0.0;
  double total_energy = 0.0;
  std::string label;
  std::string window = "none";
  std::string warning;

  std::size_t size() const noexcept { return values.size(); }
  double magnitude(std::size_t i) const { return std::abs(values[i]); }
  double energy(std::size_t i) const { return std::norm(values[i]) * bin_area; }
  double fx(std::size_t i) const { return dim == 1 ? freq_x[i] : freq_x[i % freq_x.size()]; }
  double fy(std::size_t i) const { return dim == 1 ? 0.0 : freq_y[i / freq_x.size()]; }
};

namespace detail {

inline std::vector<double> ascending_frequencies(const Grid1D& g) {
  std::vector<double> f(g.n);
  for (std::size_t j = 0; j < g.n; ++j)
    f[j] = (static_cast<double>(j) - static_cast<double>(g.n / 2)) / g.length();
  return f;
}

inline void finish_report(SpectrumReport& rep) {
  double e = 0.0;
  for (const auto& v : rep.values) e += std::norm(v);
  rep.total_energy = e * rep.bin_area;
}

}  // namespace detail

/// Transform of 1D samples on `grid`.
inline SpectrumReport sampled_spectrum(std::span<const Cplx> samples, const Grid1D& grid) {
  grid.validate();
  if (samples.size() != grid.n) throw SizeError("sampled_spectrum: sample count != grid.n");
  const std::size_t n = grid.n;
  // sum_m f_m e^{+2 pi i k m / n} == n * inverse DFT.
  auto t = fft_1d(std::vector<Cplx>(samples.begin(), samples.end()), true);
  const double dx = grid.spacing();
  SpectrumReport rep;
  rep.dim = 1;
  rep.freq_x = detail::ascending_frequencies(grid);
  rep.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = (j + n / 2) % n;
    const double xi = rep.freq_x[j];
    rep.values[j] = t[k] * (static_cast<double>(n) * dx) *
                    std::polar(1.0, 2.0 * std::numbers::pi * xi * grid.lo);
  }
  rep.bin_area = 1.0 / grid.length();
  detail::finish_report(rep);
  return rep;
}

/// Transform of 2D samples in raster order on `grid`.
inline SpectrumReport sampled_spectrum(std::span<const Cplx> samples, const Grid2D& grid) {
  grid.validate();
  if (samples.size() != grid.size()) throw SizeError("sampled_spectrum: sample count != grid size");
  const std::size_t nx = grid.x.n, ny = grid.y.n;
  CMatrix m(ny, nx);
  std::copy(samples.begin(), samples.end(), m.data().begin());
  m = fft_2d(std::move(m), true);
  const double scale = static_cast<double>(nx * ny) * grid.x.spacing() * grid.y.spacing();
  SpectrumReport rep;
  rep.dim = 2;
  rep.freq_x = detail::ascending_frequencies(grid.x);
  rep.freq_y = detail::ascending_frequencies(grid.y);
  rep.values.resize(nx * ny);
  for (std::size_t jy = 0; jy < ny; ++jy) {
    const std::size_t ky = (jy + ny / 2) % ny;
    for (std::size_t jx = 0; jx < nx; ++jx) {
      const std::size_t kx = (jx + nx / 2) % nx;
      const double phase =
          2.0 * std::numbers::pi * (rep.freq_x[jx] * grid.x.lo + rep.freq_y[jy] * grid.y.lo);
      rep.values[jy * nx + jx] = m(ky, kx) * scale * std::polar(1.0, phase);
    }
  }
  rep.bin_area = 1.0 / (grid.x.length() * grid.y.length());
  detail::finish_report(rep);
  return rep;
}

}  // namespace winr
