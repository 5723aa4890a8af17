#pragma once

// Template functions psi used in the first layer of an INR, their gradients,
// closed-form Fourier transforms and effective Fourier supports.
//
// Frequencies are cyclic and follow the kernel documented in spectrum.hpp, so
// a Gaussian envelope of spatial scale sigma has spectral standard deviation
// 1/(2 pi sigma), and exp(-i 2 pi w x) sits at +w.
//
// In two dimensions axis 0 is the oscillation axis:
//   Gaussian        exp(-|x|^2 / 2 sigma^2)
//   Gabor           exp(-|x|^2 / 2 sigma^2) exp(-i 2 pi w x0)
//   ComplexSinusoid exp(-i 2 pi w x0)
//   Meyer           meyer(x0) exp(-x1^2 / 2 sigma^2)
//   Bump            e exp(1 / (|x|^2/R^2 - 1)) inside the ball of radius R

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "winr/numerics.hpp"
#include "winr/spectrum.hpp"

namespace winr {

enum class TemplateKind { Gaussian, Gabor, ComplexSinusoid, Meyer, Bump };

inline std::string to_string(TemplateKind k) {
  switch (k) {
    case TemplateKind::Gaussian: return "gaussian";
    case TemplateKind::Gabor: return "gabor";
    case TemplateKind::ComplexSinusoid: return "sinusoid";
    case TemplateKind::Meyer: return "meyer";
    case TemplateKind::Bump: return "bump";
  }
  return "unknown";
}

/// Templates whose values have zero imaginary part everywhere.
inline bool is_real_valued(TemplateKind k) { return k == TemplateKind::Gaussian || k == TemplateKind::Bump; }

inline TemplateKind template_kind_from_string(const std::string& s) {
  if (s == "gaussian") return TemplateKind::Gaussian;
  if (s == "gabor") return TemplateKind::Gabor;
  if (s == "sinusoid") return TemplateKind::ComplexSinusoid;
  if (s == "meyer") return TemplateKind::Meyer;
  if (s == "bump") return TemplateKind::Bump;
  throw std::invalid_argument("unknown template kind '" + s + "'");
}

struct TemplateSpec {
  TemplateKind kind = TemplateKind::Gaussian;
  double omega = 1.0;   // Gabor, ComplexSinusoid
  double sigma = 1.0;   // Gaussian, Gabor, cross-axis envelope of 2D Meyer
  double radius = 1.0;  // Bump
  int dim = 1;

  void validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("TemplateSpec: dim must be 1 or 2");
    const bool uses_sigma = kind == TemplateKind::Gaussian || kind == TemplateKind::Gabor ||
                            (kind == TemplateKind::Meyer && dim == 2);
    if (uses_sigma && !(sigma > 0.0)) throw std::invalid_argument("TemplateSpec: sigma must be > 0");
    const bool uses_omega = kind == TemplateKind::Gabor || kind == TemplateKind::ComplexSinusoid;
    if (uses_omega && !(omega > 0.0)) throw std::invalid_argument("TemplateSpec: omega must be > 0");
    if (kind == TemplateKind::Bump && !(radius > 0.0))
      throw std::invalid_argument("TemplateSpec: radius must be > 0");
  }

  static TemplateSpec gaussian(double sigma, int dim = 1) {
    return {TemplateKind::Gaussian, 1.0, sigma, 1.0, dim};
  }
  static TemplateSpec gabor(double omega, double sigma, int dim = 1) {
    return {TemplateKind::Gabor, omega, sigma, 1.0, dim};
  }
  static TemplateSpec sinusoid(double omega, int dim = 1) {
    return {TemplateKind::ComplexSinusoid, omega, 1.0, 1.0, dim};
  }
  static TemplateSpec meyer(int dim = 1, double cross_sigma = 1.0) {
    return {TemplateKind::Meyer, 1.0, cross_sigma, 1.0, dim};
  }
  static TemplateSpec bump(double radius, int dim = 1) {
    return {TemplateKind::Bump, 1.0, 1.0, radius, dim};
  }

  friend bool operator==(const TemplateSpec&, const TemplateSpec&) = default;
};

/// Spatial scale of exp(-(pi x)^2 / 6), the envelope used by the split architecture.
inline double split_envelope_sigma() { return std::sqrt(3.0) / std::numbers::pi; }

/// Scaling-network template exp(-(pi x)^2 / 6).
inline TemplateSpec scaling_template(int dim = 1) {
  return TemplateSpec::gaussian(split_envelope_sigma(), dim);
}

/// Wavelet-network template exp(-(pi x)^2 / 6) exp(-i 2 pi x).
inline TemplateSpec gabor_template(int dim = 1) {
  return TemplateSpec::gabor(1.0, split_envelope_sigma(), dim);
}

/// Fourier transform of the complex Meyer wavelet in angular frequency.
inline double meyer_hat(double xi) {
  constexpr double pi = std::numbers::pi;
  if (xi >= 2.0 * pi / 3.0 && xi <= 4.0 * pi / 3.0) return std::sin(3.0 * xi / 4.0 - pi / 2.0);
  if (xi > 4.0 * pi / 3.0 && xi <= 8.0 * pi / 3.0) return std::cos(3.0 * xi / 8.0 - pi / 2.0);
  return 0.0;
}

/// Spatial samples of the Meyer wavelet on [-32, 32), built by an inverse FFT
/// of meyer_hat and interpolated with Catmull-Rom cubics.
class MeyerTable {
 public:
  static constexpr std::size_t kSize = 8192;
  static constexpr double kHalfWidth = 32.0;

  static const MeyerTable& instance() {
    static const MeyerTable table;
    return table;
  }

  double spacing() const noexcept { return 2.0 * kHalfWidth / static_cast<double>(kSize); }
  double node(std::size_t i) const noexcept { return -kHalfWidth + static_cast<double>(i) * spacing(); }
  std::span<const Cplx> samples() const noexcept { return samples_; }

  Cplx value(double x) const { return interpolate(x, nullptr); }

  Cplx value_and_derivative(double x, Cplx& derivative) const { return interpolate(x, &derivative); }

 private:
  MeyerTable() {
    const double length = 2.0 * kHalfWidth;
    std::vector<Cplx> spec(kSize);
    for (std::size_t k = 0; k < kSize; ++k) {
      const double nu = bin_frequency(k, kSize, length);
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      spec[k] = sign * meyer_hat(2.0 * std::numbers::pi * nu);
    }
    samples_ = fft_1d(std::move(spec), false);
    for (auto& s : samples_) s /= length;
  }

  Cplx interpolate(double x, Cplx* derivative) const {
    if (!(x >= -kHalfWidth && x <= kHalfWidth))
      throw RangeError("Meyer template evaluated at x=" + std::to_string(x) +
                       " outside the tabulated range [-32, 32]");
    const double h = spacing();
    const double pos = (x + kHalfWidth) / h;
    double fl = std::floor(pos);
    const double t = pos - fl;
    const auto n = static_cast<long>(kSize);
    const long i = static_cast<long>(fl);
    auto at = [&](long j) { return samples_[static_cast<std::size_t>(((j % n) + n) % n)]; };
    const Cplx p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    const Cplx a = 2.0 * p1;
    const Cplx b = p2 - p0;
    const Cplx c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    const Cplx d = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    if (derivative) *derivative = 0.5 * (b + t * (2.0 * c + t * 3.0 * d)) / h;
    return 0.5 * (a + t * (b + t * (c + t * d)));
  }

  std::vector<Cplx> samples_;
};

/// Value and per-coordinate gradient of a template at one point.
struct TemplateJet {
  Cplx value;
  std::array<Cplx, 2> grad{};
};

inline TemplateJet eval_template_jet(const TemplateSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.dim)
    throw SizeError("eval_template: point dimension " + std::to_string(x.size()) +
                    " does not match template dimension " + std::to_string(spec.dim));
  constexpr double pi = std::numbers::pi;
  const double x0 = x[0];
  const double x1 = spec.dim == 2 ? x[1] : 0.0;
  TemplateJet jet;
  switch (spec.kind) {
    case TemplateKind::Gaussian: {
      const double s2 = spec.sigma * spec.sigma;
      const double g = std::exp(-(x0 * x0 + x1 * x1) / (2.0 * s2));
      jet.value = g;
      jet.grad[0] = -x0 / s2 * g;
      jet.grad[1] = -x1 / s2 * g;
      break;
    }
    case TemplateKind::Gabor: {
      const double s2 = spec.sigma * spec.sigma;
      const double g = std::exp(-(x0 * x0 + x1 * x1) / (2.0 * s2));
      if (g == 0.0) break;
      const Cplx osc = std::polar(1.0, -2.0 * pi * spec.omega * x0);
      jet.value = g * osc;
      jet.grad[0] = jet.value * Cplx(-x0 / s2, -2.0 * pi * spec.omega);
      jet.grad[1] = jet.value * (-x1 / s2);
      break;
    }
    case TemplateKind::ComplexSinusoid: {
      jet.value = std::polar(1.0, -2.0 * pi * spec.omega * x0);
      jet.grad[0] = jet.value * Cplx(0.0, -2.0 * pi * spec.omega);
      break;
    }
    case TemplateKind::Meyer: {
      Cplx dm;
      const Cplx m = MeyerTable::instance().value_and_derivative(x0, dm);
      if (spec.dim == 1) {
        jet.value = m;
        jet.grad[0] = dm;
      } else {
        const double s2 = spec.sigma * spec.sigma;
        const double g = std::exp(-x1 * x1 / (2.0 * s2));
        jet.value = m * g;
        jet.grad[0] = dm * g;
        jet.grad[1] = m * g * (-x1 / s2);
      }
      break;
    }
    case TemplateKind::Bump: {
      const double r2 = spec.radius * spec.radius;
      const double t = (x0 * x0 + x1 * x1) / r2;
      if (t < 1.0) {
        const double q = t - 1.0;
        const double v = std::exp(1.0 + 1.0 / q);
        jet.value = v;
        const double dvdt = -v / (q * q);
        jet.grad[0] = dvdt * 2.0 * x0 / r2;
        jet.grad[1] = dvdt * 2.0 * x1 / r2;
      }
      break;
    }
  }
  return jet;
}

inline Cplx eval_template(const TemplateSpec& spec, std::span<const double> x) {
  return eval_template_jet(spec, x).value;
}

inline Cplx eval_template(const TemplateSpec& spec, double x) {
  return eval_template(spec, std::span<const double>(&x, 1));
}

inline std::vector<Cplx> eval_template_grad(const TemplateSpec& spec, std::span<const double> x) {
  const auto jet = eval_template_jet(spec, x);
  return {jet.grad.begin(), jet.grad.begin() + spec.dim};
}

/// Closed-form transform at cyclic frequency (xi0, xi1). Not defined for the
/// sinusoid (a Dirac mass) or the bump (no closed form).
inline Cplx closed_form_transform(const TemplateSpec& spec, double xi0, double xi1 = 0.0) {
  constexpr double pi = std::numbers::pi;
  auto gauss_hat = [&](double sigma, double nu) {
    return sigma * std::sqrt(2.0 * pi) * std::exp(-2.0 * pi * pi * sigma * sigma * nu * nu);
  };
  switch (spec.kind) {
    case TemplateKind::Gaussian:
      return spec.dim == 1 ? gauss_hat(spec.sigma, xi0)
                           : gauss_hat(spec.sigma, xi0) * gauss_hat(spec.sigma, xi1);
    case TemplateKind::Gabor:
      return spec.dim == 1 ? gauss_hat(spec.sigma, xi0 - spec.omega)
                           : gauss_hat(spec.sigma, xi0 - spec.omega) * gauss_hat(spec.sigma, xi1);
    case TemplateKind::Meyer:
      return spec.dim == 1 ? meyer_hat(2.0 * pi * xi0)
                           : meyer_hat(2.0 * pi * xi0) * gauss_hat(spec.sigma, xi1);
    case TemplateKind::ComplexSinusoid:
    case TemplateKind::Bump: break;
  }
  throw std::invalid_argument("closed_form_transform: no closed form for template '" +
                              to_string(spec.kind) + "'");
}

struct FrequencyBox {
  int dim = 1;
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};

  double max_abs(int axis) const {
    return std::max(std::abs(lo[static_cast<std::size_t>(axis)]),
                    std::abs(hi[static_cast<std::size_t>(axis)]));
  }
  bool contains(double x0, double x1 = 0.0) const {
    if (x0 < lo[0] || x0 > hi[0]) return false;
    return dim == 1 || (x1 >= lo[1] && x1 <= hi[1]);
  }
  friend bool operator==(const FrequencyBox&, const FrequencyBox&) = default;
};

enum class SupportKind { Interval, Cone2D, WeaklyConic, Everything };

/// Fourier support of a template together with its effective box, the
/// axis-aligned region holding at least 99.9% of the spectral energy.
struct FourierSupportDesc {
  SupportKind kind = SupportKind::Everything;
  FrequencyBox effective_box;
  double min_radius = 0.0;                // WeaklyConic
  std::array<double, 2> sector{0.0, 0.0};  // angular sector [from, to] in radians (2D cones)
};

namespace detail {

// Half-width c of the box [-c, c]^d holding 99.9% of the energy of a unit bump.
inline double bump_box_halfwidth(int dim) {
  static const std::array<double, 2> cached = [] {
    std::array<double, 2> out{};
    const TemplateSpec b1 = TemplateSpec::bump(1.0, 1);
    {
      Grid1D g{-16.0, 16.0, 4096};
      std::vector<Cplx> v(g.n);
      for (std::size_t i = 0; i < g.n; ++i) v[i] = eval_template(b1, g.point(i));
      const auto rep = sampled_spectrum(v, g);
      double lo = 0.0, hi = g.nyquist();
      for (int it = 0; it < 60; ++it) {
        const double c = 0.5 * (lo + hi);
        double e = 0.0;
        for (std::size_t i = 0; i < rep.size(); ++i)
          if (std::abs(rep.freq_x[i]) <= c) e += rep.energy(i);
        (e >= 0.999 * rep.total_energy ? hi : lo) = c;
      }
      out[0] = hi;
    }
    {
      const TemplateSpec b2 = TemplateSpec::bump(1.0, 2);
      Grid2D g{{-4.0, 4.0, 256}, {-4.0, 4.0, 256}};
      std::vector<Cplx> v(g.size());
      const auto pts = g.points();
      for (std::size_t i = 0; i < g.size(); ++i)
        v[i] = eval_template(b2, std::span<const double>(&pts[2 * i], 2));
      const auto rep = sampled_spectrum(v, g);
      double lo = 0.0, hi = g.x.nyquist();
      for (int it = 0; it < 60; ++it) {
        const double c = 0.5 * (lo + hi);
        double e = 0.0;
        for (std::size_t i = 0; i < rep.size(); ++i)
          if (std::abs(rep.fx(i)) <= c && std::abs(rep.fy(i)) <= c) e += rep.energy(i);
        (e >= 0.999 * rep.total_energy ? hi : lo) = c;
      }
      out[1] = hi;
    }
    return out;
  }();
  return cached[static_cast<std::size_t>(dim - 1)];
}

}  // namespace detail

/// Gaussian envelopes are boxed at 2.5 spectral standard deviations per axis.
inline constexpr double kGaussianBoxWidth = 2.5;

inline FourierSupportDesc fourier_support(const TemplateSpec& spec) {
  spec.validate();
  constexpr double pi = std::numbers::pi;
  FourierSupportDesc d;
  d.effective_box.dim = spec.dim;
  const double sd = 1.0 / (2.0 * pi * spec.sigma);
  auto set_axis = [&](int axis, double lo, double hi) {
    d.effective_box.lo[static_cast<std::size_t>(axis)] = lo;
    d.effective_box.hi[static_cast<std::size_t>(axis)] = hi;
  };
  switch (spec.kind) {
    case TemplateKind::Gaussian:
      d.kind = SupportKind::Everything;
      for (int a = 0; a < spec.dim; ++a) set_axis(a, -kGaussianBoxWidth * sd, kGaussianBoxWidth * sd);
      break;
    case TemplateKind::Gabor:
      d.kind = SupportKind::Everything;
      set_axis(0, spec.omega - kGaussianBoxWidth * sd, spec.omega + kGaussianBoxWidth * sd);
      if (spec.dim == 2) set_axis(1, -kGaussianBoxWidth * sd, kGaussianBoxWidth * sd);
      break;
    case TemplateKind::ComplexSinusoid:
      d.kind = SupportKind::Interval;
      set_axis(0, spec.omega, spec.omega);
      if (spec.dim == 2) set_axis(1, 0.0, 0.0);
      break;
    case TemplateKind::Meyer:
      d.kind = SupportKind::WeaklyConic;
      d.min_radius = 1.0 / 3.0;
      set_axis(0, 1.0 / 3.0, 4.0 / 3.0);
      if (spec.dim == 2) {
        set_axis(1, -kGaussianBoxWidth * sd, kGaussianBoxWidth * sd);
        const double half = std::atan2(kGaussianBoxWidth * sd, 1.0 / 3.0);
        d.sector = {-half, half};
      }
      break;
    case TemplateKind::Bump: {
      d.kind = SupportKind::Everything;
      const double c = detail::bump_box_halfwidth(spec.dim) / spec.radius;
      for (int a = 0; a < spec.dim; ++a) set_axis(a, -c, c);
      break;
    }
  }
  return d;
}

class AliasingError : public std::runtime_error {
 public:
  AliasingError(const std::string& what, std::size_t required_n)
      : std::runtime_error(what), required_n_(required_n) {}
  std::size_t required_n() const noexcept { return required_n_; }

 private:
  std::size_t required_n_;
};

namespace detail {

inline void check_nyquist(const FrequencyBox& box, int axis, const Grid1D& g) {
  const double need = box.max_abs(axis);
  if (need > g.nyquist()) {
    std::size_t n = g.n;
    while (static_cast<double>(n) / (2.0 * g.length()) < need) n *= 2;
    throw AliasingError("template_spectrum: grid too coarse on axis " + std::to_string(axis) +
                            " (Nyquist " + std::to_string(g.nyquist()) + " < " + std::to_string(need) +
                            "); need n >= " + std::to_string(n),
                        n);
  }
}

}  // namespace detail

inline SpectrumReport template_spectrum(const TemplateSpec& spec, const Grid1D& grid) {
  if (spec.dim != 1) throw SizeError("template_spectrum: 1D grid for a 2D template");
  grid.validate();
  detail::check_nyquist(fourier_support(spec).effective_box, 0, grid);
  std::vector<Cplx> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) v[i] = eval_template(spec, grid.point(i));
  auto rep = sampled_spectrum(v, grid);
  rep.label = "template:" + to_string(spec.kind);
  return rep;
}

inline SpectrumReport template_spectrum(const TemplateSpec& spec, const Grid2D& grid) {
  if (spec.dim != 2) throw SizeError("template_spectrum: 2D grid for a 1D template");
  grid.validate();
  const auto box = fourier_support(spec).effective_box;
  detail::check_nyquist(box, 0, grid.x);
  detail::check_nyquist(box, 1, grid.y);
  const auto pts = grid.points();
  std::vector<Cplx> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = eval_template(spec, std::span<const double>(&pts[2 * i], 2));
  auto rep = sampled_spectrum(v, grid);
  rep.label = "template:" + to_string(spec.kind);
  return rep;
}

}  // namespace winr
