#pragma once

// First-layer initialization: random placement, and placement at wavelet
// modulus maxima (1D) or Canny edge pixels (2D).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "winr/model.hpp"
#include "winr/numerics.hpp"
#include "winr/rng.hpp"
#include "winr/templates.hpp"

namespace winr {

// ---------------------------------------------------------------------------
// Continuous wavelet transform

struct CwtGrid {
  std::vector<double> scales;  // in samples, increasing
  CMatrix coefficients;        // scales x positions
  TemplateSpec mother;
  Grid1D grid;                 // sample positions in signal coordinates
  double signal_peak = 0.0;    // max |signal|

  std::size_t levels() const noexcept { return scales.size(); }
  std::size_t length() const noexcept { return coefficients.cols(); }
};

inline constexpr double kMinCwtScale = 2.0;

/// count scales s0, 2 s0, 4 s0, ...
inline std::vector<double> dyadic_scales(double s0 = kMinCwtScale, std::size_t count = 8) {
  std::vector<double> s(count);
  for (std::size_t j = 0; j < count; ++j) s[j] = s0 * std::ldexp(1.0, static_cast<int>(j));
  return s;
}

/// coefficients(j, u) = sum_x f[x] conj(psi((x - u) / s_j)) / sqrt(s_j), with x, u in
/// samples. Linear (non-circular) correlation via zero padding to 2n.
inline CwtGrid cwt_1d(std::span<const double> signal, const Grid1D& grid, std::span<const double> scales,
                      const TemplateSpec& mother = gabor_template()) {
  const std::size_t n = signal.size();
  if (!is_pow2(n)) throw SizeError("cwt_1d: signal length must be a power of two, got " + std::to_string(n));
  if (grid.n != n) throw SizeError("cwt_1d: grid size does not match the signal");
  if (mother.dim != 1) throw std::invalid_argument("cwt_1d: mother wavelet must be one-dimensional");
  if (scales.empty()) throw std::invalid_argument("cwt_1d: no scales");
  for (std::size_t j = 0; j < scales.size(); ++j) {
    if (!(scales[j] >= kMinCwtScale))
      throw RangeError("cwt_1d: scale " + std::to_string(scales[j]) + " is below the minimum resolvable scale of " +
                       std::to_string(kMinCwtScale) + " samples");
    if (j > 0 && !(scales[j] > scales[j - 1])) throw std::invalid_argument("cwt_1d: scales must increase");
  }

  CwtGrid out{{scales.begin(), scales.end()}, CMatrix(scales.size(), n), mother, grid, 0.0};
  for (double v : signal) out.signal_peak = std::max(out.signal_peak, std::abs(v));

  const std::size_t m = 2 * n;
  std::vector<Cplx> fpad(m);
  std::copy(signal.begin(), signal.end(), fpad.begin());
  const auto fhat = fft_1d(std::move(fpad));

  std::vector<Cplx> h(m);
  for (std::size_t j = 0; j < scales.size(); ++j) {
    const double s = scales[j];
    const double norm = 1.0 / std::sqrt(s);
    // h[k] = conj(psi(-k / s)) / sqrt(s) for k in (-n, n), stored modulo 2n.
    std::fill(h.begin(), h.end(), Cplx{});
    for (std::size_t k = 0; k < m; ++k) {
      if (k == n) continue;
      const double kk = k < n ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(m);
      h[k] = std::conj(eval_template(mother, -kk / s)) * norm;
    }
    auto prod = fft_1d(h);
    for (std::size_t k = 0; k < m; ++k) prod[k] *= fhat[k];
    const auto c = fft_1d(std::move(prod), true);
    for (std::size_t u = 0; u < n; ++u) out.coefficients(j, u) = c[u];
  }
  return out;
}

inline CwtGrid cwt_1d(std::span<const double> signal, std::span<const double> scales,
                      const TemplateSpec& mother = gabor_template()) {
  return cwt_1d(signal, Grid1D{0.0, 1.0, signal.size()}, scales, mother);
}

// ---------------------------------------------------------------------------
// Modulus maxima

struct WMMPoint {
  std::array<double, 2> location{};  // signal coordinates; second entry unused in 1D
  double scale = 0.0;                // signal coordinates
  double strength = 0.0;
  double theta = 0.0;                // 2D only, radians
  std::size_t index = 0;             // sample index (1D) or raster index (2D)
};

struct WMMPointSet {
  int dim = 1;
  std::vector<WMMPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Detection thresholds. A finest-scale maximum is kept when its modulus is at
/// least rel_threshold * max|signal| and it chains, within `tolerance` samples
/// per step, through `persistence` consecutive scales.
struct WMMParams {
  std::size_t persistence = 4;
  std::size_t tolerance = 2;
  double rel_threshold = 0.015;
};

inline WMMPointSet wmm_points_1d(const CwtGrid& cwt, const WMMParams& p = {}) {
  const std::size_t levels = cwt.levels(), n = cwt.length();
  if (p.persistence == 0 || p.persistence > levels)
    throw std::invalid_argument("wmm_points_1d: persistence must be in [1, " + std::to_string(levels) + "]");
  WMMPointSet out;
  if (n < 3 || !(cwt.signal_peak > 0.0)) return out;

  std::vector<std::vector<double>> mod(levels, std::vector<double>(n));
  for (std::size_t j = 0; j < levels; ++j)
    for (std::size_t u = 0; u < n; ++u) mod[j][u] = std::abs(cwt.coefficients(j, u));
  const auto is_max = [&](std::size_t j, std::size_t u) {
    return u > 0 && u + 1 < n && mod[j][u] > mod[j][u - 1] && mod[j][u] > mod[j][u + 1];
  };

  const double threshold = p.rel_threshold * cwt.signal_peak;
  std::vector<WMMPoint> found;
  for (std::size_t u = 1; u + 1 < n; ++u) {
    if (!is_max(0, u) || !(mod[0][u] >= threshold) || !(mod[0][u] > 0.0)) continue;
    std::size_t pos = u, chain = 1;
    for (std::size_t j = 1; j < levels && chain < p.persistence; ++j) {
      const std::size_t lo = pos > p.tolerance ? pos - p.tolerance : 0;
      const std::size_t hi = std::min(n - 1, pos + p.tolerance);
      std::size_t best = n;
      for (std::size_t q = lo; q <= hi; ++q) {
        if (!is_max(j, q)) continue;
        const auto dist = [&](std::size_t a) { return a > pos ? a - pos : pos - a; };
        if (best == n || dist(q) < dist(best)) best = q;
      }
      if (best == n) break;
      pos = best;
      ++chain;
    }
    if (chain < p.persistence) continue;
    WMMPoint w;
    w.location[0] = cwt.grid.point(u);
    w.scale = cwt.scales[0] * cwt.grid.spacing();
    w.strength = mod[0][u];
    w.index = u;
    found.push_back(w);
  }

  for (const auto& w : found) {
    if (!out.points.empty() && w.index - out.points.back().index <= p.tolerance) {
      if (w.strength > out.points.back().strength) out.points.back() = w;
      continue;
    }
    out.points.push_back(w);
  }
  return out;
}

inline WMMPointSet wmm_points_1d(const CwtGrid& cwt, std::size_t persistence) {
  WMMParams p;
  p.persistence = persistence;
  return wmm_points_1d(cwt, p);
}

// ---------------------------------------------------------------------------
// Canny edges

struct CannyParams {
  double sigma = 1.4;  // pixels
  double low = 0.1;    // fractions of the maximum gradient magnitude
  double high = 0.25;

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("CannyParams: sigma must be > 0");
    if (!(low > 0.0 && low < high && high <= 1.0))
      throw std::invalid_argument("CannyParams: need 0 < low < high <= 1");
  }
};

struct EdgeMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> mask;  // 1 on edge pixels
  std::vector<double> orientation; // gradient angle atan2(gy, gx), y pointing down the rows
  std::vector<double> magnitude;   // smoothed Sobel gradient magnitude

  std::size_t count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }
  bool at(std::size_t x, std::size_t y) const { return mask[y * width + x] != 0; }
};

inline EdgeMap canny_edges(const Image& image, const CannyParams& params = {}) {
  params.validate();
  if (image.width < 16 || image.height < 16) throw SizeError("canny_edges: image must be at least 16x16");
  if (image.pixels.size() != image.width * image.height) throw SizeError("canny_edges: pixel buffer size mismatch");
  const std::size_t w = image.width, h = image.height, n = w * h;
  EdgeMap e{w, h, std::vector<std::uint8_t>(n, 0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  const Image s = gaussian_blur(image, params.sigma);
  const auto px = [&](long x, long y) {
    return s(static_cast<std::size_t>(std::clamp(x, 0L, static_cast<long>(w) - 1)),
             static_cast<std::size_t>(std::clamp(y, 0L, static_cast<long>(h) - 1)));
  };
  double gmax = 0.0, imax = 0.0;
  for (double v : image.pixels) imax = std::max(imax, std::abs(v));
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const long X = static_cast<long>(x), Y = static_cast<long>(y);
      const double gx = (px(X + 1, Y - 1) + 2 * px(X + 1, Y) + px(X + 1, Y + 1)) -
                        (px(X - 1, Y - 1) + 2 * px(X - 1, Y) + px(X - 1, Y + 1));
      const double gy = (px(X - 1, Y + 1) + 2 * px(X, Y + 1) + px(X + 1, Y + 1)) -
                        (px(X - 1, Y - 1) + 2 * px(X, Y - 1) + px(X + 1, Y - 1));
      const std::size_t i = y * w + x;
      e.magnitude[i] = std::hypot(gx, gy);
      e.orientation[i] = std::atan2(gy, gx);
      gmax = std::max(gmax, e.magnitude[i]);
    }
  // Rounding in the blur of a flat image leaves gradients near machine precision.
  if (!(gmax > 1e-10 * std::max(1.0, imax))) return e;

  std::vector<std::uint8_t> thin(n, 0);
  for (std::size_t y = 1; y + 1 < h; ++y)
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const std::size_t i = y * w + x;
      const double m = e.magnitude[i];
      if (!(m >= params.low * gmax)) continue;
      double a = e.orientation[i] * 180.0 / std::numbers::pi;
      if (a < 0) a += 180.0;
      int dx, dy;
      if (a < 22.5 || a >= 157.5) {
        dx = 1, dy = 0;
      } else if (a < 67.5) {
        dx = 1, dy = 1;
      } else if (a < 112.5) {
        dx = 0, dy = 1;
      } else {
        dx = -1, dy = 1;
      }
      const double fwd = e.magnitude[(y + static_cast<std::size_t>(dy)) * w + static_cast<std::size_t>(static_cast<long>(x) + dx)];
      const double back = e.magnitude[(y - static_cast<std::size_t>(dy)) * w + static_cast<std::size_t>(static_cast<long>(x) - dx)];
      if (m > back && m >= fwd) thin[i] = 1;
    }

  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (thin[i] && e.magnitude[i] >= params.high * gmax) {
      e.mask[i] = 1;
      queue.push_back(i);
    }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const long x = static_cast<long>(i % w), y = static_cast<long>(i / w);
    for (long dy = -1; dy <= 1; ++dy)
      for (long dx = -1; dx <= 1; ++dx) {
        const long X = x + dx, Y = y + dy;
        if (X < 0 || Y < 0 || X >= static_cast<long>(w) || Y >= static_cast<long>(h)) continue;
        const std::size_t j = static_cast<std::size_t>(Y) * w + static_cast<std::size_t>(X);
        if (thin[j] && !e.mask[j]) {
          e.mask[j] = 1;
          queue.push_back(j);
        }
      }
  }
  return e;
}

/// Exactly m edge pixels taken at a uniform stride through the raster-ordered
/// edge list, as WMM points in the grid's coordinates. Pixels repeat when the
/// mask holds fewer than m edges.
inline WMMPointSet edge_points(const EdgeMap& edges, const Grid2D& grid, std::size_t m) {
  if (grid.x.n != edges.width || grid.y.n != edges.height) throw SizeError("edge_points: grid does not match the mask");
  std::vector<std::size_t> list;
  for (std::size_t i = 0; i < edges.mask.size(); ++i)
    if (edges.mask[i]) list.push_back(i);
  WMMPointSet out;
  out.dim = 2;
  if (list.empty()) return out;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = list[k * list.size() / m];
    WMMPoint p;
    p.location = {grid.x.point(i % edges.width), grid.y.point(i / edges.width)};
    p.scale = grid.x.spacing();
    p.strength = edges.magnitude[i];
    p.theta = edges.orientation[i];
    p.index = i;
    out.points.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Initialization

/// Axis-aligned signal domain.
struct Domain {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  bool contains(std::span<const double> r) const {
    for (int i = 0; i < dim; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!(r[k] >= lo[k] && r[k] <= hi[k])) return false;
    }
    return true;
  }
};

/// Everything needed to build a network. Network inputs are coord_scale times
/// the signal coordinates.
struct InitArch {
  TemplateSpec tmpl = gabor_template();
  WeightConstraint constraint = WeightConstraint::ScaleOnly;
  std::size_t first_width = 1;
  std::vector<std::size_t> hidden_widths{32, 32};
  ActivationSpec activation = ActivationSpec::alternating_cubic();
  double coord_scale = 1.0;
  Domain domain;
};

namespace detail {

inline void place_atom(FirstLayer& f, std::size_t t, std::span<const double> center, double scale,
                       double coord_scale) {
  if (f.constraint() != WeightConstraint::UnitWeights) f.set_scale(t, scale);
  std::array<double, 2> c{};
  for (std::size_t i = 0; i < center.size(); ++i) c[i] = coord_scale * center[i];
  f.center_at(t, std::span<const double>(c.data(), center.size()));
}

}  // namespace detail

/// Atom centers uniform on the domain, scales uniform on [1, K].
inline FirstLayer random_initialize(const InitArch& arch, std::size_t K, std::uint64_t seed) {
  if (K == 0) throw std::invalid_argument("random_initialize: K must be >= 1");
  if (arch.domain.dim != arch.tmpl.dim) throw std::invalid_argument("random_initialize: domain/template dimension mismatch");
  FirstLayer f(arch.tmpl, arch.constraint, arch.first_width);
  auto rng = Rng::stream(seed, "first-layer");
  const auto d = static_cast<std::size_t>(arch.tmpl.dim);
  for (std::size_t t = 0; t < f.atoms(); ++t) {
    std::array<double, 2> c{};
    for (std::size_t i = 0; i < d; ++i) c[i] = rng.uniform(arch.domain.lo[i], arch.domain.hi[i]);
    const double s = rng.uniform(1.0, static_cast<double>(K));
    detail::place_atom(f, t, std::span<const double>(c.data(), d), s, arch.coord_scale);
  }
  return f;
}

/// K atoms centred on each WMM point, scales uniform on [1, K]. Falls back to
/// random_initialize when the set is empty, reporting through `warning`.
inline FirstLayer wmm_initialize(const InitArch& arch, const WMMPointSet& wmm, std::size_t K, std::uint64_t seed,
                                 std::string* warning = nullptr) {
  if (K == 0) throw std::invalid_argument("wmm_initialize: K must be >= 1");
  if (wmm.empty()) {
    if (warning) *warning = "no WMM points detected; using random initialization";
    return random_initialize(arch, K, seed);
  }
  if (wmm.dim != arch.tmpl.dim) throw std::invalid_argument("wmm_initialize: WMM/template dimension mismatch");
  if (arch.first_width != K * wmm.size())
    throw SizeError("wmm_initialize: first width " + std::to_string(arch.first_width) + " != K * m = " +
                    std::to_string(K * wmm.size()));
  FirstLayer f(arch.tmpl, arch.constraint, arch.first_width);
  auto rng = Rng::stream(seed, "first-layer");
  const auto d = static_cast<std::size_t>(arch.tmpl.dim);
  for (std::size_t p = 0; p < wmm.size(); ++p)
    for (std::size_t k = 0; k < K; ++k) {
      const double s = rng.uniform(1.0, static_cast<double>(K));
      detail::place_atom(f, p * K + k, std::span<const double>(wmm.points[p].location.data(), d), s,
                         arch.coord_scale);
    }
  return f;
}

/// Hidden and output parameters uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)]
/// per real and imaginary component. Depends only on the seed and widths.
inline void initialize_dense_layers(INRModel& m, std::uint64_t seed) {
  auto rng = Rng::stream(seed, "dense-layers");
  const auto fill = [&](std::span<Cplx> v, std::size_t fan_in) {
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& z : v) {
      const double re = rng.uniform(-a, a);
      z = {re, rng.uniform(-a, a)};
    }
  };
  for (auto& h : m.hidden) {
    fill(h.weights.data(), h.weights.cols());
    fill(h.bias, h.weights.cols());
  }
  fill(m.output.weights.data(), m.output.weights.cols());
  fill(std::span<Cplx>(&m.output.bias, 1), m.output.weights.cols());
}

inline INRModel build_model(const InitArch& arch, FirstLayer first, std::uint64_t seed) {
  auto m = make_model(arch.tmpl, arch.constraint, first.atoms(), arch.hidden_widths, arch.activation);
  m.first = std::move(first);
  initialize_dense_layers(m, seed);
  m.validate();
  return m;
}

}  // namespace winr
