#pragma once

// Cone containment of spectra: progressivity checks, analytic-signal
// consistency, product closure, split decoupling and the two-cone
// construction with four gaussian x Meyer atoms.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "winr/model.hpp"
#include "winr/numerics.hpp"
#include "winr/spectrum.hpp"
#include "winr/templates.hpp"

namespace winr {

enum class ConeKind { HalfLine, Cone2D };

/// A closed half-line (1D) or closed 2D cone, both containing the origin, or
/// a weakly conic set: the same cone truncated to |xi| >= r_min.
struct ConeSpec {
  ConeKind kind = ConeKind::HalfLine;
  int sign = 1;                                 // HalfLine
  double center = 0.0;                          // Cone2D direction, radians
  double half_angle = std::numbers::pi / 2.0;   // Cone2D
  double r_min = 0.0;                           // > 0 for weakly conic

  static ConeSpec half_line(int sign) { return {ConeKind::HalfLine, sign >= 0 ? 1 : -1, 0.0, std::numbers::pi / 2, 0.0}; }
  static ConeSpec cone2d(double center, double half_angle) { return {ConeKind::Cone2D, 1, center, half_angle, 0.0}; }
  static ConeSpec weakly_conic(ConeSpec base, double r_min) {
    base.r_min = r_min;
    base.validate();
    return base;
  }

  bool weakly() const noexcept { return r_min > 0.0; }
  int dim() const noexcept { return kind == ConeKind::HalfLine ? 1 : 2; }

  void validate() const {
    if (kind == ConeKind::Cone2D && !(half_angle > 0.0 && half_angle <= std::numbers::pi / 2 + 1e-15))
      throw std::invalid_argument("ConeSpec: half-angle must lie in (0, pi/2]");
    if (r_min < 0.0) throw std::invalid_argument("ConeSpec: r_min must be >= 0");
  }

  /// `slack` relaxes the radial and angular bounds by that relative amount.
  bool contains(double x0, double x1 = 0.0, double slack = 0.0) const {
    const double r = std::hypot(x0, x1);
    if (weakly() && r < r_min * (1.0 - slack)) return false;
    if (kind == ConeKind::HalfLine) return sign * x0 >= 0.0;
    if (r == 0.0) return true;
    double d = std::remainder(std::atan2(x1, x0) - center, 2.0 * std::numbers::pi);
    return std::abs(d) <= half_angle * (1.0 + slack);
  }

  std::string describe() const {
    std::string s = kind == ConeKind::HalfLine ? std::string("half_line(") + (sign > 0 ? "+" : "-") + ")"
                                               : "cone2d(center=" + std::to_string(center) +
                                                     ", half_angle=" + std::to_string(half_angle) + ")";
    if (weakly()) s = "weakly_conic(" + s + ", r_min=" + std::to_string(r_min) + ")";
    return s;
  }
};

class UndefinedFractionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Measurement

namespace detail {

inline void apply_window_1d(std::vector<Cplx>& v, const Grid1D& g, const TemplateSpec& w) {
  const double c = 0.5 * (g.lo + g.hi);
  for (std::size_t i = 0; i < g.n; ++i) v[i] *= eval_template(w, g.point(i) - c);
}

inline void apply_window_2d(std::vector<Cplx>& v, const Grid2D& g, const TemplateSpec& w) {
  const double cx = 0.5 * (g.x.lo + g.x.hi), cy = 0.5 * (g.y.lo + g.y.hi);
  for (std::size_t iy = 0; iy < g.y.n; ++iy)
    for (std::size_t ix = 0; ix < g.x.n; ++ix) {
      const std::array<double, 2> p{g.x.point(ix) - cx, g.y.point(iy) - cy};
      v[iy * g.x.n + ix] *= eval_template(w, p);
    }
}

inline std::string window_label(const std::optional<TemplateSpec>& w) {
  if (!w) return "none";
  return to_string(w->kind) + "(radius=" + std::to_string(w->radius) + ")";
}

inline void check_window(const std::optional<TemplateSpec>& w, int dim) {
  if (w && (w->kind != TemplateKind::Bump || w->dim != dim))
    throw std::invalid_argument("measure_spectrum: window must be a bump of matching dimension");
}

/// Largest first-order frequency among the model's atoms.
inline double atom_frequency_extent(const INRModel& m) {
  const auto box = fourier_support(m.first.template_spec()).effective_box;
  const int d = m.dim();
  double out = 0.0;
  for (std::size_t t = 0; t < m.first.atoms(); ++t)
    for (double u : {box.lo[0], box.hi[0]})
      for (double v : {box.lo[1], box.hi[1]})
        for (int j = 0; j < d; ++j) {
          double p = m.first.weight(t, 0, static_cast<std::size_t>(j)) * u;
          if (d == 2) p += m.first.weight(t, 1, static_cast<std::size_t>(j)) * v;
          out = std::max(out, std::abs(p));
        }
  return out;
}

}  // namespace detail

/// Spectrum of sampled values, optionally multiplied by a bump window centred
/// on the grid.
inline SpectrumReport measure_spectrum(std::span<const Cplx> samples, const Grid1D& grid,
                                       const std::optional<TemplateSpec>& window = std::nullopt) {
  detail::check_window(window, 1);
  std::vector<Cplx> v(samples.begin(), samples.end());
  if (v.size() != grid.n) throw SizeError("measure_spectrum: sample count != grid.n");
  if (window) detail::apply_window_1d(v, grid, *window);
  auto rep = sampled_spectrum(v, grid);
  rep.window = detail::window_label(window);
  return rep;
}

inline SpectrumReport measure_spectrum(std::span<const Cplx> samples, const Grid2D& grid,
                                       const std::optional<TemplateSpec>& window = std::nullopt) {
  detail::check_window(window, 2);
  std::vector<Cplx> v(samples.begin(), samples.end());
  if (v.size() != grid.size()) throw SizeError("measure_spectrum: sample count != grid size");
  if (window) detail::apply_window_2d(v, grid, *window);
  auto rep = sampled_spectrum(v, grid);
  rep.window = detail::window_label(window);
  return rep;
}

/// Model output on the grid. Sets `warning` when an atom's effective band
/// already exceeds the grid's Nyquist frequency.
template <class G>
SpectrumReport measure_spectrum(const INRModel& model, const G& grid,
                                const std::optional<TemplateSpec>& window = std::nullopt) {
  const auto values = forward_batch(model, grid);
  auto rep = measure_spectrum(std::span<const Cplx>(values), grid, window);
  double nyq;
  if constexpr (std::is_same_v<G, Grid1D>)
    nyq = grid.nyquist();
  else
    nyq = std::min(grid.x.nyquist(), grid.y.nyquist());
  if (detail::atom_frequency_extent(model) > nyq)
    rep.warning = "grid Nyquist frequency " + std::to_string(nyq) + " is below the atoms' effective band";
  return rep;
}

inline double cone_energy_fraction(const SpectrumReport& rep, const ConeSpec& cone) {
  cone.validate();
  if (cone.dim() != rep.dim) throw SizeError("cone_energy_fraction: cone/report dimension mismatch");
  if (!(rep.total_energy > 0.0)) throw UndefinedFractionError("cone_energy_fraction: spectrum has zero energy");
  double in = 0.0;
  for (std::size_t i = 0; i < rep.size(); ++i)
    if (cone.contains(rep.fx(i), rep.fy(i))) in += rep.energy(i);
  return in / rep.total_energy;
}

/// Energy fraction strictly inside |xi| < radius.
inline double disk_energy_fraction(const SpectrumReport& rep, double radius) {
  if (!(rep.total_energy > 0.0)) throw UndefinedFractionError("disk_energy_fraction: spectrum has zero energy");
  double in = 0.0;
  for (std::size_t i = 0; i < rep.size(); ++i)
    if (std::hypot(rep.fx(i), rep.fy(i)) < radius) in += rep.energy(i);
  return in / rep.total_energy;
}

/// Energy fraction inside a union of cones.
inline double cones_energy_fraction(const SpectrumReport& rep, std::span<const ConeSpec> cones) {
  if (!(rep.total_energy > 0.0)) throw UndefinedFractionError("cones_energy_fraction: spectrum has zero energy");
  double in = 0.0;
  for (std::size_t i = 0; i < rep.size(); ++i)
    for (const auto& c : cones)
      if (c.contains(rep.fx(i), rep.fy(i))) {
        in += rep.energy(i);
        break;
      }
  return in / rep.total_energy;
}

// ---------------------------------------------------------------------------
// Progressivity

/// Corners of W_t^T applied to the template's effective box.
inline std::vector<std::array<double, 2>> atom_box_corners(const FirstLayer& first, std::size_t t) {
  const auto box = fourier_support(first.template_spec()).effective_box;
  std::vector<std::array<double, 2>> out;
  if (first.dim() == 1) {
    const double w = first.weight(t, 0, 0);
    out.push_back({w * box.lo[0], 0.0});
    out.push_back({w * box.hi[0], 0.0});
    return out;
  }
  for (double u : {box.lo[0], box.hi[0]})
    for (double v : {box.lo[1], box.hi[1]})
      out.push_back({first.weight(t, 0, 0) * u + first.weight(t, 1, 0) * v,
                     first.weight(t, 0, 1) * u + first.weight(t, 1, 1) * v});
  return out;
}

namespace detail {

inline double segment_distance_to_origin(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  const double s = len2 > 0 ? std::clamp(-(a[0] * dx + a[1] * dy) / len2, 0.0, 1.0) : 0.0;
  return std::hypot(a[0] + s * dx, a[1] + s * dy);
}

/// Smallest |xi| over the image of the effective box (a parallelogram in 2D).
inline double min_radius(const std::vector<std::array<double, 2>>& c) {
  if (c.size() == 2) {
    if (c[0][0] * c[1][0] <= 0) return 0.0;
    return std::min(std::abs(c[0][0]), std::abs(c[1][0]));
  }
  // Corner order (lo,lo), (lo,hi), (hi,lo), (hi,hi) -> perimeter 0,1,3,2.
  const std::array<std::size_t, 5> ring{0, 1, 3, 2, 0};
  double sign = 0.0;
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& a = c[ring[k]];
    const auto& b = c[ring[k + 1]];
    const double cross = a[0] * b[1] - a[1] * b[0];
    if (cross != 0.0) {
      if (sign == 0.0) sign = cross;
      if (cross * sign < 0) inside = false;
    }
    best = std::min(best, segment_distance_to_origin(a, b));
  }
  return inside ? 0.0 : best;
}

}  // namespace detail

enum class ProgressivityStatus { Pass, Fail, HypothesisViolated };

struct ProgressivityReport {
  ProgressivityStatus status = ProgressivityStatus::Fail;
  double fraction = 0.0;  // energy inside the cone
  double outside = 1.0;   // 1 - fraction
  std::vector<std::size_t> violating_atoms;
  std::string message;

  bool passed() const noexcept { return status == ProgressivityStatus::Pass; }
};

/// Checks the geometric hypothesis (every atom's effective band, mapped by
/// W_t^T, lies in the cone), then that at most `tol` of the output energy
/// falls outside the cone. An optional bump window suppresses leakage from
/// truncating slowly decaying atoms at the grid edge.
template <class G>
ProgressivityReport progressivity_check(const INRModel& model, const G& grid, const ConeSpec& cone, double tol,
                                        const std::optional<TemplateSpec>& window = std::nullopt) {
  cone.validate();
  ProgressivityReport r;
  constexpr double slack = 1e-12;
  for (std::size_t t = 0; t < model.first.atoms(); ++t) {
    const auto corners = atom_box_corners(model.first, t);
    bool ok = true;
    for (const auto& c : corners) ok = ok && cone.contains(c[0], c[1], slack);
    if (ok && cone.weakly()) ok = detail::min_radius(corners) >= cone.r_min * (1.0 - slack);
    if (!ok) r.violating_atoms.push_back(t);
  }
  const auto rep = measure_spectrum(model, grid, window);
  r.fraction = cone_energy_fraction(rep, cone);
  r.outside = 1.0 - r.fraction;
  if (!r.violating_atoms.empty()) {
    r.status = ProgressivityStatus::HypothesisViolated;
    r.message = "atom";
    for (auto t : r.violating_atoms) r.message += " " + std::to_string(t);
    r.message += " maps its effective band outside " + cone.describe();
    return r;
  }
  r.status = r.outside <= tol ? ProgressivityStatus::Pass : ProgressivityStatus::Fail;
  r.message = "energy outside " + cone.describe() + ": " + std::to_string(r.outside);
  return r;
}

/// ||Im f + H(Re f)||_2 / ||f||_2 on a 1D grid. H is the discrete Hilbert
/// transform; the minus sign matches the e^{-i 2 pi x} orientation of the
/// complex templates, for which Im f = -H(Re f).
inline double analytic_signal_consistency(const INRModel& model, const Grid1D& grid) {
  if (model.dim() != 1) throw SizeError("analytic_signal_consistency: 1D models only");
  const auto f = forward_batch(model, grid);
  std::vector<double> re(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) re[i] = f[i].real();
  const auto analytic = hilbert_transform(re);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i].imag() + analytic[i].imag();
    num += d * d;
    den += std::norm(f[i]);
  }
  if (!(den > 0.0)) throw UndefinedFractionError("analytic_signal_consistency: zero output");
  return std::sqrt(num / den);
}

/// Energy fraction of the spectrum of f*g outside `cone`.
template <class G>
double product_energy_outside(std::span<const Cplx> f, std::span<const Cplx> g, const G& grid, const ConeSpec& cone) {
  if (f.size() != g.size()) throw SizeError("product_energy_outside: length mismatch");
  std::vector<Cplx> p(f.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = f[i] * g[i];
  return 1.0 - cone_energy_fraction(measure_spectrum(std::span<const Cplx>(p), grid), cone);
}

// ---------------------------------------------------------------------------
// Split decoupling

struct DecouplingReport {
  double crossover = 0.0;      // cyclic frequency in network input units
  double scaling_above = 0.0;  // scaling-network energy fraction at |xi| > crossover
  double gabor_below = 0.0;    // wavelet-network energy fraction at |xi| < crossover
};

/// Crossover = wavelet template frequency * smallest first-layer scale / 2.
/// Both outputs have their mean removed so the split of the constant between
/// the two networks does not enter the fractions.
inline DecouplingReport split_decoupling(const SplitModel& split, const Grid1D& grid) {
  const auto& tg = split.gabor.first.template_spec();
  double wmin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < split.gabor.first.atoms(); ++t)
    wmin = std::min(wmin, std::abs(split.gabor.first.weight(t, 0, 0)));
  DecouplingReport r;
  r.crossover = tg.omega * wmin / 2.0;
  const auto fraction = [&](const INRModel& m, bool above) {
    auto v = forward_batch(m, grid);
    Cplx mean = 0.0;
    for (const auto& z : v) mean += z;
    mean /= static_cast<double>(v.size());
    for (auto& z : v) z -= mean;
    const auto rep = measure_spectrum(std::span<const Cplx>(v), grid);
    if (!(rep.total_energy > 0.0)) return 0.0;
    double e = 0.0;
    for (std::size_t i = 0; i < rep.size(); ++i)
      if ((std::abs(rep.fx(i)) > r.crossover) == above) e += rep.energy(i);
    return e / rep.total_energy;
  };
  r.scaling_above = fraction(split.scaling, true);
  r.gabor_below = fraction(split.gabor, false);
  return r;
}

// ---------------------------------------------------------------------------
// Two-cone construction

struct Fig3Params {
  double group_x = 2.5;                     // groups centred at (-group_x, +-spread), (group_x, +-spread)
  double spread = 1.0;
  std::array<double, 2> directions{std::numbers::pi / 3, 2 * std::numbers::pi / 3};
  std::array<double, 2> scales{2.0, 2.5};   // per atom within a group
  double cross_sigma = 2.0;
  double half_width = 6.0;                  // grid [-half_width, half_width)^2
  std::size_t n = 512;
  double dilation = 1.25;
};

struct Fig3Result {
  INRModel model;
  SpectrumReport pre;   // sum of atoms
  SpectrumReport post;  // after rho(z) = -z + z^2 - z^3
  std::array<ConeSpec, 2> cones;          // weakly conic bounds of the two groups
  std::array<ConeSpec, 2> dilated_cones;  // half-angles scaled by `dilation`
  double r_min = 0.0;
  double low_frequency_fraction = 0.0;    // post energy with |xi| < 0.9 r_min
  double dilated_cone_fraction = 0.0;     // post energy inside the dilated cones
  double atom_box_fraction = 0.0;         // pre energy inside the atoms' effective boxes
};

/// Four Meyer x gaussian atoms in two spatial groups, one oscillation
/// direction per group, summed and passed through rho.
inline Fig3Result fig3_construction(const Fig3Params& p = {}) {
  const auto tmpl = TemplateSpec::meyer(2, p.cross_sigma);
  Fig3Result out;
  auto& m = out.model;
  m = make_model(tmpl, WeightConstraint::Free, 4, {1}, ActivationSpec::alternating_cubic());
  const double gx[2] = {-p.group_x, p.group_x};
  const double gy[2] = {p.spread, -p.spread};
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t a = 0; a < 2; ++a) {
      const std::size_t t = 2 * g + a;
      const double th = p.directions[g], s = p.scales[a];
      // First argument runs along the oscillation direction.
      m.first.set_weight(t, 0, 0, s * std::cos(th));
      m.first.set_weight(t, 0, 1, s * std::sin(th));
      m.first.set_weight(t, 1, 0, -s * std::sin(th));
      m.first.set_weight(t, 1, 1, s * std::cos(th));
      const std::array<double, 2> c{gx[g], gy[a]};
      m.first.center_at(t, c);
    }
  for (auto& w : m.hidden[0].weights.data()) w = 1.0;
  m.output.weights(0, 0) = 1.0;
  m.validate();

  const Grid2D grid{{-p.half_width, p.half_width, p.n}, {-p.half_width, p.half_width, p.n}};
  auto linear = m;
  linear.hidden[0].activation = ActivationSpec::identity();
  out.pre = measure_spectrum(linear, grid);
  out.pre.label = "sum of atoms";
  out.post = measure_spectrum(m, grid);
  out.post.label = "rho(sum of atoms)";

  out.r_min = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < 2; ++g) {
    double half = 0.0;
    for (std::size_t a = 0; a < 2; ++a) {
      const auto corners = atom_box_corners(m.first, 2 * g + a);
      for (const auto& c : corners)
        half = std::max(half, std::abs(std::remainder(std::atan2(c[1], c[0]) - p.directions[g], 2 * std::numbers::pi)));
      out.r_min = std::min(out.r_min, detail::min_radius(corners));
    }
    out.cones[g] = ConeSpec::cone2d(p.directions[g], half);
    out.dilated_cones[g] = ConeSpec::cone2d(p.directions[g], std::min(half * p.dilation, std::numbers::pi / 2));
  }
  for (auto* set : {&out.cones, &out.dilated_cones})
    for (auto& c : *set) c.r_min = out.r_min;

  out.low_frequency_fraction = disk_energy_fraction(out.post, 0.9 * out.r_min);
  // Containment is judged on direction only; the radial bound is checked separately.
  std::array<ConeSpec, 2> directional = out.dilated_cones;
  for (auto& c : directional) c.r_min = 0.0;
  out.dilated_cone_fraction = cones_energy_fraction(out.post, directional);

  const auto box = fourier_support(tmpl).effective_box;
  double in = 0.0;
  for (std::size_t i = 0; i < out.pre.size(); ++i) {
    const double fx = out.pre.fx(i), fy = out.pre.fy(i);
    for (std::size_t t = 0; t < 4; ++t) {
      // xi = W^T u, so test u = W^{-T} xi against the template box.
      const double a = m.first.weight(t, 0, 0), b = m.first.weight(t, 0, 1);
      const double c = m.first.weight(t, 1, 0), d = m.first.weight(t, 1, 1);
      const double det = a * d - b * c;
      if (box.contains((d * fx - c * fy) / det, (-b * fx + a * fy) / det)) {
        in += out.pre.energy(i);
        break;
      }
    }
  }
  out.atom_box_fraction = in / out.pre.total_energy;
  return out;
}

}  // namespace winr
