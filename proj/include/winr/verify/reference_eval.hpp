#pragma once

// Extended-precision re-evaluation of a model and its loss, used as the
// finite-difference oracle for gradient checks. Kept independent of the
// batched training engine.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "winr/model.hpp"
#include "winr/training.hpp"

namespace winr::verify {

using Real = long double;
using CReal = std::complex<Real>;

inline CReal reference_template(const TemplateSpec& s, std::span<const Real> x) {
  const Real pi = std::numbers::pi_v<Real>;
  const Real x0 = x[0];
  const Real x1 = s.dim == 2 ? x[1] : Real(0);
  const Real sig = s.sigma;
  switch (s.kind) {
    case TemplateKind::Gaussian: return std::exp(-(x0 * x0 + x1 * x1) / (2 * sig * sig));
    case TemplateKind::Gabor:
      return std::exp(-(x0 * x0 + x1 * x1) / (2 * sig * sig)) * std::polar(Real(1), -2 * pi * Real(s.omega) * x0);
    case TemplateKind::ComplexSinusoid: return std::polar(Real(1), -2 * pi * Real(s.omega) * x0);
    case TemplateKind::Meyer: {
      const Cplx m = MeyerTable::instance().value(static_cast<double>(x0));
      const Real g = s.dim == 2 ? std::exp(-x1 * x1 / (2 * sig * sig)) : Real(1);
      return CReal(m.real(), m.imag()) * g;
    }
    case TemplateKind::Bump: {
      const Real r = s.radius;
      const Real t = (x0 * x0 + x1 * x1) / (r * r);
      return t < 1 ? std::exp(1 + 1 / (t - 1)) : Real(0);
    }
  }
  return 0;
}

inline CReal reference_activation(const ActivationSpec& a, CReal z) {
  switch (a.kind) {
    case ActivationKind::Identity: return z;
    case ActivationKind::ComplexSine: return std::sin(Real(a.scale) * z);
    case ActivationKind::Polynomial: {
      CReal acc(a.coeffs.back().real(), a.coeffs.back().imag());
      for (std::size_t k = a.coeffs.size() - 1; k-- > 0;) acc = acc * z + CReal(a.coeffs[k].real(), a.coeffs[k].imag());
      return acc;
    }
  }
  return z;
}

inline CReal reference_forward(const INRModel& m, std::span<const double> r) {
  const auto d = static_cast<std::size_t>(m.dim());
  const auto& f = m.first;
  std::vector<CReal> z(f.atoms());
  std::vector<Real> arg(d);
  for (std::size_t t = 0; t < f.atoms(); ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      Real acc = f.bias(t, i);
      for (std::size_t j = 0; j < d; ++j) {
        Real w = f.weight(t, i, j);
        if (f.constraint() == WeightConstraint::ScaleOnly) w = i == j ? std::exp(Real(f.log_scale(t, i))) : Real(0);
        acc += w * Real(r[j]);
      }
      arg[i] = acc;
    }
    z[t] = reference_template(f.template_spec(), arg);
  }
  for (const auto& h : m.hidden) {
    std::vector<CReal> next(h.weights.rows());
    for (std::size_t i = 0; i < next.size(); ++i) {
      CReal s(h.bias[i].real(), h.bias[i].imag());
      for (std::size_t j = 0; j < z.size(); ++j) s += CReal(h.weights(i, j).real(), h.weights(i, j).imag()) * z[j];
      next[i] = reference_activation(h.activation, s);
    }
    z = std::move(next);
  }
  CReal out(m.output.bias.real(), m.output.bias.imag());
  for (std::size_t j = 0; j < z.size(); ++j)
    out += CReal(m.output.weights(0, j).real(), m.output.weights(0, j).imag()) * z[j];
  return out;
}

/// Real-part MSE of the summed outputs, in extended precision.
inline Real reference_loss(std::span<const INRModel* const> nets, const Dataset& data) {
  Real s = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    CReal out = 0;
    for (const auto* m : nets) out += reference_forward(*m, data.point(i));
    const Real e = out.real() - Real(data.targets[i]);
    s += e * e;
  }
  return s / Real(data.size());
}

inline Real reference_loss(const INRModel& m, const Dataset& data) {
  const INRModel* nets[] = {&m};
  return reference_loss(nets, data);
}

/// Central difference of the loss along packed parameter k.
inline double finite_difference(const INRModel& m, const Dataset& data, std::size_t k, double h = 1e-6) {
  const auto base = pack_parameters(m);
  auto plus = base, minus = base;
  plus[k] += h;
  minus[k] -= h;
  INRModel mp = m, mm = m;
  unpack_parameters(mp, plus);
  unpack_parameters(mm, minus);
  const Real step = Real(plus[k]) - Real(minus[k]);
  return static_cast<double>((reference_loss(mp, data) - reference_loss(mm, data)) / step);
}

struct GradientCheck {
  std::size_t checked = 0;
  std::size_t worst_index = 0;
  double worst_rel = 0.0;
};

/// Compares analytic gradients with central differences on every coordinate
/// whose analytic magnitude exceeds `floor`.
inline GradientCheck check_gradients(const INRModel& m, const Dataset& data, double floor = 1e-8) {
  const auto g = backward(m, data).flatten();
  GradientCheck out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (std::abs(g[k]) <= floor) continue;
    const double fd = finite_difference(m, data, k);
    const double rel = std::abs(g[k] - fd) / std::abs(fd == 0.0 ? g[k] : fd);
    ++out.checked;
    if (rel > out.worst_rel) {
      out.worst_rel = rel;
      out.worst_index = k;
    }
  }
  return out;
}

}  // namespace winr::verify
