#pragma once

// The INR
//   z0(r)  = psi(W_t r + b_t),            t = 1..F1
//   z_l(r) = rho_l(W_l z_{l-1}(r) + b_l), l = 1..L-1
//   f(r)   = W_L z_{L-1}(r) + b_L
// and the split model (scaling network + wavelet network).

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "winr/numerics.hpp"
#include "winr/templates.hpp"

namespace winr {

enum class ActivationKind { Polynomial, ComplexSine, Identity };

struct ActivationSpec {
  ActivationKind kind = ActivationKind::Identity;
  std::vector<Cplx> coeffs;  // Polynomial: coeffs[k] multiplies z^k
  double scale = 1.0;        // ComplexSine: sin(scale z)

  static ActivationSpec identity() { return {}; }
  static ActivationSpec polynomial(std::vector<Cplx> c) {
    ActivationSpec a{ActivationKind::Polynomial, std::move(c), 1.0};
    a.validate();
    return a;
  }
  static ActivationSpec complex_sine(double scale) { return {ActivationKind::ComplexSine, {}, scale}; }
  /// rho(z) = -z + z^2 - z^3.
  static ActivationSpec alternating_cubic() { return polynomial({0.0, -1.0, 1.0, -1.0}); }

  void validate() const {
    if (kind != ActivationKind::Polynomial) return;
    if (coeffs.size() < 2) throw std::invalid_argument("ActivationSpec: polynomial degree must be >= 1");
    if (coeffs.back() == Cplx{}) throw std::invalid_argument("ActivationSpec: leading coefficient is zero");
  }

  /// Polynomial degree; 1 for the identity, 0 when not a polynomial.
  std::size_t degree() const {
    switch (kind) {
      case ActivationKind::Polynomial: return coeffs.size() - 1;
      case ActivationKind::Identity: return 1;
      case ActivationKind::ComplexSine: return 0;
    }
    return 0;
  }

  Cplx operator()(Cplx z) const {
    switch (kind) {
      case ActivationKind::Polynomial: {
        Cplx acc = coeffs.back();
        for (std::size_t k = coeffs.size() - 1; k-- > 0;) acc = acc * z + coeffs[k];
        return acc;
      }
      case ActivationKind::ComplexSine: return std::sin(scale * z);
      case ActivationKind::Identity: return z;
    }
    return z;
  }

  Cplx derivative(Cplx z) const {
    switch (kind) {
      case ActivationKind::Polynomial: {
        const std::size_t deg = coeffs.size() - 1;
        Cplx acc = static_cast<double>(deg) * coeffs[deg];
        for (std::size_t k = deg - 1; k >= 1; --k) acc = acc * z + static_cast<double>(k) * coeffs[k];
        return acc;
      }
      case ActivationKind::ComplexSine: return scale * std::cos(scale * z);
      case ActivationKind::Identity: return 1.0;
    }
    return 1.0;
  }

  friend bool operator==(const ActivationSpec&, const ActivationSpec&) = default;
};

enum class WeightConstraint { Free, ScaleOnly, UnitWeights };

inline std::string to_string(WeightConstraint c) {
  switch (c) {
    case WeightConstraint::Free: return "free";
    case WeightConstraint::ScaleOnly: return "scale_only";
    case WeightConstraint::UnitWeights: return "unit_weights";
  }
  return "unknown";
}

inline WeightConstraint weight_constraint_from_string(const std::string& s) {
  if (s == "free") return WeightConstraint::Free;
  if (s == "scale_only") return WeightConstraint::ScaleOnly;
  if (s == "unit_weights") return WeightConstraint::UnitWeights;
  throw std::invalid_argument("unknown weight constraint '" + s + "'");
}

/// Template atoms psi(W_t r + b_t). Each W_t is a d x d real matrix stored
/// row-major. Under ScaleOnly the free parameters are log-scales and
/// W_t = diag(exp(log_scale)); under UnitWeights W_t = I.
class FirstLayer {
 public:
  FirstLayer() = default;
  FirstLayer(TemplateSpec tmpl, WeightConstraint constraint, std::size_t atoms)
      : tmpl_(tmpl), constraint_(constraint), atoms_(atoms) {
    tmpl_.validate();
    if (atoms == 0) throw std::invalid_argument("FirstLayer: need at least one atom");
    const auto d = static_cast<std::size_t>(dim());
    weights_.assign(atoms * d * d, 0.0);
    for (std::size_t t = 0; t < atoms; ++t)
      for (std::size_t i = 0; i < d; ++i) weights_[t * d * d + i * d + i] = 1.0;
    biases_.assign(atoms * d, 0.0);
    if (constraint_ == WeightConstraint::ScaleOnly) log_scales_.assign(atoms * d, 0.0);
  }

  const TemplateSpec& template_spec() const noexcept { return tmpl_; }
  WeightConstraint constraint() const noexcept { return constraint_; }
  std::size_t atoms() const noexcept { return atoms_; }
  int dim() const noexcept { return tmpl_.dim; }

  double weight(std::size_t t, std::size_t i, std::size_t j) const {
    const auto d = static_cast<std::size_t>(dim());
    return weights_[t * d * d + i * d + j];
  }
  double bias(std::size_t t, std::size_t i) const { return biases_[t * static_cast<std::size_t>(dim()) + i]; }
  double log_scale(std::size_t t, std::size_t i) const {
    require(WeightConstraint::ScaleOnly, "log_scale");
    return log_scales_[t * static_cast<std::size_t>(dim()) + i];
  }

  void set_weight(std::size_t t, std::size_t i, std::size_t j, double w) {
    require(WeightConstraint::Free, "set_weight");
    const auto d = static_cast<std::size_t>(dim());
    weights_[t * d * d + i * d + j] = w;
  }
  void set_bias(std::size_t t, std::size_t i, double b) { biases_[t * static_cast<std::size_t>(dim()) + i] = b; }
  void set_log_scale(std::size_t t, std::size_t i, double s) {
    require(WeightConstraint::ScaleOnly, "set_log_scale");
    const auto d = static_cast<std::size_t>(dim());
    log_scales_[t * d + i] = s;
    weights_[t * d * d + i * d + i] = std::exp(s);
  }
  /// Positive scale on the diagonal (ScaleOnly), or scalar multiple of the
  /// identity (Free).
  void set_scale(std::size_t t, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("FirstLayer::set_scale: scale must be positive");
    const auto d = static_cast<std::size_t>(dim());
    if (constraint_ == WeightConstraint::ScaleOnly) {
      for (std::size_t i = 0; i < d; ++i) set_log_scale(t, i, std::log(s));
    } else if (constraint_ == WeightConstraint::Free) {
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) set_weight(t, i, j, i == j ? s : 0.0);
    } else {
      throw std::logic_error("FirstLayer::set_scale: weights are fixed to the identity");
    }
  }
  /// Places atom t so that W_t c + b_t = 0.
  void center_at(std::size_t t, std::span<const double> c) {
    const auto d = static_cast<std::size_t>(dim());
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += weight(t, i, j) * c[j];
      set_bias(t, i, -acc);
    }
  }

  std::span<const double> raw_weights() const noexcept { return weights_; }
  std::span<const double> raw_biases() const noexcept { return biases_; }
  std::span<const double> raw_log_scales() const noexcept { return log_scales_; }

  /// W_t r + b_t.
  void argument(std::size_t t, std::span<const double> r, std::span<double> out) const {
    const auto d = static_cast<std::size_t>(dim());
    for (std::size_t i = 0; i < d; ++i) {
      double acc = bias(t, i);
      for (std::size_t j = 0; j < d; ++j) acc += weight(t, i, j) * r[j];
      out[i] = acc;
    }
  }

  double determinant(std::size_t t) const {
    return dim() == 1 ? weight(t, 0, 0)
                      : weight(t, 0, 0) * weight(t, 1, 1) - weight(t, 0, 1) * weight(t, 1, 0);
  }

  void validate() const {
    tmpl_.validate();
    for (std::size_t t = 0; t < atoms_; ++t) {
      if (constraint_ != WeightConstraint::UnitWeights && !(std::abs(determinant(t)) > 1e-12))
        throw std::invalid_argument("FirstLayer: atom " + std::to_string(t) + " has a singular weight");
      if (constraint_ == WeightConstraint::ScaleOnly)
        for (int i = 0; i < dim(); ++i)
          if (!(weight(t, static_cast<std::size_t>(i), static_cast<std::size_t>(i)) > 0.0))
            throw std::invalid_argument("FirstLayer: non-positive scale at atom " + std::to_string(t));
    }
  }

  friend bool operator==(const FirstLayer&, const FirstLayer&) = default;

 private:
  void require(WeightConstraint c, const char* what) const {
    if (constraint_ != c)
      throw std::logic_error(std::string("FirstLayer::") + what + " is not available under the " +
                             to_string(constraint_) + " constraint");
  }

  TemplateSpec tmpl_;
  WeightConstraint constraint_ = WeightConstraint::Free;
  std::size_t atoms_ = 0;
  std::vector<double> weights_;
  std::vector<double> biases_;
  std::vector<double> log_scales_;
};

struct DenseLayer {
  CMatrix weights;  // F_{l+1} x F_l
  std::vector<Cplx> bias;
  ActivationSpec activation;
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct OutputLayer {
  CMatrix weights;  // 1 x F_L
  Cplx bias{};
  friend bool operator==(const OutputLayer&, const OutputLayer&) = default;
};

struct INRModel {
  FirstLayer first;
  std::vector<DenseLayer> hidden;
  OutputLayer output;

  int dim() const noexcept { return first.dim(); }
  /// Number of layers L (hidden layers + the output layer).
  std::size_t depth() const noexcept { return hidden.size() + 1; }

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{first.atoms()};
    for (const auto& h : hidden) w.push_back(h.weights.rows());
    w.push_back(1);
    return w;
  }

  void validate() const {
    first.validate();
    std::size_t width = first.atoms();
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      const auto& h = hidden[l];
      if (h.weights.cols() != width || h.bias.size() != h.weights.rows())
        throw SizeError("INRModel: hidden layer " + std::to_string(l + 1) + " shape mismatch");
      h.activation.validate();
      width = h.weights.rows();
    }
    if (output.weights.rows() != 1 || output.weights.cols() != width)
      throw SizeError("INRModel: output layer must be 1 x " + std::to_string(width));
  }

  friend bool operator==(const INRModel&, const INRModel&) = default;
};

/// Builds a model with zero hidden/output parameters and identity-weight atoms.
inline INRModel make_model(const TemplateSpec& tmpl, WeightConstraint constraint, std::size_t atoms,
                           const std::vector<std::size_t>& hidden_widths, const ActivationSpec& act) {
  INRModel m;
  m.first = FirstLayer(tmpl, constraint, atoms);
  std::size_t width = atoms;
  for (auto h : hidden_widths) {
    m.hidden.push_back({CMatrix(h, width), std::vector<Cplx>(h), act});
    width = h;
  }
  m.output.weights = CMatrix(1, width);
  return m;
}

struct ForwardTrace {
  std::vector<double> atom_args;          // F1 x d
  std::vector<std::vector<Cplx>> z;       // z[0] = atoms, z[l] = layer l output
  std::vector<std::vector<Cplx>> preact;  // preact[l-1] = W_l z[l-1] + b_l
  Cplx output;
};

inline Cplx forward(const INRModel& model, std::span<const double> r, ForwardTrace* trace = nullptr) {
  const int d = model.dim();
  if (static_cast<int>(r.size()) != d)
    throw SizeError("forward: point has dimension " + std::to_string(r.size()) + ", model expects " +
                    std::to_string(d));
  const auto& first = model.first;
  const std::size_t f1 = first.atoms();
  std::vector<Cplx> z(f1);
  std::vector<double> args(f1 * static_cast<std::size_t>(d));
  for (std::size_t t = 0; t < f1; ++t) {
    std::span<double> a(&args[t * static_cast<std::size_t>(d)], static_cast<std::size_t>(d));
    first.argument(t, r, a);
    z[t] = eval_template(first.template_spec(), a);
  }
  if (trace) {
    trace->atom_args = args;
    trace->z.assign(1, z);
    trace->preact.clear();
  }
  for (const auto& layer : model.hidden) {
    auto pre = layer.weights.apply(z);
    for (std::size_t j = 0; j < pre.size(); ++j) pre[j] += layer.bias[j];
    std::vector<Cplx> next(pre.size());
    for (std::size_t j = 0; j < pre.size(); ++j) next[j] = layer.activation(pre[j]);
    if (trace) {
      trace->preact.push_back(pre);
      trace->z.push_back(next);
    }
    z = std::move(next);
  }
  Cplx out = model.output.bias;
  for (std::size_t j = 0; j < z.size(); ++j) out += model.output.weights(0, j) * z[j];
  if (trace) trace->output = out;
  return out;
}

inline Cplx forward(const INRModel& model, double x) { return forward(model, std::span<const double>(&x, 1)); }

inline double forward_real(const INRModel& model, std::span<const double> r) { return forward(model, r).real(); }

/// Elementwise forward over interleaved points (dimension d each).
inline std::vector<Cplx> forward_batch(const INRModel& model, std::span<const double> points) {
  const auto d = static_cast<std::size_t>(model.dim());
  if (points.size() % d != 0) throw SizeError("forward_batch: point buffer is not a multiple of d");
  std::vector<Cplx> out(points.size() / d);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(model, points.subspan(i * d, d));
  return out;
}

inline std::vector<Cplx> forward_batch(const INRModel& model, const Grid1D& grid) {
  if (model.dim() != 1) throw SizeError("forward_batch: 1D grid for a 2D model");
  return forward_batch(model, grid.points());
}

inline std::vector<Cplx> forward_batch(const INRModel& model, const Grid2D& grid) {
  if (model.dim() != 2) throw SizeError("forward_batch: 2D grid for a 1D model");
  return forward_batch(model, grid.points());
}

/// Low-pass scaling network plus band-pass wavelet network.
struct SplitModel {
  INRModel scaling;
  INRModel gabor;

  int dim() const noexcept { return gabor.dim(); }
  friend bool operator==(const SplitModel&, const SplitModel&) = default;
};

inline Cplx split_forward(const SplitModel& split, std::span<const double> r) {
  if (split.scaling.dim() != split.gabor.dim())
    throw SizeError("split_forward: scaling and wavelet networks disagree on dimension");
  return forward(split.scaling, r) + forward(split.gabor, r);
}

inline double split_forward_real(const SplitModel& split, std::span<const double> r) {
  return split_forward(split, r).real();
}

inline std::vector<Cplx> split_forward_batch(const SplitModel& split, std::span<const double> points) {
  auto a = forward_batch(split.scaling, points);
  const auto b = forward_batch(split.gabor, points);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

}  // namespace winr
