#pragma once

// Real-part MSE loss, reverse-mode gradients, Adam and the training loop.
//
// Gradients of a real loss L with respect to a complex quantity z are carried
// as delta = dL/dRe(z) + i dL/dIm(z). For holomorphic maps y = g(z) this
// propagates as delta_z = conj(g'(z)) delta_y, so a dense layer A = W Z + b
// gives delta_W = delta_A Z^H and delta_Z = W^H delta_A.

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "winr/model.hpp"
#include "winr/numerics.hpp"

namespace winr {

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

enum class LossKind { MseReal, MseComplex };

/// Sample points (interleaved, dimension `dim`) and targets.
struct Dataset {
  int dim = 1;
  std::vector<double> points;
  std::vector<double> targets;             // MseReal
  std::vector<Cplx> complex_targets;       // MseComplex

  std::size_t size() const noexcept { return points.size() / static_cast<std::size_t>(dim); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(points).subspan(i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
  }

  void validate(LossKind loss) const {
    if (dim != 1 && dim != 2) throw SizeError("Dataset: dim must be 1 or 2");
    if (points.empty() || points.size() % static_cast<std::size_t>(dim) != 0)
      throw SizeError("Dataset: point buffer must hold a positive multiple of dim values");
    const std::size_t n = loss == LossKind::MseReal ? targets.size() : complex_targets.size();
    if (n != size())
      throw SizeError("Dataset: " + std::to_string(size()) + " points but " + std::to_string(n) + " targets");
  }
};

inline Dataset make_dataset(const Grid1D& grid, std::span<const double> values, double coord_scale = 1.0) {
  if (values.size() != grid.n) throw SizeError("make_dataset: value count != grid.n");
  Dataset d;
  d.dim = 1;
  d.points = grid.points();
  for (auto& p : d.points) p *= coord_scale;
  d.targets.assign(values.begin(), values.end());
  return d;
}

inline Dataset make_dataset(const Grid2D& grid, std::span<const double> values, double coord_scale = 1.0) {
  if (values.size() != grid.size()) throw SizeError("make_dataset: value count != grid size");
  Dataset d;
  d.dim = 2;
  d.points = grid.points();
  for (auto& p : d.points) p *= coord_scale;
  d.targets.assign(values.begin(), values.end());
  return d;
}

inline double mse_real_loss(const INRModel& model, std::span<const double> points, std::span<const double> targets) {
  const auto d = static_cast<std::size_t>(model.dim());
  if (targets.empty() || points.size() != targets.size() * d)
    throw SizeError("mse_real_loss: " + std::to_string(points.size() / d) + " points vs " +
                    std::to_string(targets.size()) + " targets");
  double s = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double e = forward_real(model, points.subspan(i * d, d)) - targets[i];
    s += e * e;
  }
  return s / static_cast<double>(targets.size());
}

inline double mse_real_loss(const INRModel& model, const Dataset& data) {
  return mse_real_loss(model, data.points, data.targets);
}

inline double psnr_from_mse(double mse, double peak = 1.0) {
  return 10.0 * std::log10(peak * peak / std::max(mse, 1e-300));
}

/// Partials of the loss with respect to every free real parameter. Complex
/// entries hold dL/dRe + i dL/dIm.
struct GradientSet {
  std::vector<double> first_weights;     // Free: F1 x d x d
  std::vector<double> first_log_scales;  // ScaleOnly: F1 x d
  std::vector<double> first_biases;      // F1 x d
  std::vector<std::vector<Cplx>> hidden_weights;
  std::vector<std::vector<Cplx>> hidden_biases;
  std::vector<Cplx> output_weights;
  Cplx output_bias;

  /// Same order as pack_parameters.
  std::vector<double> flatten() const {
    std::vector<double> out(first_weights);
    out.insert(out.end(), first_log_scales.begin(), first_log_scales.end());
    out.insert(out.end(), first_biases.begin(), first_biases.end());
    auto push = [&](std::span<const Cplx> v) {
      for (const auto& z : v) {
        out.push_back(z.real());
        out.push_back(z.imag());
      }
    };
    for (std::size_t l = 0; l < hidden_weights.size(); ++l) {
      push(hidden_weights[l]);
      push(hidden_biases[l]);
    }
    push(output_weights);
    push(std::span<const Cplx>(&output_bias, 1));
    return out;
  }
};

// ---------------------------------------------------------------------------
// Parameter packing

inline std::size_t parameter_count(const INRModel& m) {
  const auto d = static_cast<std::size_t>(m.dim());
  const std::size_t f1 = m.first.atoms();
  std::size_t n = f1 * d;
  if (m.first.constraint() == WeightConstraint::Free) n += f1 * d * d;
  if (m.first.constraint() == WeightConstraint::ScaleOnly) n += f1 * d;
  for (const auto& h : m.hidden) n += 2 * (h.weights.rows() * h.weights.cols() + h.bias.size());
  return n + 2 * (m.output.weights.cols() + 1);
}

/// Free parameters in a fixed order: first-layer weights (or log-scales), first-layer
/// biases, then each dense layer's weights and bias as re/im pairs.
inline std::vector<double> pack_parameters(const INRModel& m) {
  std::vector<double> p;
  p.reserve(parameter_count(m));
  const auto& f = m.first;
  if (f.constraint() == WeightConstraint::Free) p.insert(p.end(), f.raw_weights().begin(), f.raw_weights().end());
  if (f.constraint() == WeightConstraint::ScaleOnly)
    p.insert(p.end(), f.raw_log_scales().begin(), f.raw_log_scales().end());
  p.insert(p.end(), f.raw_biases().begin(), f.raw_biases().end());
  auto push = [&](std::span<const Cplx> v) {
    for (const auto& z : v) {
      p.push_back(z.real());
      p.push_back(z.imag());
    }
  };
  for (const auto& h : m.hidden) {
    push(h.weights.data());
    push(h.bias);
  }
  push(m.output.weights.data());
  push(std::span<const Cplx>(&m.output.bias, 1));
  return p;
}

inline void unpack_parameters(INRModel& m, std::span<const double> p) {
  if (p.size() != parameter_count(m))
    throw SizeError("unpack_parameters: expected " + std::to_string(parameter_count(m)) + " values, got " +
                    std::to_string(p.size()));
  std::size_t k = 0;
  auto& f = m.first;
  const auto d = static_cast<std::size_t>(f.dim());
  if (f.constraint() == WeightConstraint::Free)
    for (std::size_t t = 0; t < f.atoms(); ++t)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) f.set_weight(t, i, j, p[k++]);
  if (f.constraint() == WeightConstraint::ScaleOnly)
    for (std::size_t t = 0; t < f.atoms(); ++t)
      for (std::size_t i = 0; i < d; ++i) f.set_log_scale(t, i, p[k++]);
  for (std::size_t t = 0; t < f.atoms(); ++t)
    for (std::size_t i = 0; i < d; ++i) f.set_bias(t, i, p[k++]);
  auto pull = [&](std::span<Cplx> v) {
    for (auto& z : v) {
      z = {p[k], p[k + 1]};
      k += 2;
    }
  };
  for (auto& h : m.hidden) {
    pull(h.weights.data());
    pull(h.bias);
  }
  pull(m.output.weights.data());
  pull(std::span<Cplx>(&m.output.bias, 1));
}

// ---------------------------------------------------------------------------
// Batched forward / backward

namespace detail {

using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;
using RowMajorC = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline MatC to_eigen(const CMatrix& m) {
  return Eigen::Map<const RowMajorC>(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                     static_cast<Eigen::Index>(m.cols()));
}

/// post = rho(a) and dact = conj(rho'(a)), elementwise.
inline void apply_activation(const ActivationSpec& act, const MatC& a, MatC& post, MatC& dact) {
  post.resize(a.rows(), a.cols());
  dact.resize(a.rows(), a.cols());
  switch (act.kind) {
    case ActivationKind::Identity:
      post = a;
      dact.setOnes();
      return;
    case ActivationKind::ComplexSine:
      post.array() = (act.scale * a.array()).sin();
      dact.array() = (act.scale * (act.scale * a.array()).cos()).conjugate();
      return;
    case ActivationKind::Polynomial: {
      const std::size_t deg = act.coeffs.size() - 1;
      post.setConstant(act.coeffs[deg]);
      dact.setZero();
      for (std::size_t j = deg; j-- > 0;) {
        dact.array() = dact.array() * a.array() + post.array();
        post.array() = post.array() * a.array() + act.coeffs[j];
      }
      dact = dact.conjugate();
      return;
    }
  }
}

/// First-layer atoms per sample, stored sparsely: entries start[s] .. start[s+1]
/// hold the atoms of sample s whose value is not taken as zero.
struct ActiveAtoms {
  std::vector<std::size_t> start;
  std::vector<std::uint32_t> atom;
  std::vector<Cplx> value;
  std::array<std::vector<Cplx>, 2> grad;  // d(atom)/d(argument_i)

  void clear() {
    start.clear();
    atom.clear();
    value.clear();
    for (auto& g : grad) g.clear();
  }
};

/// Batched activations of one network; reused across training steps.
struct NetworkPass {
  ActiveAtoms z0;
  std::vector<MatC> weights;
  std::vector<MatC> post;   // post-activations per hidden layer
  std::vector<MatC> dact;   // conj(rho'(pre-activation)) per hidden layer
  Eigen::RowVectorXcd out;
  MatC dz, da;
};

/// Beyond |u|^2 / (2 sigma^2) = 40 a gaussian envelope is below 5e-18 of its
/// peak; the batched pass takes such atom values and gradients as zero.
inline constexpr double kEnvelopeCutoff = 40.0;

template <std::size_t D>
void first_layer_pass_fixed(const FirstLayer& first, const Dataset& data, ActiveAtoms& z0) {
  const std::size_t n = data.size(), f1 = first.atoms();
  const auto& tmpl = first.template_spec();
  const bool enveloped = tmpl.kind == TemplateKind::Gaussian || tmpl.kind == TemplateKind::Gabor;
  const double inv_2s2 = 1.0 / (2.0 * tmpl.sigma * tmpl.sigma);
  // Per-atom coefficients as one array per (i, j) entry so the argument loop vectorizes.
  std::array<std::array<std::vector<double>, D>, D> w;
  std::array<std::vector<double>, D> b, arg;
  for (std::size_t i = 0; i < D; ++i) {
    b[i].resize(f1);
    arg[i].resize(f1);
    for (std::size_t j = 0; j < D; ++j) w[i][j].resize(f1);
    for (std::size_t t = 0; t < f1; ++t) {
      b[i][t] = first.bias(t, i);
      for (std::size_t j = 0; j < D; ++j) w[i][j][t] = first.weight(t, i, j);
    }
  }
  std::vector<double> q(f1);
  z0.clear();
  z0.start.reserve(n + 1);
  std::array<double, 2> x{};
  for (std::size_t s = 0; s < n; ++s) {
    z0.start.push_back(z0.atom.size());
    const double* r = &data.points[s * D];
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t i = 0; i < D; ++i) {
      double* ai = arg[i].data();
      const double* bi = b[i].data();
      for (std::size_t t = 0; t < f1; ++t) ai[t] = bi[t];
      for (std::size_t j = 0; j < D; ++j) {
        const double* wij = w[i][j].data();
        const double rj = r[j];
        for (std::size_t t = 0; t < f1; ++t) ai[t] += wij[t] * rj;
      }
      for (std::size_t t = 0; t < f1; ++t) q[t] += ai[t] * ai[t];
    }
    for (std::size_t t = 0; t < f1; ++t) {
      if (enveloped && q[t] * inv_2s2 > kEnvelopeCutoff) continue;
      for (std::size_t i = 0; i < D; ++i) x[i] = arg[i][t];
      const auto jet = eval_template_jet(tmpl, std::span<const double>(x.data(), D));
      z0.atom.push_back(static_cast<std::uint32_t>(t));
      z0.value.push_back(jet.value);
      for (std::size_t i = 0; i < D; ++i) z0.grad[i].push_back(jet.grad[i]);
    }
  }
  z0.start.push_back(z0.atom.size());
}

inline void first_layer_pass(const FirstLayer& first, const Dataset& data, ActiveAtoms& z0) {
  if (first.dim() == 1)
    first_layer_pass_fixed<1>(first, data, z0);
  else
    first_layer_pass_fixed<2>(first, data, z0);
}

inline void forward_pass(const INRModel& m, const Dataset& data, NetworkPass& pass) {
  const auto n = static_cast<Eigen::Index>(data.size());
  first_layer_pass(m.first, data, pass.z0);
  const auto& z0 = pass.z0;
  const std::size_t depth = m.hidden.size();
  pass.weights.resize(depth + 1);
  pass.post.resize(depth);
  pass.dact.resize(depth);
  for (std::size_t l = 0; l <= depth; ++l) pass.weights[l] = to_eigen(l < depth ? m.hidden[l].weights : m.output.weights);

  // First dense layer consumes the sparse atoms.
  const MatC& w0 = pass.weights[0];
  if (depth) {
    pass.da.setZero(w0.rows(), n);
  } else {
    pass.out.setZero(n);
  }
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto us = static_cast<std::size_t>(s);
    for (std::size_t e = z0.start[us]; e < z0.start[us + 1]; ++e) {
      if (depth)
        pass.da.col(s) += w0.col(z0.atom[e]) * z0.value[e];
      else
        pass.out(s) += w0(0, z0.atom[e]) * z0.value[e];
    }
  }
  if (!depth) {
    pass.out.array() += m.output.bias;
    return;
  }
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& h = m.hidden[l];
    const Eigen::VectorXcd b = Eigen::Map<const Eigen::VectorXcd>(h.bias.data(), static_cast<Eigen::Index>(h.bias.size()));
    if (l > 0) {
      pass.da.resize(pass.weights[l].rows(), n);
      pass.da.noalias() = pass.weights[l] * pass.post[l - 1];
    }
    pass.da.colwise() += b;
    apply_activation(h.activation, pass.da, pass.post[l], pass.dact[l]);
  }
  pass.out.resize(n);
  pass.out.noalias() = pass.weights[depth] * pass.post.back();
  pass.out.array() += m.output.bias;
}

inline void backward_pass(const INRModel& m, const Dataset& data, NetworkPass& pass,
                          const Eigen::RowVectorXcd& delta_out, GradientSet& g) {
  const std::size_t depth = m.hidden.size();
  const auto& z0 = pass.z0;
  const auto f1 = m.first.atoms();
  const auto d = static_cast<std::size_t>(m.dim());
  const auto n = static_cast<Eigen::Index>(data.size());
  g.output_bias = delta_out.sum();

  const Eigen::VectorXcd w_out = pass.weights[depth].adjoint();
  g.hidden_weights.resize(depth);
  g.hidden_biases.resize(depth);
  if (depth) {
    const Eigen::RowVectorXcd dw_out = delta_out * pass.post.back().adjoint();
    g.output_weights.assign(dw_out.data(), dw_out.data() + dw_out.size());
    pass.dz.resize(w_out.size(), n);
    for (Eigen::Index s = 0; s < n; ++s) pass.dz.col(s) = w_out * delta_out(s);
  }
  // Leaves pass.da as the gradient at the first hidden layer's pre-activation.
  for (std::size_t l = depth; l-- > 0;) {
    pass.da = pass.dz.cwiseProduct(pass.dact[l]);
    const Eigen::VectorXcd db = pass.da.rowwise().sum();
    g.hidden_biases[l].assign(db.data(), db.data() + db.size());
    if (l == 0) break;
    const RowMajorC dw = pass.da * pass.post[l - 1].adjoint();
    g.hidden_weights[l].assign(dw.data(), dw.data() + dw.size());
    pass.dz.resize(pass.weights[l].cols(), n);
    pass.dz.noalias() = pass.weights[l].adjoint() * pass.da;
  }

  // Weights reading the atoms, and dL/d(argument_i) = Re(conj(dz) dz0_i), in sample order.
  const MatC& w0 = pass.weights[0];
  MatC dw0 = MatC::Zero(w0.rows(), w0.cols());
  g.first_biases.assign(f1 * d, 0.0);
  g.first_weights.clear();
  g.first_log_scales.clear();
  std::vector<double> dw(f1 * d * d, 0.0);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto us = static_cast<std::size_t>(s);
    const double* r = &data.points[us * d];
    for (std::size_t e = z0.start[us]; e < z0.start[us + 1]; ++e) {
      const std::size_t t = z0.atom[e];
      const auto ti = static_cast<Eigen::Index>(t);
      Cplx dz;
      if (depth) {
        dz = w0.col(ti).dot(pass.da.col(s));
        dw0.col(ti) += pass.da.col(s) * std::conj(z0.value[e]);
      } else {
        dz = w_out(ti) * delta_out(s);
        dw0(0, ti) += delta_out(s) * std::conj(z0.value[e]);
      }
      for (std::size_t i = 0; i < d; ++i) {
        const Cplx a = z0.grad[i][e];
        const double v = dz.real() * a.real() + dz.imag() * a.imag();
        g.first_biases[t * d + i] += v;
        for (std::size_t j = 0; j < d; ++j) dw[t * d * d + i * d + j] += v * r[j];
      }
    }
  }
  const RowMajorC dw0_rows = dw0;
  auto& target = depth ? g.hidden_weights[0] : g.output_weights;
  target.assign(dw0_rows.data(), dw0_rows.data() + dw0_rows.size());
  switch (m.first.constraint()) {
    case WeightConstraint::Free: g.first_weights = std::move(dw); break;
    case WeightConstraint::ScaleOnly:
      g.first_log_scales.resize(f1 * d);
      for (std::size_t t = 0; t < f1; ++t)
        for (std::size_t i = 0; i < d; ++i)
          g.first_log_scales[t * d + i] = dw[t * d * d + i * d + i] * m.first.weight(t, i, i);
      break;
    case WeightConstraint::UnitWeights: break;
  }
}

}  // namespace detail

/// Loss of the summed outputs of `nets` and, if requested, per-network gradients.
/// `workspace` keeps batch buffers alive between calls.
inline double loss_and_gradients(std::span<const INRModel* const> nets, const Dataset& data, LossKind loss,
                                 std::vector<GradientSet>* grads,
                                 std::vector<detail::NetworkPass>* workspace = nullptr) {
  data.validate(loss);
  if (nets.empty()) throw std::invalid_argument("loss_and_gradients: no networks");
  std::vector<detail::NetworkPass> local;
  auto& passes = workspace ? *workspace : local;
  passes.resize(nets.size());
  Eigen::RowVectorXcd total = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(data.size()));
  for (std::size_t k = 0; k < nets.size(); ++k) {
    if (nets[k]->dim() != data.dim) throw SizeError("loss_and_gradients: network and dataset dimensions differ");
    detail::forward_pass(*nets[k], data, passes[k]);
    total += passes[k].out;
  }
  const auto n = static_cast<Eigen::Index>(data.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::RowVectorXcd delta(n);
  double l = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto i = static_cast<std::size_t>(s);
    if (loss == LossKind::MseReal) {
      const double e = total(s).real() - data.targets[i];
      l += e * e;
      delta(s) = 2.0 * inv_n * e;
    } else {
      const Cplx e = total(s) - data.complex_targets[i];
      l += std::norm(e);
      delta(s) = 2.0 * inv_n * e;
    }
  }
  if (grads) {
    grads->resize(nets.size());
    for (std::size_t k = 0; k < nets.size(); ++k) detail::backward_pass(*nets[k], data, passes[k], delta, (*grads)[k]);
  }
  return l * inv_n;
}

/// Gradients of mse_real_loss for a single network.
inline GradientSet backward(const INRModel& model, const Dataset& data, LossKind loss = LossKind::MseReal) {
  const INRModel* nets[] = {&model};
  std::vector<GradientSet> g;
  loss_and_gradients(nets, data, loss, &g);
  return std::move(g[0]);
}

inline GradientSet backward(const INRModel& model, std::span<const double> points, std::span<const double> targets) {
  Dataset d;
  d.dim = model.dim();
  d.points.assign(points.begin(), points.end());
  d.targets.assign(targets.begin(), targets.end());
  return backward(model, d);
}

// ---------------------------------------------------------------------------
// Optimizer and loop

struct TrainConfig {
  std::size_t steps = 1000;
  double lr = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::MseReal;
  bool train_first_layer = true;

  void validate() const {
    if (steps < 1) throw std::invalid_argument("TrainConfig: steps must be >= 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("TrainConfig: lr must be finite and >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw std::invalid_argument("TrainConfig: Adam betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("TrainConfig: eps must be > 0");
  }
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;
};

inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                      const TrainConfig& cfg) {
  if (params.size() != grads.size()) throw SizeError("adam_step: parameter and gradient sizes differ");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw SizeError("adam_step: state size differs from parameters");
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1, vhat = state.v[i] / c2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

struct TrainHistory {
  std::vector<double> loss;  // loss before each update
  double wall_seconds = 0.0;
  double final_mse = 0.0;
  double final_psnr = 0.0;
};

/// Called after each recorded loss with (step, loss); may be empty.
using StepObserver = std::function<void(std::size_t, double)>;

namespace detail {

inline std::size_t first_layer_parameter_count(const INRModel& m) {
  const auto d = static_cast<std::size_t>(m.dim());
  const std::size_t f1 = m.first.atoms();
  std::size_t n = f1 * d;
  if (m.first.constraint() == WeightConstraint::Free) n += f1 * d * d;
  if (m.first.constraint() == WeightConstraint::ScaleOnly) n += f1 * d;
  return n;
}

inline void check_scale_positivity(const INRModel& m, std::size_t step) {
  if (m.first.constraint() != WeightConstraint::ScaleOnly) return;
  const auto d = static_cast<std::size_t>(m.dim());
  for (std::size_t t = 0; t < m.first.atoms(); ++t)
    for (std::size_t i = 0; i < d; ++i)
      if (!(m.first.weight(t, i, i) > 0.0))
        throw TrainingError("scale of atom " + std::to_string(t) + " left the positive half-line", step);
}

}  // namespace detail

/// Full-batch Adam on the summed outputs of `nets`; mutates them in place.
inline TrainHistory train(std::span<INRModel* const> nets, const Dataset& data, const TrainConfig& cfg,
                          const StepObserver& observer = {}) {
  cfg.validate();
  data.validate(cfg.loss);
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> offsets{0};
  std::vector<double> params;
  for (auto* m : nets) {
    m->validate();
    const auto p = pack_parameters(*m);
    params.insert(params.end(), p.begin(), p.end());
    offsets.push_back(params.size());
  }
  std::vector<const INRModel*> cnets(nets.begin(), nets.end());
  AdamState state;
  TrainHistory hist;
  hist.loss.reserve(cfg.steps);
  std::vector<GradientSet> grads;
  std::vector<detail::NetworkPass> workspace;
  std::vector<double> flat(params.size());
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const double l = loss_and_gradients(cnets, data, cfg.loss, &grads, &workspace);
    if (!std::isfinite(l)) throw TrainingError("loss became non-finite at step " + std::to_string(step), step);
    hist.loss.push_back(l);
    if (observer) observer(step, l);
    for (std::size_t k = 0; k < nets.size(); ++k) {
      const auto g = grads[k].flatten();
      std::copy(g.begin(), g.end(), flat.begin() + static_cast<std::ptrdiff_t>(offsets[k]));
      if (!cfg.train_first_layer) {
        const auto nf = detail::first_layer_parameter_count(*nets[k]);
        std::fill_n(flat.begin() + static_cast<std::ptrdiff_t>(offsets[k]), nf, 0.0);
      }
    }
    adam_step(params, flat, state, cfg);
    for (std::size_t k = 0; k < nets.size(); ++k) {
      unpack_parameters(*nets[k], std::span<const double>(params).subspan(offsets[k], offsets[k + 1] - offsets[k]));
      detail::check_scale_positivity(*nets[k], step);
    }
  }
  hist.final_mse = loss_and_gradients(cnets, data, cfg.loss, nullptr, &workspace);
  if (!std::isfinite(hist.final_mse)) throw TrainingError("loss became non-finite after the last step", cfg.steps);
  hist.final_psnr = psnr_from_mse(hist.final_mse);
  hist.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return hist;
}

inline TrainHistory train(INRModel& model, const Dataset& data, const TrainConfig& cfg, const StepObserver& obs = {}) {
  INRModel* nets[] = {&model};
  return train(nets, data, cfg, obs);
}

inline TrainHistory train(SplitModel& split, const Dataset& data, const TrainConfig& cfg, const StepObserver& obs = {}) {
  INRModel* nets[] = {&split.scaling, &split.gabor};
  return train(nets, data, cfg, obs);
}

// ---------------------------------------------------------------------------
// Frozen-first-layer least squares

struct LinearFit {
  std::vector<Cplx> coefficients;  // one per atom
  Cplx constant;
  std::vector<double> fitted;      // Re(sum_t c_t a_t + constant)
  double mse = 0.0;
};

/// Optimal complex coefficients for the real part of a linear combination of the
/// atoms of one or more frozen first layers, plus a constant.
inline LinearFit fit_linear(std::span<const FirstLayer* const> layers, const Dataset& data) {
  data.validate(LossKind::MseReal);
  std::size_t atoms = 0;
  for (const auto* f : layers) {
    if (f->dim() != data.dim) throw SizeError("fit_linear: layer and dataset dimensions differ");
    atoms += f->atoms();
  }
  const std::size_t n = data.size();
  // Re(c a) = Re(c) Re(a) - Im(c) Im(a): columns [Re a_t, -Im a_t], then the constant.
  // Real-valued templates contribute only the first column.
  std::vector<std::size_t> first_col;
  std::size_t cols = 0;
  for (const auto* f : layers) {
    const std::size_t width = is_real_valued(f->template_spec().kind) ? 1 : 2;
    for (std::size_t t = 0; t < f->atoms(); ++t, cols += width) first_col.push_back(cols);
  }
  first_col.push_back(cols);
  CMatrix design(n, cols + 1);
  std::vector<double> arg(static_cast<std::size_t>(data.dim));
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t atom = 0;
    for (const auto* f : layers)
      for (std::size_t t = 0; t < f->atoms(); ++t, ++atom) {
        f->argument(t, data.point(s), arg);
        const Cplx a = eval_template(f->template_spec(), arg);
        design(s, first_col[atom]) = a.real();
        if (first_col[atom + 1] - first_col[atom] == 2) design(s, first_col[atom] + 1) = -a.imag();
      }
    design(s, cols) = 1.0;
  }
  std::vector<Cplx> y(data.targets.begin(), data.targets.end());
  const auto sol = lstsq(design, y);
  LinearFit fit;
  fit.coefficients.resize(atoms);
  for (std::size_t t = 0; t < atoms; ++t) {
    const bool complex_atom = first_col[t + 1] - first_col[t] == 2;
    fit.coefficients[t] = {sol[first_col[t]].real(), complex_atom ? sol[first_col[t] + 1].real() : 0.0};
  }
  fit.constant = sol[cols].real();
  const auto pred = design.apply(sol);
  fit.fitted.resize(n);
  double s2 = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    fit.fitted[s] = pred[s].real();
    const double e = fit.fitted[s] - data.targets[s];
    s2 += e * e;
  }
  fit.mse = s2 / static_cast<double>(n);
  return fit;
}

inline LinearFit fit_linear(const FirstLayer& layer, const Dataset& data) {
  const FirstLayer* layers[] = {&layer};
  return fit_linear(layers, data);
}

}  // namespace winr
