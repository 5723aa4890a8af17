#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "winr/model.hpp"
#include "winr/spectrum.hpp"

using namespace winr;

namespace {

Cplx rand_c(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng)};
}

INRModel random_model(const TemplateSpec& t, std::size_t f1, std::vector<std::size_t> widths, ActivationSpec act,
                      std::mt19937_64& rng) {
  auto m = make_model(t, WeightConstraint::Free, f1, widths, act);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto d = static_cast<std::size_t>(t.dim);
  for (std::size_t a = 0; a < f1; ++a)
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) m.first.set_weight(a, i, j, (i == j ? 1.5 : 0.0) + 0.3 * u(rng));
      m.first.set_bias(a, i, u(rng));
    }
  for (auto& h : m.hidden) {
    for (auto& w : h.weights.data()) w = rand_c(rng);
    for (auto& b : h.bias) b = rand_c(rng);
  }
  for (auto& w : m.output.weights.data()) w = rand_c(rng);
  m.output.bias = rand_c(rng);
  return m;
}

// Layer-by-layer recomputation without the library forward.
Cplx manual_forward(const INRModel& m, const std::vector<double>& r) {
  const auto d = static_cast<std::size_t>(m.dim());
  std::vector<Cplx> z;
  for (std::size_t t = 0; t < m.first.atoms(); ++t) {
    std::vector<double> arg(d);
    for (std::size_t i = 0; i < d; ++i) {
      arg[i] = m.first.bias(t, i);
      for (std::size_t j = 0; j < d; ++j) arg[i] += m.first.weight(t, i, j) * r[j];
    }
    z.push_back(eval_template(m.first.template_spec(), arg));
  }
  for (const auto& h : m.hidden) {
    std::vector<Cplx> next(h.weights.rows());
    for (std::size_t i = 0; i < next.size(); ++i) {
      Cplx s = h.bias[i];
      for (std::size_t j = 0; j < z.size(); ++j) s += h.weights(i, j) * z[j];
      Cplx p = 0.0, zk = 1.0;
      if (h.activation.kind == ActivationKind::Polynomial) {
        for (const auto& c : h.activation.coeffs) {
          p += c * zk;
          zk *= s;
        }
      } else {
        p = s;
      }
      next[i] = p;
    }
    z = next;
  }
  Cplx out = m.output.bias;
  for (std::size_t j = 0; j < z.size(); ++j) out += m.output.weights(0, j) * z[j];
  return out;
}

}  // namespace

TEST(Activation, PolynomialAndDerivative) {
  const auto a = ActivationSpec::alternating_cubic();
  const Cplx z(0.3, -0.7);
  EXPECT_NEAR(std::abs(a(z) - (-z + z * z - z * z * z)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a.derivative(z) - (-1.0 + 2.0 * z - 3.0 * z * z)), 0.0, 1e-15);
  EXPECT_EQ(a.degree(), 3u);
  EXPECT_THROW(ActivationSpec::polynomial({1.0}), std::invalid_argument);
  EXPECT_THROW(ActivationSpec::polynomial({1.0, 2.0, 0.0}), std::invalid_argument);
  const auto s = ActivationSpec::complex_sine(2.0);
  EXPECT_NEAR(std::abs(s.derivative(z) - 2.0 * std::cos(2.0 * z)), 0.0, 1e-15);
}

TEST(Forward, SingleAtomPassthrough) {
  auto m = make_model(TemplateSpec::gaussian(0.5), WeightConstraint::Free, 1, {}, ActivationSpec::identity());
  m.output.weights(0, 0) = Cplx(2.0, -1.0);
  for (double x : {-0.4, 0.0, 0.9}) {
    EXPECT_EQ(forward(m, x), Cplx(2.0, -1.0) * eval_template(TemplateSpec::gaussian(0.5), x));
  }
}

TEST(Forward, ZeroOutputWeightsGiveBias) {
  std::mt19937_64 rng(1);
  auto m = random_model(gabor_template(), 3, {4, 4}, ActivationSpec::alternating_cubic(), rng);
  for (auto& w : m.output.weights.data()) w = 0.0;
  m.output.bias = Cplx(0.25, 0.5);
  for (double x : {-2.0, 0.1, 3.0}) EXPECT_EQ(forward(m, x), Cplx(0.25, 0.5));
}

TEST(Forward, SquaredSinusoidPeaksAtDoubleFrequency) {
  const double w = 4.0;
  auto m = make_model(TemplateSpec::sinusoid(w), WeightConstraint::Free, 1, {1},
                      ActivationSpec::polynomial({0.0, 0.0, 1.0}));
  m.hidden[0].weights(0, 0) = 1.0;
  m.output.weights(0, 0) = 1.0;
  Grid1D g{0.0, 4.0, 256};
  const auto rep = sampled_spectrum(forward_batch(m, g), g);
  std::size_t best = 0;
  for (std::size_t i = 0; i < rep.size(); ++i)
    if (rep.magnitude(i) > rep.magnitude(best)) best = i;
  EXPECT_DOUBLE_EQ(rep.fx(best), 2.0 * w);
}

TEST(Forward, MatchesManualRecomputation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 2;
    const TemplateSpec t = trial % 3 == 0 ? TemplateSpec::gaussian(0.7, d) : gabor_template(d);
    const auto m = random_model(t, 3, {5, 4}, ActivationSpec::alternating_cubic(), rng);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> r(static_cast<std::size_t>(d));
      for (auto& v : r) v = u(rng);
      const Cplx a = forward(m, r), b = manual_forward(m, r);
      EXPECT_LE(std::abs(a - b), 1e-13 * std::max(1.0, std::abs(b)));
    }
  }
}

TEST(Forward, TraceShapes) {
  std::mt19937_64 rng(3);
  const auto m = random_model(gabor_template(), 3, {5, 4}, ActivationSpec::alternating_cubic(), rng);
  ForwardTrace tr;
  const double x = 0.2;
  const Cplx out = forward(m, std::span<const double>(&x, 1), &tr);
  EXPECT_EQ(tr.output, out);
  ASSERT_EQ(tr.z.size(), 3u);
  EXPECT_EQ(tr.z[0].size(), 3u);
  EXPECT_EQ(tr.z[1].size(), 5u);
  EXPECT_EQ(tr.z[2].size(), 4u);
  EXPECT_EQ(tr.preact.size(), 2u);
}

TEST(Forward, DimensionMismatch) {
  const auto m = make_model(TemplateSpec::gaussian(0.5, 2), WeightConstraint::Free, 2, {}, ActivationSpec::identity());
  EXPECT_THROW(forward(m, 0.5), SizeError);
  EXPECT_THROW(forward_batch(m, Grid1D{0.0, 1.0, 4}), SizeError);
}

TEST(Forward, OutputLayerHomogeneity) {
  std::mt19937_64 rng(4);
  auto m = random_model(gabor_template(), 2, {3}, ActivationSpec::alternating_cubic(), rng);
  const double x = 0.37;
  const Cplx base = forward(m, x) - m.output.bias;
  const Cplx c(0.5, 0.0);
  for (auto& w : m.output.weights.data()) w *= c;
  EXPECT_NEAR(std::abs(forward(m, x) - m.output.bias - c * base), 0.0, 1e-15);
}

TEST(Forward, SupportLocalityIsBitExact) {
  std::mt19937_64 rng(5);
  auto m = random_model(TemplateSpec::bump(0.25), 4, {3}, ActivationSpec::alternating_cubic(), rng);
  for (std::size_t t = 0; t < 4; ++t) {
    m.first.set_weight(t, 0, 0, 1.0);
    m.first.set_bias(t, 0, -0.25 - 0.5 * double(t));
  }
  const double r0 = 0.25;  // only atom 0 is live here
  const Cplx before = forward(m, r0);
  m.first.set_weight(2, 0, 0, 3.0);
  m.first.set_bias(3, 0, -7.0);
  EXPECT_EQ(forward(m, r0), before);
}

TEST(ForwardReal, RealPartSemantics) {
  auto m = make_model(TemplateSpec::gaussian(0.5), WeightConstraint::Free, 1, {}, ActivationSpec::identity());
  m.output.weights(0, 0) = 3.0;
  const double x = 0.1;
  EXPECT_EQ(forward_real(m, std::span<const double>(&x, 1)), forward(m, x).real());
  EXPECT_EQ(forward(m, x).imag(), 0.0);

  auto s = make_model(TemplateSpec::sinusoid(2.0), WeightConstraint::Free, 1, {}, ActivationSpec::identity());
  s.output.weights(0, 0) = 1.0;
  EXPECT_NEAR(forward_real(s, std::span<const double>(&x, 1)), std::cos(2.0 * std::numbers::pi * 2.0 * x), 1e-15);
}

TEST(ForwardBatch, MatchesLoop) {
  std::mt19937_64 rng(6);
  const auto m = random_model(gabor_template(2), 3, {4}, ActivationSpec::alternating_cubic(), rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> pts(256);
  for (auto& p : pts) p = u(rng);
  const auto batch = forward_batch(m, pts);
  ASSERT_EQ(batch.size(), 128u);
  for (std::size_t i = 0; i < 128; ++i) EXPECT_EQ(batch[i], forward(m, std::span<const double>(&pts[2 * i], 2)));
  const double one[2] = {0.5, -0.5};
  EXPECT_EQ(forward_batch(m, one)[0], forward(m, one));
}

TEST(ForwardBatch, ConstantModel) {
  auto m = make_model(gabor_template(), WeightConstraint::Free, 2, {3}, ActivationSpec::alternating_cubic());
  m.output.bias = 1.5;
  for (const auto& v : forward_batch(m, Grid1D{0.0, 1.0, 16})) EXPECT_EQ(v, Cplx(1.5, 0.0));
}

TEST(SplitForward, SumOfParts) {
  std::mt19937_64 rng(7);
  SplitModel s;
  s.scaling = make_model(scaling_template(), WeightConstraint::UnitWeights, 3, {}, ActivationSpec::identity());
  for (std::size_t t = 0; t < 3; ++t) s.scaling.first.set_bias(t, 0, -0.3 * double(t));
  for (auto& w : s.scaling.output.weights.data()) w = rand_c(rng);
  s.gabor = random_model(gabor_template(), 3, {4, 4}, ActivationSpec::alternating_cubic(), rng);
  const double x = 0.4;
  const std::span<const double> r(&x, 1);
  EXPECT_EQ(split_forward(s, r), forward(s.scaling, r) + forward(s.gabor, r));
  EXPECT_NEAR(split_forward_real(s, r), forward_real(s.scaling, r) + forward_real(s.gabor, r), 1e-14);

  auto g0 = s;
  for (auto& w : g0.gabor.output.weights.data()) w = 0.0;
  g0.gabor.output.bias = 0.0;
  EXPECT_EQ(split_forward(g0, r), forward(g0.scaling, r));
  auto s0 = s;
  for (auto& w : s0.scaling.output.weights.data()) w = 0.0;
  EXPECT_EQ(split_forward(s0, r), forward(s0.gabor, r));
}

TEST(FirstLayer, Constraints) {
  FirstLayer unit(scaling_template(), WeightConstraint::UnitWeights, 2);
  EXPECT_THROW(unit.set_weight(0, 0, 0, 2.0), std::logic_error);
  EXPECT_EQ(unit.weight(1, 0, 0), 1.0);

  FirstLayer so(gabor_template(), WeightConstraint::ScaleOnly, 2);
  so.set_log_scale(1, 0, std::log(3.0));
  EXPECT_NEAR(so.weight(1, 0, 0), 3.0, 1e-15);
  EXPECT_THROW(so.set_weight(0, 0, 0, -1.0), std::logic_error);
  EXPECT_THROW(so.set_scale(0, -1.0), std::invalid_argument);

  FirstLayer fr(gabor_template(), WeightConstraint::Free, 1);
  fr.set_weight(0, 0, 0, 0.0);
  EXPECT_THROW(fr.validate(), std::invalid_argument);

  FirstLayer c(gabor_template(), WeightConstraint::ScaleOnly, 1);
  c.set_scale(0, 4.0);
  const double u = 0.3;
  c.center_at(0, std::span<const double>(&u, 1));
  EXPECT_NEAR(c.bias(0, 0), -1.2, 1e-15);
}
