#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "winr/training.hpp"
#include "winr/verify/reference_eval.hpp"

using namespace winr;

namespace {

Cplx rand_c(std::mt19937_64& rng, double s = 1.0) {
  std::uniform_real_distribution<double> u(-s, s);
  return {u(rng), u(rng)};
}

INRModel random_model(const TemplateSpec& t, WeightConstraint c, std::size_t f1, std::vector<std::size_t> widths,
                      std::mt19937_64& rng) {
  auto m = make_model(t, c, f1, widths, ActivationSpec::alternating_cubic());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto d = static_cast<std::size_t>(t.dim);
  for (std::size_t a = 0; a < f1; ++a) {
    if (c == WeightConstraint::Free)
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m.first.set_weight(a, i, j, (i == j ? 1.5 : 0.0) + 0.4 * u(rng));
    if (c == WeightConstraint::ScaleOnly)
      for (std::size_t i = 0; i < d; ++i) m.first.set_log_scale(a, i, 0.5 * u(rng));
    for (std::size_t i = 0; i < d; ++i) m.first.set_bias(a, i, u(rng));
  }
  for (auto& h : m.hidden) {
    for (auto& w : h.weights.data()) w = rand_c(rng, 0.6);
    for (auto& b : h.bias) b = rand_c(rng, 0.3);
  }
  for (auto& w : m.output.weights.data()) w = rand_c(rng);
  m.output.bias = rand_c(rng, 0.2);
  return m;
}

Dataset random_dataset(int dim, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dataset d;
  d.dim = dim;
  d.points.resize(n * static_cast<std::size_t>(dim));
  for (auto& p : d.points) p = u(rng);
  d.targets.resize(n);
  for (auto& t : d.targets) t = u(rng);
  return d;
}

}  // namespace

TEST(MseRealLoss, Basics) {
  std::mt19937_64 rng(1);
  const auto m = random_model(gabor_template(), WeightConstraint::Free, 3, {4}, rng);
  auto d = random_dataset(1, 16, rng);
  for (std::size_t i = 0; i < d.size(); ++i) d.targets[i] = forward_real(m, d.point(i));
  EXPECT_EQ(mse_real_loss(m, d), 0.0);

  auto c = make_model(gabor_template(), WeightConstraint::Free, 2, {}, ActivationSpec::identity());
  std::vector<double> pts{0.1, 0.2, 0.3}, ones(3, 1.0);
  EXPECT_EQ(mse_real_loss(c, pts, ones), 1.0);
  EXPECT_THROW(mse_real_loss(c, pts, std::vector<double>(2, 1.0)), SizeError);
}

TEST(MseRealLoss, MatchesDirectRecomputation) {
  std::mt19937_64 rng(2);
  const auto m = random_model(gabor_template(), WeightConstraint::ScaleOnly, 3, {4, 4}, rng);
  const auto d = random_dataset(1, 32, rng);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += std::pow(forward(m, d.point(i)).real() - d.targets[i], 2);
  EXPECT_NEAR(mse_real_loss(m, d), s / 32.0, 1e-15);
  const INRModel* nets[] = {&m};
  EXPECT_NEAR(loss_and_gradients(nets, d, LossKind::MseReal, nullptr), s / 32.0, 1e-13);
}

TEST(MseRealLoss, EnvelopeCutoffMatchesReference) {
  std::mt19937_64 rng(3);
  auto m = random_model(gabor_template(2), WeightConstraint::Free, 6, {5}, rng);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t i = 0; i < 2; ++i) {
      m.first.set_weight(t, i, i, 3.0);
      m.first.set_bias(t, i, u(rng));
    }
  auto d = random_dataset(2, 400, rng);
  for (auto& p : d.points) p *= 3.0;
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += std::pow(forward(m, d.point(i)).real() - d.targets[i], 2);
  const INRModel* nets[] = {&m};
  EXPECT_NEAR(loss_and_gradients(nets, d, LossKind::MseReal, nullptr), s / 400.0, 1e-13);
  const auto r = verify::check_gradients(m, d);
  EXPECT_GT(r.checked, 0u);
  EXPECT_LE(r.worst_rel, 1e-5);
}

TEST(Backward, StationaryAtPerfectFit) {
  std::mt19937_64 rng(3);
  const auto m = random_model(gabor_template(), WeightConstraint::Free, 3, {4}, rng);
  auto d = random_dataset(1, 24, rng);
  for (std::size_t i = 0; i < d.size(); ++i) d.targets[i] = forward_real(m, d.point(i));
  for (double g : backward(m, d).flatten()) EXPECT_LE(std::abs(g), 1e-12);
}

TEST(Backward, AffineOutputLayer) {
  std::mt19937_64 rng(4);
  const auto m = random_model(TemplateSpec::gaussian(0.5), WeightConstraint::Free, 3, {}, rng);
  const auto d = random_dataset(1, 20, rng);
  const auto g = backward(m, d);
  // dL/dW_t = 2 mean(e conj(z_t)); re/im parts as the real partials.
  for (std::size_t t = 0; t < 3; ++t) {
    Cplx expect{};
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double e = forward_real(m, d.point(i)) - d.targets[i];
      std::vector<double> arg(1);
      m.first.argument(t, d.point(i), arg);
      expect += 2.0 * e * std::conj(eval_template(m.first.template_spec(), arg)) / double(d.size());
    }
    EXPECT_NEAR(std::abs(g.output_weights[t] - expect), 0.0, 1e-14);
  }
}

TEST(Backward, MatchesFiniteDifferencesAllGroups) {
  const std::vector<TemplateSpec> kinds{TemplateSpec::gaussian(0.6), gabor_template(), TemplateSpec::sinusoid(0.8)};
  std::uint64_t seed = 10;
  for (const auto& t : kinds)
    for (auto c : {WeightConstraint::Free, WeightConstraint::ScaleOnly, WeightConstraint::UnitWeights})
      for (int dim : {1, 2}) {
        std::mt19937_64 rng(seed++);
        TemplateSpec ts = t;
        ts.dim = dim;
        const auto m = random_model(ts, c, 3, {4, 3}, rng);
        const auto d = random_dataset(dim, 20, rng);
        const auto r = verify::check_gradients(m, d);
        EXPECT_GT(r.checked, 0u);
        EXPECT_LE(r.worst_rel, 1e-5) << to_string(t.kind) << " " << to_string(c) << " d=" << dim << " at "
                                     << r.worst_index;
      }
}

TEST(Backward, ComplexSineAndMeyer) {
  std::mt19937_64 rng(30);
  auto m = random_model(TemplateSpec::meyer(), WeightConstraint::ScaleOnly, 2, {3}, rng);
  m.hidden[0].activation = ActivationSpec::complex_sine(1.3);
  const auto d = random_dataset(1, 16, rng);
  EXPECT_LE(verify::check_gradients(m, d).worst_rel, 1e-5);
}

TEST(Backward, SplitModelSumsOutputs) {
  std::mt19937_64 rng(31);
  const auto a = random_model(scaling_template(), WeightConstraint::UnitWeights, 3, {}, rng);
  const auto b = random_model(gabor_template(), WeightConstraint::ScaleOnly, 2, {3}, rng);
  const auto d = random_dataset(1, 16, rng);
  const INRModel* nets[] = {&a, &b};
  std::vector<GradientSet> g;
  loss_and_gradients(nets, d, LossKind::MseReal, &g);
  const auto gb = g[1].flatten();
  const auto p = pack_parameters(b);
  for (std::size_t k = 0; k < p.size(); k += 3) {
    auto plus = p, minus = p;
    plus[k] += 1e-6;
    minus[k] -= 1e-6;
    INRModel bp = b, bm = b;
    unpack_parameters(bp, plus);
    unpack_parameters(bm, minus);
    const INRModel* np[] = {&a, &bp};
    const INRModel* nm[] = {&a, &bm};
    const double fd = static_cast<double>((verify::reference_loss(np, d) - verify::reference_loss(nm, d)) /
                                          ((long double)plus[k] - minus[k]));
    if (std::abs(gb[k]) > 1e-8) EXPECT_LE(std::abs(gb[k] - fd), 1e-5 * std::abs(fd));
  }
}

TEST(Packing, RoundTrip) {
  std::mt19937_64 rng(5);
  for (auto c : {WeightConstraint::Free, WeightConstraint::ScaleOnly, WeightConstraint::UnitWeights}) {
    const auto m = random_model(gabor_template(2), c, 3, {4}, rng);
    const auto p = pack_parameters(m);
    EXPECT_EQ(p.size(), parameter_count(m));
    INRModel copy = make_model(gabor_template(2), c, 3, {4}, ActivationSpec::alternating_cubic());
    unpack_parameters(copy, p);
    EXPECT_EQ(copy, m);
    EXPECT_EQ(backward(m, random_dataset(2, 4, rng)).flatten().size(), p.size());
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> p{1.0, -2.0}, g{0.0, 0.0};
  AdamState s;
  adam_step(p, g, s, TrainConfig{});
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> p{0.5}, g{1.0};
  AdamState s;
  TrainConfig cfg;
  cfg.lr = 0.01;
  adam_step(p, g, s, cfg);
  EXPECT_NEAR(0.5 - p[0], 0.01, 1e-6);
}

TEST(Train, OverfitsSingleSample) {
  std::mt19937_64 rng(6);
  auto m = random_model(gabor_template(), WeightConstraint::ScaleOnly, 3, {4}, rng);
  Dataset d;
  d.points = {0.2};
  d.targets = {0.7};
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.lr = 2e-2;
  const auto h = train(m, d, cfg);
  EXPECT_EQ(h.loss.size(), 200u);
  EXPECT_LE(h.final_mse, 1e-6);
}

TEST(Train, ZeroLearningRateIsFlat) {
  std::mt19937_64 rng(7);
  auto m = random_model(gabor_template(), WeightConstraint::Free, 3, {4}, rng);
  const auto d = random_dataset(1, 16, rng);
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.lr = 0.0;
  const auto h = train(m, d, cfg);
  for (double l : h.loss) EXPECT_EQ(l, h.loss.front());
}

TEST(Train, Deterministic) {
  std::mt19937_64 r1(8), r2(8);
  auto a = random_model(gabor_template(), WeightConstraint::ScaleOnly, 3, {4, 4}, r1);
  auto b = random_model(gabor_template(), WeightConstraint::ScaleOnly, 3, {4, 4}, r2);
  const auto d = random_dataset(1, 32, r1);
  TrainConfig cfg;
  cfg.steps = 50;
  const auto ha = train(a, d, cfg), hb = train(b, d, cfg);
  EXPECT_EQ(ha.loss, hb.loss);
  EXPECT_EQ(a, b);
}

TEST(Train, ScalesStayPositiveAndLossFalls) {
  std::mt19937_64 rng(9);
  auto m = random_model(gabor_template(), WeightConstraint::ScaleOnly, 4, {6}, rng);
  const auto d = random_dataset(1, 64, rng);
  TrainConfig cfg;
  cfg.steps = 300;
  cfg.lr = 5e-2;
  const auto h = train(m, d, cfg);
  EXPECT_LT(h.final_mse, h.loss.front());
  for (std::size_t t = 0; t < 4; ++t) EXPECT_GT(m.first.weight(t, 0, 0), 0.0);
}

TEST(Train, NonFiniteLossAborts) {
  auto m = make_model(gabor_template(), WeightConstraint::Free, 1, {}, ActivationSpec::identity());
  Dataset d;
  d.points = {0.0};
  d.targets = {std::nan("")};
  try {
    train(m, d, TrainConfig{});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.step(), 0u);
  }
}

TEST(Train, FrozenFirstLayer) {
  std::mt19937_64 rng(10);
  auto m = random_model(gabor_template(), WeightConstraint::ScaleOnly, 3, {4}, rng);
  const auto before = m.first;
  TrainConfig cfg;
  cfg.steps = 10;
  cfg.train_first_layer = false;
  train(m, random_dataset(1, 16, rng), cfg);
  EXPECT_EQ(m.first, before);
}

TEST(FitLinear, RecoversSingleAtom) {
  FirstLayer f(gabor_template(), WeightConstraint::ScaleOnly, 3);
  const double centers[3] = {-4.0, 0.0, 4.0};
  for (std::size_t t = 0; t < 3; ++t) f.center_at(t, std::span<const double>(&centers[t], 1));
  Grid1D g{-8.0, 8.0, 512};
  std::vector<double> y(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double u = g.point(i) - centers[1];
    y[i] = eval_template(gabor_template(), u).real();
  }
  const auto fit = fit_linear(f, make_dataset(g, y));
  EXPECT_NEAR(std::abs(fit.coefficients[1] - Cplx(1.0, 0.0)), 0.0, 1e-8);
  EXPECT_LE(std::abs(fit.coefficients[0]), 1e-8);
  EXPECT_LE(std::abs(fit.coefficients[2]), 1e-8);
  EXPECT_LE(fit.mse, 1e-20);
}

TEST(FitLinear, ZeroTarget) {
  FirstLayer f(gabor_template(), WeightConstraint::ScaleOnly, 2);
  f.set_bias(1, 0, -1.0);
  Grid1D g{-4.0, 4.0, 128};
  const auto fit = fit_linear(f, make_dataset(g, std::vector<double>(g.n, 0.0)));
  for (const auto& c : fit.coefficients) EXPECT_EQ(std::abs(c), 0.0);
  EXPECT_EQ(fit.mse, 0.0);
}

TEST(FitLinear, MixedRealAndComplexLayers) {
  FirstLayer real(TemplateSpec::gaussian(1.0), WeightConstraint::ScaleOnly, 2);
  FirstLayer cplx(gabor_template(), WeightConstraint::ScaleOnly, 1);
  const double rc[2] = {-2.0, 2.0}, gc = 0.5;
  for (std::size_t t = 0; t < 2; ++t) real.center_at(t, std::span<const double>(&rc[t], 1));
  cplx.center_at(0, std::span<const double>(&gc, 1));
  Grid1D g{-6.0, 6.0, 400};
  std::vector<double> y(g.n);
  const Cplx c(0.7, -0.3);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.point(i);
    y[i] = 2.0 * eval_template(TemplateSpec::gaussian(1.0), x - rc[0]).real() +
           (c * eval_template(gabor_template(), x - gc)).real() + 0.25;
  }
  const FirstLayer* layers[] = {&real, &cplx};
  const auto fit = fit_linear(layers, make_dataset(g, y));
  ASSERT_EQ(fit.coefficients.size(), 3u);
  EXPECT_NEAR(std::abs(fit.coefficients[0] - Cplx(2.0, 0.0)), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(fit.coefficients[1]), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(fit.coefficients[2] - c), 0.0, 1e-8);
  EXPECT_NEAR(fit.constant.real(), 0.25, 1e-8);
}

TEST(FitLinear, RankDeficiencyPropagates) {
  FirstLayer f(gabor_template(), WeightConstraint::ScaleOnly, 2);
  Grid1D g{-4.0, 4.0, 128};
  EXPECT_THROW(fit_linear(f, make_dataset(g, std::vector<double>(g.n, 1.0))), SingularError);
}
