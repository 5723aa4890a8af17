#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "winr/init.hpp"

using namespace winr;

namespace {

// O(n^2) direct sum of the CWT definition.
Cplx direct_cwt(const std::vector<double>& f, double s, std::size_t u, const TemplateSpec& mother) {
  Cplx acc = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x)
    acc += f[x] * std::conj(eval_template(mother, (static_cast<double>(x) - static_cast<double>(u)) / s));
  return acc / std::sqrt(s);
}

std::vector<double> step_signal(std::size_t n, std::vector<std::size_t> at) {
  std::vector<double> f(n, 0.0);
  for (auto a : at)
    for (std::size_t i = a; i < n; ++i) f[i] += 1.0;
  return f;
}

WMMPointSet detect(const std::vector<double>& f) { return wmm_points_1d(cwt_1d(f, dyadic_scales())); }

double angle_mod_pi(double a) {
  a = std::fmod(a, std::numbers::pi);
  if (a < 0) a += std::numbers::pi;
  return a;
}

InitArch arch_1d(std::size_t f1) {
  InitArch a;
  a.first_width = f1;
  a.hidden_widths = {8, 8};
  a.coord_scale = 16.0;
  return a;
}

}  // namespace

TEST(Cwt, ZeroSignalGivesZeroGrid) {
  const auto c = cwt_1d(std::vector<double>(64, 0.0), dyadic_scales(2.0, 4));
  for (const auto& z : c.coefficients.data()) EXPECT_EQ(z, Cplx(0.0));
}

TEST(Cwt, Linear) {
  Rng rng(3);
  std::vector<double> f(128), g(128), h(128);
  for (std::size_t i = 0; i < 128; ++i) {
    f[i] = rng.uniform(-1, 1);
    g[i] = rng.uniform(-1, 1);
    h[i] = 2.5 * f[i] - 0.75 * g[i];
  }
  const auto s = dyadic_scales(2.0, 5);
  const auto cf = cwt_1d(f, s), cg = cwt_1d(g, s), ch = cwt_1d(h, s);
  for (std::size_t k = 0; k < ch.coefficients.data().size(); ++k)
    EXPECT_NEAR(std::abs(ch.coefficients.data()[k] - (2.5 * cf.coefficients.data()[k] - 0.75 * cg.coefficients.data()[k])),
                0.0, 1e-10);
}

TEST(Cwt, MatchesDirectSum) {
  Rng rng(11);
  std::vector<double> f(64);
  for (auto& v : f) v = rng.uniform(-1, 1);
  const auto s = dyadic_scales(2.0, 5);
  const auto c = cwt_1d(f, s);
  for (std::size_t j = 0; j < s.size(); ++j) {
    double num = 0.0, den = 0.0;
    for (std::size_t u = 0; u < f.size(); ++u) {
      const Cplx ref = direct_cwt(f, s[j], u, c.mother);
      num = std::max(num, std::abs(c.coefficients(j, u) - ref));
      den = std::max(den, std::abs(ref));
    }
    EXPECT_LE(num / den, 1e-8) << "scale " << s[j];
  }
}

TEST(Cwt, ImpulseModulusPeaksAtImpulse) {
  const std::size_t n = 256, x0 = 97;
  std::vector<double> f(n, 0.0);
  f[x0] = 1.0;
  const auto c = cwt_1d(f, dyadic_scales(2.0, 5));
  for (std::size_t j = 0; j < c.levels(); ++j) {
    std::size_t arg = 0;
    for (std::size_t u = 0; u < n; ++u)
      if (std::abs(c.coefficients(j, u)) > std::abs(c.coefficients(j, arg))) arg = u;
    EXPECT_LE(std::abs(static_cast<long>(arg) - static_cast<long>(x0)), 1) << "scale " << c.scales[j];
  }
}

TEST(Cwt, RejectsUnresolvableScale) {
  const std::vector<double> f(64, 1.0);
  const std::vector<double> s{1.5, 4.0};
  try {
    cwt_1d(f, s);
    FAIL();
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("minimum"), std::string::npos);
  }
  EXPECT_THROW(cwt_1d(std::vector<double>(100, 1.0), dyadic_scales()), SizeError);
}

TEST(Wmm, SingleStepGivesOnePoint) {
  const std::size_t n = 1024, x0 = 431;
  const auto w = detect(step_signal(n, {x0}));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_LE(std::abs(static_cast<long>(w.points[0].index) - static_cast<long>(x0)), 2);
  EXPECT_NEAR(w.points[0].location[0], static_cast<double>(w.points[0].index) / n, 1e-15);
  EXPECT_GT(w.points[0].strength, 0.0);
}

TEST(Wmm, SmoothGaussianGivesEmptySet) {
  const std::size_t n = 2048;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) - 1024.0) / 600.0;
    f[i] = std::exp(-t * t / 2);
  }
  EXPECT_TRUE(detect(f).empty());
}

TEST(Wmm, TwoStepsInOrder) {
  const std::size_t n = 2048;
  const auto w = detect(step_signal(n, {700, 700 + 410}));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_LT(w.points[0].location[0], w.points[1].location[0]);
  EXPECT_NEAR(w.points[1].location[0] - w.points[0].location[0], 0.2, 3.0 / n);
}

TEST(Wmm, TranslationCovariant) {
  const std::size_t n = 1024;
  const auto a = detect(step_signal(n, {300, 420, 650}));
  for (std::size_t delta : {1u, 5u, 37u}) {
    const auto b = detect(step_signal(n, {300 + delta, 420 + delta, 650 + delta}));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      EXPECT_LE(std::abs(static_cast<long>(b.points[i].index) - static_cast<long>(a.points[i].index + delta)), 1);
  }
}

TEST(Wmm, PersistenceBounds) {
  const auto c = cwt_1d(step_signal(256, {100}), dyadic_scales(2.0, 4));
  EXPECT_THROW(wmm_points_1d(c, 5), std::invalid_argument);
  EXPECT_THROW(wmm_points_1d(c, 0), std::invalid_argument);
  EXPECT_EQ(wmm_points_1d(c, 4).size(), 1u);
}

TEST(Canny, ConstantImageHasNoEdges) {
  const Image img(32, 32, 0.7);
  EXPECT_EQ(canny_edges(img).count(), 0u);
}

TEST(Canny, CircleEdgesAndRadialOrientation) {
  const std::size_t n = 128;
  const double c = 63.5, r = 32.0;
  Image img(n, n);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) img(x, y) = std::hypot(x - c, y - c) <= r ? 1.0 : 0.0;
  const auto e = canny_edges(img);
  std::size_t total = 0, near = 0, aligned = 0;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      if (!e.at(x, y)) continue;
      ++total;
      if (std::abs(std::hypot(x - c, y - c) - r) <= 1.0) ++near;
      const double radial = angle_mod_pi(std::atan2(y - c, x - c));
      const double diff = std::abs(angle_mod_pi(e.orientation[y * n + x]) - radial);
      if (std::min(diff, std::numbers::pi - diff) <= 15.0 * std::numbers::pi / 180.0) ++aligned;
    }
  ASSERT_GT(total, 100u);
  EXPECT_GE(near, 0.9 * total);
  EXPECT_GE(aligned, 0.9 * total);
}

TEST(Canny, VerticalStep) {
  Image img(64, 64);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 32; x < 64; ++x) img(x, y) = 1.0;
  const auto e = canny_edges(img);
  ASSERT_GT(e.count(), 0u);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 0; x < 64; ++x)
      if (e.at(x, y)) {
        EXPECT_LE(std::abs(static_cast<double>(x) - 31.5), 1.5);
        EXPECT_NEAR(e.orientation[y * 64 + x], 0.0, 1e-12);
      }
}

TEST(Canny, HysteresisDefinition) {
  Rng rng(5);
  Image img(48, 48);
  for (std::size_t y = 0; y < 48; ++y)
    for (std::size_t x = 0; x < 48; ++x)
      img(x, y) = (x > 20 ? 1.0 : 0.0) + 0.3 * (std::hypot(x - 10.0, y - 30.0) < 6 ? 1.0 : 0.0) + 0.05 * rng.uniform();
  const CannyParams p;
  const auto e = canny_edges(img, p);
  const double gmax = *std::max_element(e.magnitude.begin(), e.magnitude.end());
  std::vector<int> label(e.mask.size(), -1);
  for (std::size_t i = 0; i < e.mask.size(); ++i) {
    if (!e.mask[i]) continue;
    EXPECT_GE(e.magnitude[i], p.low * gmax);
    if (label[i] >= 0) continue;
    bool strong = false;
    std::vector<std::size_t> stack{i};
    label[i] = 1;
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      strong = strong || e.magnitude[k] >= p.high * gmax;
      const long x = static_cast<long>(k % 48), y = static_cast<long>(k / 48);
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          const long X = x + dx, Y = y + dy;
          if (X < 0 || Y < 0 || X >= 48 || Y >= 48) continue;
          const auto j = static_cast<std::size_t>(Y * 48 + X);
          if (e.mask[j] && label[j] < 0) {
            label[j] = 1;
            stack.push_back(j);
          }
        }
    }
    EXPECT_TRUE(strong) << "component at pixel " << i;
  }
}

TEST(Canny, RejectsSmallImagesAndBadParams) {
  EXPECT_THROW(canny_edges(Image(8, 32)), SizeError);
  EXPECT_THROW(canny_edges(Image(32, 32), CannyParams{1.4, 0.3, 0.2}), std::invalid_argument);
}

TEST(EdgePoints, StrideSelectsExactlyM) {
  Image img(64, 64);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 32; x < 64; ++x) img(x, y) = 1.0;
  const auto e = canny_edges(img);
  const Grid2D g{{-1.0, 1.0, 64}, {-1.0, 1.0, 64}};
  const auto a = edge_points(e, g, 7), b = edge_points(e, g, 7);
  ASSERT_EQ(a.size(), 7u);
  EXPECT_EQ(a.dim, 2);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(a.points[i].index, b.points[i].index);
    EXPECT_TRUE(e.mask[a.points[i].index]);
    if (i > 0) EXPECT_GT(a.points[i].index, a.points[i - 1].index);
  }
  EXPECT_EQ(edge_points(e, g, 500).size(), 500u);
}

TEST(WmmInit, OnePointThreeAtoms) {
  WMMPointSet w;
  w.points.push_back({{0.5, 0.0}, 0.01, 1.0, 0.0, 512});
  const auto arch = arch_1d(3);
  const auto f = wmm_initialize(arch, w, 3, 42);
  ASSERT_EQ(f.atoms(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    const double s = f.weight(t, 0, 0);
    EXPECT_GE(s, 1.0);
    EXPECT_LE(s, 3.0);
    EXPECT_NEAR(-f.bias(t, 0) / s, arch.coord_scale * 0.5, 1e-12);
  }
}

TEST(WmmInit, KOneGivesDeterministicAbscissa) {
  WMMPointSet w;
  for (double u : {0.125, 0.25, 0.625, 0.875}) w.points.push_back({{u, 0.0}, 0.01, 1.0, 0.0, 0});
  auto arch = arch_1d(4);
  arch.coord_scale = 1.0;
  for (std::uint64_t seed : {0u, 9u}) {
    const auto f = wmm_initialize(arch, w, 1, seed);
    for (std::size_t t = 0; t < 4; ++t) {
      EXPECT_EQ(f.weight(t, 0, 0), 1.0);
      EXPECT_EQ(-f.bias(t, 0), w.points[t].location[0]);
    }
  }
}

TEST(WmmInit, DeterministicAndWidthChecked) {
  WMMPointSet w;
  for (double u : {0.2, 0.7}) w.points.push_back({{u, 0.0}, 0.01, 1.0, 0.0, 0});
  const auto arch = arch_1d(10);
  EXPECT_EQ(wmm_initialize(arch, w, 5, 7), wmm_initialize(arch, w, 5, 7));
  EXPECT_NE(wmm_initialize(arch, w, 5, 7), wmm_initialize(arch, w, 5, 8));
  EXPECT_THROW(wmm_initialize(arch, w, 3, 7), SizeError);
}

TEST(WmmInit, EmptySetFallsBackToRandom) {
  const auto arch = arch_1d(6);
  std::string warning;
  const auto f = wmm_initialize(arch, WMMPointSet{}, 3, 4, &warning);
  EXPECT_FALSE(warning.empty());
  EXPECT_EQ(f, random_initialize(arch, 3, 4));
}

TEST(WmmInit, TwoDimensionalAtomsAreIsotropic) {
  InitArch arch;
  arch.tmpl = gabor_template(2);
  arch.constraint = WeightConstraint::Free;
  arch.domain.dim = 2;
  arch.first_width = 6;
  WMMPointSet w;
  w.dim = 2;
  w.points.push_back({{0.25, 0.75}, 0.01, 1.0, 0.3, 0});
  w.points.push_back({{0.5, 0.1}, 0.01, 1.0, 1.3, 0});
  const auto f = wmm_initialize(arch, w, 3, 1);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_EQ(f.weight(t, 0, 1), 0.0);
    EXPECT_EQ(f.weight(t, 1, 0), 0.0);
    EXPECT_EQ(f.weight(t, 0, 0), f.weight(t, 1, 1));
    const auto& loc = w.points[t / 3].location;
    EXPECT_NEAR(-f.bias(t, 0) / f.weight(t, 0, 0), loc[0], 1e-12);
    EXPECT_NEAR(-f.bias(t, 1) / f.weight(t, 1, 1), loc[1], 1e-12);
  }
}

TEST(RandomInit, SeedDeterminismAndBounds) {
  auto arch = arch_1d(50);
  arch.domain.lo[0] = -2.0;
  arch.domain.hi[0] = 3.0;
  const auto a = random_initialize(arch, 5, 1), b = random_initialize(arch, 5, 1);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, random_initialize(arch, 5, 2));
  for (std::size_t t = 0; t < 50; ++t) {
    const double s = a.weight(t, 0, 0);
    EXPECT_GE(s, 1.0);
    EXPECT_LE(s, 5.0);
    const double c = -a.bias(t, 0) / s / arch.coord_scale;
    EXPECT_GE(c, -2.0 - 1e-12);
    EXPECT_LE(c, 3.0 + 1e-12);
  }
}

TEST(RandomInit, AbscissaMeanNearMidpoint) {
  auto arch = arch_1d(10000);
  arch.coord_scale = 1.0;
  const auto f = random_initialize(arch, 1, 123);
  double mean = 0.0;
  for (std::size_t t = 0; t < f.atoms(); ++t) mean += -f.bias(t, 0);
  mean /= static_cast<double>(f.atoms());
  const double se = std::sqrt(1.0 / 12.0 / 10000.0);
  EXPECT_LE(std::abs(mean - 0.5), 3.0 * se);
}

TEST(DenseInit, RangesAndSchemeIndependence) {
  WMMPointSet w;
  w.points.push_back({{0.3, 0.0}, 0.01, 1.0, 0.0, 0});
  w.points.push_back({{0.6, 0.0}, 0.01, 1.0, 0.0, 0});
  const auto arch = arch_1d(6);
  const auto mw = build_model(arch, wmm_initialize(arch, w, 3, 9), 9);
  const auto mr = build_model(arch, random_initialize(arch, 3, 9), 9);
  EXPECT_EQ(mw.hidden, mr.hidden);
  EXPECT_EQ(mw.output, mr.output);
  for (const auto& h : mw.hidden) {
    const double a = 1.0 / std::sqrt(static_cast<double>(h.weights.cols()));
    for (const auto& z : h.weights.data()) {
      EXPECT_LE(std::abs(z.real()), a);
      EXPECT_LE(std::abs(z.imag()), a);
    }
  }
  const double a = 1.0 / std::sqrt(8.0);
  for (const auto& z : mw.output.weights.data()) EXPECT_LE(std::abs(z.real()), a);
}
