#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "winr/numerics.hpp"
#include "winr/templates.hpp"

using namespace winr;

namespace {

std::vector<Cplx> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<Cplx> v(n);
  for (auto& z : v) z = {nd(rng), nd(rng)};
  return v;
}

double rel_err(std::span<const Cplx> a, std::span<const Cplx> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

// Independent O(n^2) DFT.
std::vector<Cplx> naive_dft(const std::vector<Cplx>& x) {
  const std::size_t n = x.size();
  std::vector<Cplx> out(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m < n; ++m)
      out[k] += x[m] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * m % n) / double(n));
  return out;
}

}  // namespace

TEST(Fft1d, ImpulseIsFlat) {
  const auto out = fft_1d({1.0, 0.0, 0.0, 0.0});
  for (const auto& z : out) EXPECT_EQ(z, Cplx(1.0, 0.0));
}

TEST(Fft1d, MatchesNaiveDft) {
  std::mt19937_64 rng(1);
  const auto x = random_vector(64, rng);
  EXPECT_LT(rel_err(fft_1d(x), naive_dft(x)), 1e-13);
}

TEST(Fft1d, RoundTripAndParseval) {
  std::mt19937_64 rng(2);
  for (std::size_t n : {2u, 16u, 1024u}) {
    const auto x = random_vector(n, rng);
    const auto X = fft_1d(x);
    EXPECT_LT(rel_err(fft_1d(X, true), x), 1e-12);
    double ex = 0.0, eX = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ex += std::norm(x[i]);
      eX += std::norm(X[i]);
    }
    EXPECT_NEAR(eX / double(n), ex, 1e-12 * ex);
  }
}

TEST(Fft1d, Linearity) {
  std::mt19937_64 rng(3);
  const auto x = random_vector(256, rng), y = random_vector(256, rng);
  const Cplx a(0.3, -1.2), b(-2.0, 0.5);
  std::vector<Cplx> combo(256), expect(256);
  const auto X = fft_1d(x), Y = fft_1d(y);
  for (std::size_t i = 0; i < 256; ++i) {
    combo[i] = a * x[i] + b * y[i];
    expect[i] = a * X[i] + b * Y[i];
  }
  EXPECT_LT(rel_err(fft_1d(combo), expect), 1e-12);
}

TEST(Fft1d, RejectsNonPowerOfTwo) {
  EXPECT_THROW(fft_1d(std::vector<Cplx>(6)), SizeError);
  EXPECT_THROW(fft_1d(std::vector<Cplx>{}), SizeError);
}

TEST(Fft2d, ImpulseSeparableAndRoundTrip) {
  CMatrix imp(8, 4);
  imp(0, 0) = 1.0;
  const auto flat = fft_2d(imp);
  for (const auto& z : flat.data()) EXPECT_EQ(z, Cplx(1.0, 0.0));

  std::mt19937_64 rng(4);
  const auto f = random_vector(8, rng), g = random_vector(16, rng);
  CMatrix m(16, 8);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 8; ++c) m(r, c) = g[r] * f[c];
  const auto M = fft_2d(m);
  const auto F = fft_1d(f), G = fft_1d(g);
  CMatrix outer(16, 8);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 8; ++c) outer(r, c) = G[r] * F[c];
  EXPECT_LT(rel_err(M.data(), outer.data()), 1e-12);
  EXPECT_LT(rel_err(fft_2d(M, true).data(), m.data()), 1e-12);
  EXPECT_THROW(fft_2d(CMatrix(6, 4)), SizeError);
}

TEST(Hilbert, CosineBecomesAnalytic) {
  const std::size_t n = 512;
  for (int k : {1, 7, 100}) {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = std::cos(2.0 * std::numbers::pi * k * double(i) / double(n));
    const auto a = hilbert_transform(c);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      err = std::max(err, std::abs(a[i] - std::polar(1.0, 2.0 * std::numbers::pi * k * double(i) / double(n))));
    EXPECT_LE(err, 1e-10) << "k=" << k;
  }
}

TEST(Hilbert, ConstantUnchanged) {
  const auto a = hilbert_transform(std::vector<double>(64, 2.5));
  for (const auto& z : a) {
    EXPECT_NEAR(z.real(), 2.5, 1e-14);
    EXPECT_NEAR(z.imag(), 0.0, 1e-14);
  }
}

TEST(Hilbert, NegativeBinsVanish) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> x(128);
  for (auto& v : x) v = nd(rng);
  const auto spec = fft_1d(hilbert_transform(x));
  for (std::size_t k = 65; k < 128; ++k) EXPECT_LT(std::abs(spec[k]), 1e-12);
}

TEST(Hilbert, GaborRealPartRecoversImaginaryPart) {
  // The templates oscillate as exp(-i 2 pi w x), so Im = -H(Re).
  const auto spec = gabor_template();
  Grid1D g{-8.0, 8.0, 4096};
  std::vector<double> re(g.n);
  std::vector<double> im(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const Cplx v = eval_template(spec, g.point(i));
    re[i] = v.real();
    im[i] = v.imag();
  }
  const auto a = hilbert_transform(re);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    num += std::pow(-a[i].imag() - im[i], 2);
    den += im[i] * im[i];
  }
  EXPECT_LE(std::sqrt(num / den), 1e-3);
}

TEST(Lstsq, IdentityDesign) {
  const std::vector<Cplx> t{{1, 2}, {-3, 0.5}, {0, -1}};
  const auto c = lstsq(CMatrix::identity(3), t);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(c[i] - t[i]), 0.0, 1e-14);
}

TEST(Lstsq, ExactSpanHasNoResidual) {
  std::mt19937_64 rng(6);
  CMatrix a(20, 4);
  const auto v = random_vector(80, rng);
  std::copy(v.begin(), v.end(), a.data().begin());
  const auto coef = random_vector(4, rng);
  const auto t = a.apply(coef);
  const auto c = lstsq(a, t);
  auto fit = a.apply(c);
  for (std::size_t i = 0; i < fit.size(); ++i) fit[i] -= t[i];
  EXPECT_LE(l2_norm(fit), 1e-10);
}

TEST(Lstsq, MatchesNormalEquations) {
  std::mt19937_64 rng(7);
  CMatrix a(64, 8);
  const auto v = random_vector(64 * 8, rng);
  std::copy(v.begin(), v.end(), a.data().begin());
  const auto t = random_vector(64, rng);
  const auto c = lstsq(a, t);

  // Oracle: Gauss-Jordan on A^H A c = A^H t.
  std::vector<std::vector<Cplx>> n(8, std::vector<Cplx>(9));
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t r = 0; r < 64; ++r) n[i][j] += std::conj(a(r, i)) * a(r, j);
    for (std::size_t r = 0; r < 64; ++r) n[i][8] += std::conj(a(r, i)) * t[r];
  }
  for (std::size_t p = 0; p < 8; ++p) {
    for (std::size_t r = 0; r < 8; ++r) {
      if (r == p) continue;
      const Cplx f = n[r][p] / n[p][p];
      for (std::size_t j = p; j < 9; ++j) n[r][j] -= f * n[p][j];
    }
  }
  for (std::size_t i = 0; i < 8; ++i) EXPECT_LT(std::abs(c[i] - n[i][8] / n[i][i]), 1e-8);

  auto res = a.apply(c);
  for (std::size_t i = 0; i < 64; ++i) res[i] = t[i] - res[i];
  const auto ortho = a.apply_adjoint(res);
  for (const auto& z : ortho) EXPECT_LE(std::abs(z), 1e-8 * l2_norm(t));
}

TEST(Lstsq, RankDeficiencyNamesColumn) {
  CMatrix a(5, 3);
  for (std::size_t r = 0; r < 5; ++r) {
    a(r, 0) = double(r + 1);
    a(r, 1) = double(r * r);
    a(r, 2) = 2.0 * a(r, 0);
  }
  try {
    lstsq(a, std::vector<Cplx>(5, 1.0));
    FAIL() << "expected SingularError";
  } catch (const SingularError& e) {
    EXPECT_EQ(e.column(), 2u);
  }
  EXPECT_THROW(lstsq(CMatrix(2, 3), std::vector<Cplx>(2)), SizeError);
}

TEST(Grid, FrequencyMapping) {
  Grid1D g{0.0, 2.0, 8};
  EXPECT_DOUBLE_EQ(g.frequency(1), 0.5);
  EXPECT_DOUBLE_EQ(g.frequency(4), -2.0);
  EXPECT_DOUBLE_EQ(g.frequency(7), -0.5);
  EXPECT_DOUBLE_EQ(g.nyquist(), 2.0);
  EXPECT_THROW((Grid1D{0.0, 1.0, 12}.validate()), SizeError);
  EXPECT_THROW((Grid1D{0.0, 1.0, 1}.validate()), SizeError);
}
