#pragma once

// Complex arithmetic, radix-2 FFTs, the discrete Hilbert transform and a
// Householder least-squares solver. Everything here is a pure function of its
// inputs.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace winr {

using Cplx = std::complex<double>;

class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularError : public std::runtime_error {
 public:
  SingularError(const std::string& what, std::size_t column)
      : std::runtime_error(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

inline bool is_pow2(std::size_t n) noexcept { return n != 0 && std::has_single_bit(n); }

/// Dense row-major complex matrix.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols, Cplx fill = {})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw SizeError("CMatrix: rows and cols must be positive");
  }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Cplx> data() noexcept { return data_; }
  std::span<const Cplx> data() const noexcept { return data_; }

  std::vector<Cplx> apply(std::span<const Cplx> x) const {
    if (x.size() != cols_) throw SizeError("CMatrix::apply: dimension mismatch");
    std::vector<Cplx> y(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      Cplx acc{};
      for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
      y[r] = acc;
    }
    return y;
  }

  /// Conjugate transpose applied to a vector.
  std::vector<Cplx> apply_adjoint(std::span<const Cplx> y) const {
    if (y.size() != rows_) throw SizeError("CMatrix::apply_adjoint: dimension mismatch");
    std::vector<Cplx> x(cols_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) x[c] += std::conj((*this)(r, c)) * y[r];
    return x;
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Cplx> data_;
};

/// Maps bin k of an n-point transform over a length-T domain to its frequency.
inline double bin_frequency(std::size_t k, std::size_t n, double length) {
  const double kk = k < n / 2 ? static_cast<double>(k)
                              : static_cast<double>(k) - static_cast<double>(n);
  return kk / length;
}

/// Uniform periodic sampling of [lo, hi): x_i = lo + i (hi - lo) / n.
struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 2;

  void validate() const {
    if (n < 2 || !is_pow2(n))
      throw SizeError("Grid1D: n must be a power of two >= 2, got " + std::to_string(n));
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("Grid1D: need finite lo < hi");
  }
  double length() const noexcept { return hi - lo; }
  double spacing() const noexcept { return (hi - lo) / static_cast<double>(n); }
  double point(std::size_t i) const noexcept { return lo + static_cast<double>(i) * spacing(); }
  double frequency(std::size_t k) const noexcept { return bin_frequency(k, n, length()); }
  double nyquist() const noexcept { return static_cast<double>(n) / (2.0 * length()); }

  std::vector<double> points() const {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = point(i);
    return p;
  }
};

/// Tensor grid; raster order is row-major with y as the slow axis.
struct Grid2D {
  Grid1D x;
  Grid1D y;

  void validate() const {
    x.validate();
    y.validate();
  }
  std::size_t size() const noexcept { return x.n * y.n; }

  /// Interleaved (x, y) coordinates in raster order.
  std::vector<double> points() const {
    std::vector<double> p;
    p.reserve(2 * size());
    for (std::size_t iy = 0; iy < y.n; ++iy)
      for (std::size_t ix = 0; ix < x.n; ++ix) {
        p.push_back(x.point(ix));
        p.push_back(y.point(iy));
      }
    return p;
  }
};

/// Real raster image, row-major with y as the slow axis (matches Grid2D).
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(w * h, fill) {}

  double& operator()(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  double operator()(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  std::size_t size() const noexcept { return pixels.size(); }
  friend bool operator==(const Image&, const Image&) = default;
};

/// Separable gaussian blur with edge replication; kernel radius ceil(3 sigma).
inline Image gaussian_blur(const Image& img, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[static_cast<std::size_t>(i + r)] = std::exp(-i * i / (2.0 * sigma * sigma));
  for (auto& v : k) v /= sum;
  const auto w = static_cast<long>(img.width), h = static_cast<long>(img.height);
  const auto clampi = [](long v, long n) { return std::clamp(v, 0L, n - 1); };
  Image tmp(img.width, img.height), out(img.width, img.height);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i)
        acc += k[static_cast<std::size_t>(i + r)] * img(static_cast<std::size_t>(clampi(x + i, w)), static_cast<std::size_t>(y));
      tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
    }
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i)
        acc += k[static_cast<std::size_t>(i + r)] * tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(clampi(y + i, h)));
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
    }
  return out;
}

namespace detail {

inline void fft_inplace(std::span<Cplx> a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_pow2(n)) throw SizeError("fft: length must be a power of two, got " + std::to_string(n));
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  // Twiddles from direct evaluation rather than recurrence, for accuracy.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Cplx> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k)
    tw[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                                static_cast<double>(n));

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const Cplx w = tw[j * stride];
        const Cplx u = a[i + j];
        const Cplx v = a[i + j + half] * w;
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= inv;
  }
}

}  // namespace detail

/// Unnormalized forward DFT (kernel e^{-2 pi i k m / n}); the inverse divides by n.
inline std::vector<Cplx> fft_1d(std::vector<Cplx> values, bool inverse = false) {
  if (values.empty()) throw SizeError("fft: empty input");
  detail::fft_inplace(values, inverse);
  return values;
}

/// Row-column 2D transform of a rows x cols grid.
inline CMatrix fft_2d(CMatrix grid, bool inverse = false) {
  const std::size_t rows = grid.rows(), cols = grid.cols();
  if (!is_pow2(rows) || !is_pow2(cols))
    throw SizeError("fft_2d: dimensions must be powers of two, got " + std::to_string(rows) +
                    "x" + std::to_string(cols));
  auto data = grid.data();
  for (std::size_t r = 0; r < rows; ++r) detail::fft_inplace(data.subspan(r * cols, cols), inverse);
  std::vector<Cplx> column(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = grid(r, c);
    detail::fft_inplace(column, inverse);
    for (std::size_t r = 0; r < rows; ++r) grid(r, c) = column[r];
  }
  return grid;
}

/// Analytic signal x + iH(x): negative-frequency bins zeroed, positive bins
/// doubled, DC and Nyquist kept at unit gain. "Positive" follows the fft_1d
/// kernel, so cos(2 pi k t) maps to exp(+2 pi i k t).
inline std::vector<Cplx> hilbert_transform(std::span<const double> values) {
  const std::size_t n = values.size();
  if (!is_pow2(n)) throw SizeError("hilbert_transform: length must be a power of two");
  std::vector<Cplx> spec(values.begin(), values.end());
  detail::fft_inplace(spec, false);
  if (n > 1) {
    for (std::size_t k = 1; k < n / 2; ++k) spec[k] *= 2.0;
    for (std::size_t k = n / 2 + 1; k < n; ++k) spec[k] = 0.0;
  }
  detail::fft_inplace(spec, true);
  return spec;
}

/// Least squares min ||design c - targets||^2 by Householder QR.
/// Throws SingularError naming the first column that is numerically dependent
/// on its predecessors.
inline std::vector<Cplx> lstsq(const CMatrix& design, std::span<const Cplx> targets) {
  const std::size_t m = design.rows(), n = design.cols();
  if (design.empty()) throw SizeError("lstsq: empty design");
  if (targets.size() != m) throw SizeError("lstsq: targets length must equal design rows");
  if (m < n) throw SizeError("lstsq: need rows >= cols");

  CMatrix a = design;
  std::vector<Cplx> b(targets.begin(), targets.end());

  double max_col_norm = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += std::norm(a(r, c));
    max_col_norm = std::max(max_col_norm, std::sqrt(s));
  }
  const double rank_tol = 1e-10 * std::max(max_col_norm, 1e-300);

  std::vector<Cplx> v(m);
  for (std::size_t k = 0; k < n; ++k) {
    double norm_x = 0.0;
    for (std::size_t r = k; r < m; ++r) norm_x += std::norm(a(r, k));
    norm_x = std::sqrt(norm_x);
    if (norm_x <= rank_tol)
      throw SingularError("lstsq: design is rank deficient at column " + std::to_string(k), k);

    const Cplx x0 = a(k, k);
    const Cplx phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Cplx(1.0);
    const Cplx alpha = -phase * norm_x;

    double vnorm2 = 0.0;
    for (std::size_t r = k; r < m; ++r) {
      v[r] = a(r, k) - (r == k ? alpha : Cplx{});
      vnorm2 += std::norm(v[r]);
    }
    if (vnorm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(vnorm2);
      for (std::size_t r = k; r < m; ++r) v[r] *= inv;
      // A <- (I - 2 v v^H) A on the trailing block, b likewise.
      for (std::size_t c = k + 1; c < n; ++c) {
        Cplx dot{};
        for (std::size_t r = k; r < m; ++r) dot += std::conj(v[r]) * a(r, c);
        for (std::size_t r = k; r < m; ++r) a(r, c) -= 2.0 * v[r] * dot;
      }
      Cplx dot{};
      for (std::size_t r = k; r < m; ++r) dot += std::conj(v[r]) * b[r];
      for (std::size_t r = k; r < m; ++r) b[r] -= 2.0 * v[r] * dot;
    }
    a(k, k) = alpha;
    for (std::size_t r = k + 1; r < m; ++r) a(r, k) = 0.0;
  }

  std::vector<Cplx> coef(n);
  for (std::size_t i = n; i-- > 0;) {
    Cplx acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * coef[c];
    coef[i] = acc / a(i, i);
  }
  return coef;
}

inline double l2_norm(std::span<const Cplx> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace winr
