#pragma once

// Polynomial expansion of an INR with polynomial activations over its
// first-layer atoms a_t(r) = psi(W_t r + b_t):
//
//   f(r) = sum_k sum_{l in Delta(F1, k)} beta_l prod_t a_t(r)^{l_t},
//
// where Delta(F1, k) holds the ordered F1-tuples of non-negative integers
// summing to k, and k runs up to K^(L-1). Also the box bound on the
// effective Fourier support of each monomial.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "winr/model.hpp"
#include "winr/numerics.hpp"
#include "winr/spectrum.hpp"
#include "winr/templates.hpp"

namespace winr {

using MultiIndex = std::vector<std::uint32_t>;

inline std::uint32_t order(const MultiIndex& l) {
  std::uint32_t k = 0;
  for (auto v : l) k += v;
  return k;
}

class ExpansionSizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class UnsupportedActivationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kMaxMultiIndices = 10'000'000;

/// |Delta(F1, k)| = C(k + F1 - 1, F1 - 1), saturating at SIZE_MAX.
inline std::size_t multiindex_count(std::size_t atoms, std::size_t k) {
  if (atoms == 0) return 0;
  // C(k + F1 - 1, min(k, F1 - 1)) built incrementally; each prefix is an integer.
  const std::size_t m = std::min(k, atoms - 1);
  const std::size_t top = k + atoms - 1;
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= m; ++i) {
    c = c * (top - m + i) / i;
    if (c > std::numeric_limits<std::size_t>::max()) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(c);
}

/// Delta(F1, k) in descending lexicographic order, e.g. Delta(2,2) = [2,0],[1,1],[0,2].
inline std::vector<MultiIndex> enumerate_multiindices(std::size_t atoms, std::size_t k) {
  if (atoms == 0) throw std::invalid_argument("enumerate_multiindices: F1 must be >= 1");
  const std::size_t count = multiindex_count(atoms, k);
  if (count > kMaxMultiIndices)
    throw ExpansionSizeError("enumerate_multiindices: |Delta(" + std::to_string(atoms) + ", " +
                             std::to_string(k) + ")| exceeds " + std::to_string(kMaxMultiIndices));
  std::vector<MultiIndex> out;
  out.reserve(count);
  MultiIndex cur(atoms, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t pos, std::uint32_t left) {
    if (pos + 1 == atoms) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (std::uint32_t v = left + 1; v-- > 0;) {
      cur[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, static_cast<std::uint32_t>(k));
  return out;
}

namespace detail {

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& l) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : l) {
      h ^= v;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

using Poly = std::unordered_map<MultiIndex, Cplx, MultiIndexHash>;

inline constexpr double kPruneTol = 1e-14;

inline void prune(Poly& p) {
  std::erase_if(p, [](const auto& kv) { return std::abs(kv.second) < kPruneTol; });
}

inline Poly poly_mul(const Poly& a, const Poly& b, std::size_t atoms) {
  Poly out;
  MultiIndex key(atoms);
  for (const auto& [la, ca] : a)
    for (const auto& [lb, cb] : b) {
      for (std::size_t t = 0; t < atoms; ++t) key[t] = la[t] + lb[t];
      out[key] += ca * cb;
    }
  prune(out);
  return out;
}

inline void poly_axpy(Poly& acc, Cplx s, const Poly& p) {
  for (const auto& [l, c] : p) acc[l] += s * c;
}

inline void poly_add_constant(Poly& p, Cplx c, std::size_t atoms) { p[MultiIndex(atoms, 0)] += c; }

// Horner evaluation of a polynomial activation on a polynomial argument.
inline Poly poly_compose(const ActivationSpec& act, const Poly& x, std::size_t atoms) {
  if (act.kind == ActivationKind::Identity) return x;
  Poly acc;
  poly_add_constant(acc, act.coeffs.back(), atoms);
  for (std::size_t k = act.coeffs.size() - 1; k-- > 0;) {
    acc = poly_mul(acc, x, atoms);
    poly_add_constant(acc, act.coeffs[k], atoms);
    prune(acc);
  }
  return acc;
}

inline bool descending_lex(const MultiIndex& a, const MultiIndex& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), std::greater<>{});
}

}  // namespace detail

struct ExpansionTerm {
  MultiIndex index;
  Cplx beta;
};

/// Coefficients beta_l, sorted by order then descending lexicographic index.
struct PolynomialExpansion {
  std::size_t atoms = 0;
  std::size_t max_order = 0;  // K^(L-1)
  std::vector<ExpansionTerm> terms;

  /// beta_l, or 0 when the monomial is absent.
  Cplx coefficient(const MultiIndex& l) const {
    for (const auto& t : terms)
      if (t.index == l) return t.beta;
    return {};
  }

  /// Copy with every term involving atom t removed.
  PolynomialExpansion without_atom(std::size_t t) const {
    PolynomialExpansion out{atoms, max_order, {}};
    for (const auto& term : terms)
      if (term.index.at(t) == 0) out.terms.push_back(term);
    return out;
  }
};

/// K^(L-1): the largest monomial order a model can produce.
inline std::size_t expansion_degree_bound(const INRModel& model) {
  std::size_t k = 1;
  for (const auto& h : model.hidden) {
    if (h.activation.kind == ActivationKind::ComplexSine)
      throw UnsupportedActivationError("expansion requires polynomial activations; layer uses complex_sine");
    k *= h.activation.degree();
  }
  return k;
}

inline std::size_t expansion_index_count(std::size_t atoms, std::size_t max_order) {
  std::size_t total = 0;
  for (std::size_t k = 0; k <= max_order; ++k) {
    const std::size_t c = multiindex_count(atoms, k);
    if (c > kMaxMultiIndices || total + c > kMaxMultiIndices) return kMaxMultiIndices + 1;
    total += c;
  }
  return total;
}

/// Symbolic expansion by composing polynomials through the layers.
inline PolynomialExpansion expand_polynomial(const INRModel& model) {
  model.validate();
  const std::size_t f1 = model.first.atoms();
  const std::size_t bound = expansion_degree_bound(model);
  if (expansion_index_count(f1, bound) > kMaxMultiIndices)
    throw ExpansionSizeError("expand_polynomial: more than " + std::to_string(kMaxMultiIndices) +
                             " multi-indices for F1=" + std::to_string(f1) + ", order " + std::to_string(bound));

  std::vector<detail::Poly> z(f1);
  for (std::size_t t = 0; t < f1; ++t) {
    MultiIndex e(f1, 0);
    e[t] = 1;
    z[t][e] = 1.0;
  }
  for (const auto& layer : model.hidden) {
    std::vector<detail::Poly> next(layer.weights.rows());
    for (std::size_t j = 0; j < next.size(); ++j) {
      detail::Poly pre;
      for (std::size_t i = 0; i < z.size(); ++i)
        if (layer.weights(j, i) != Cplx{}) detail::poly_axpy(pre, layer.weights(j, i), z[i]);
      detail::poly_add_constant(pre, layer.bias[j], f1);
      detail::prune(pre);
      next[j] = detail::poly_compose(layer.activation, pre, f1);
    }
    z = std::move(next);
  }
  detail::Poly out;
  for (std::size_t i = 0; i < z.size(); ++i) detail::poly_axpy(out, model.output.weights(0, i), z[i]);
  detail::poly_add_constant(out, model.output.bias, f1);
  detail::prune(out);

  PolynomialExpansion exp{f1, bound, {}};
  exp.terms.reserve(out.size());
  for (auto& [l, c] : out) exp.terms.push_back({l, c});
  std::sort(exp.terms.begin(), exp.terms.end(), [](const ExpansionTerm& a, const ExpansionTerm& b) {
    const auto ka = order(a.index), kb = order(b.index);
    return ka != kb ? ka < kb : detail::descending_lex(a.index, b.index);
  });
  return exp;
}

/// First-layer atom values a_t(r).
inline std::vector<Cplx> atom_values(const FirstLayer& first, std::span<const double> r) {
  if (static_cast<int>(r.size()) != first.dim())
    throw SizeError("atom_values: point dimension does not match the first layer");
  const auto d = static_cast<std::size_t>(first.dim());
  std::vector<Cplx> a(first.atoms());
  std::vector<double> arg(d);
  for (std::size_t t = 0; t < a.size(); ++t) {
    first.argument(t, r, arg);
    a[t] = eval_template(first.template_spec(), arg);
  }
  return a;
}

inline Cplx eval_expansion(const PolynomialExpansion& exp, const INRModel& model, std::span<const double> r) {
  if (exp.atoms != model.first.atoms())
    throw SizeError("eval_expansion: expansion has " + std::to_string(exp.atoms) + " atoms, model has " +
                    std::to_string(model.first.atoms()));
  const auto a = atom_values(model.first, r);
  std::vector<std::vector<Cplx>> powers(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    powers[t].resize(exp.max_order + 1);
    powers[t][0] = 1.0;
    for (std::size_t p = 1; p <= exp.max_order; ++p) powers[t][p] = powers[t][p - 1] * a[t];
  }
  Cplx sum{};
  for (const auto& term : exp.terms) {
    if (term.index.size() != exp.atoms) throw SizeError("eval_expansion: malformed multi-index");
    Cplx m = term.beta;
    for (std::size_t t = 0; t < exp.atoms; ++t) {
      if (term.index[t] > exp.max_order) throw SizeError("eval_expansion: exponent above the order bound");
      if (term.index[t]) m *= powers[t][term.index[t]];
    }
    sum += m;
  }
  return sum;
}

/// One region sum_t l_t W_t^T A of the support bound, held as a box.
struct SupportRegion {
  std::size_t order = 0;
  FrequencyBox box;
};

struct SupportBound {
  int dim = 1;
  std::vector<SupportRegion> regions;

  bool contains(double xi0, double xi1 = 0.0) const {
    return std::any_of(regions.begin(), regions.end(), [&](const SupportRegion& r) { return r.box.contains(xi0, xi1); });
  }

  /// Regions with half-widths scaled by `factor` about their centers.
  SupportBound dilated(double factor) const {
    SupportBound out = *this;
    for (auto& r : out.regions)
      for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        const double c = 0.5 * (r.box.lo[i] + r.box.hi[i]);
        const double h = 0.5 * (r.box.hi[i] - r.box.lo[i]) * factor;
        r.box.lo[i] = c - h;
        r.box.hi[i] = c + h;
      }
    return out;
  }
};

/// Bounding box of W^T applied to `box`.
inline FrequencyBox transpose_image(const FirstLayer& first, std::size_t t, const FrequencyBox& box) {
  FrequencyBox out;
  out.dim = first.dim();
  if (first.dim() == 1) {
    const double w = first.weight(t, 0, 0);
    out.lo[0] = std::min(w * box.lo[0], w * box.hi[0]);
    out.hi[0] = std::max(w * box.lo[0], w * box.hi[0]);
    return out;
  }
  out.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  out.hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double u : {box.lo[0], box.hi[0]})
    for (double v : {box.lo[1], box.hi[1]}) {
      const double p0 = first.weight(t, 0, 0) * u + first.weight(t, 1, 0) * v;
      const double p1 = first.weight(t, 0, 1) * u + first.weight(t, 1, 1) * v;
      out.lo[0] = std::min(out.lo[0], p0);
      out.hi[0] = std::max(out.hi[0], p0);
      out.lo[1] = std::min(out.lo[1], p1);
      out.hi[1] = std::max(out.hi[1], p1);
    }
  return out;
}

/// Union over l in Delta(F1, k), k <= K^(L-1), of the boxes sum_t l_t W_t^T A.
inline SupportBound effective_support_bound(const INRModel& model, const FrequencyBox& a) {
  model.validate();
  if (a.dim != model.dim()) throw SizeError("effective_support_bound: box dimension does not match the model");
  const std::size_t f1 = model.first.atoms();
  const std::size_t bound = expansion_degree_bound(model);
  if (expansion_index_count(f1, bound) > kMaxMultiIndices)
    throw ExpansionSizeError("effective_support_bound: too many multi-indices");
  std::vector<FrequencyBox> images(f1);
  for (std::size_t t = 0; t < f1; ++t) images[t] = transpose_image(model.first, t, a);

  SupportBound sb;
  sb.dim = model.dim();
  std::map<std::array<double, 4>, std::size_t> seen;
  for (std::size_t k = 0; k <= bound; ++k) {
    for (const auto& l : enumerate_multiindices(f1, k)) {
      FrequencyBox box;
      box.dim = sb.dim;
      for (std::size_t t = 0; t < f1; ++t)
        for (std::size_t i = 0; i < 2; ++i) {
          box.lo[i] += l[t] * images[t].lo[i];
          box.hi[i] += l[t] * images[t].hi[i];
        }
      const std::array<double, 4> key{box.lo[0], box.hi[0], box.lo[1], box.hi[1]};
      if (seen.emplace(key, sb.regions.size()).second) sb.regions.push_back({k, box});
    }
  }
  return sb;
}

/// Relative L2 distance between the spectra of window * forward and
/// window * expansion on a 1D grid.
inline double windowed_spectrum_mismatch(const INRModel& model, const PolynomialExpansion& exp,
                                         const Grid1D& grid, const TemplateSpec& window) {
  grid.validate();
  std::vector<Cplx> f(grid.n), g(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.point(i);
    const Cplx w = eval_template(window, x);
    f[i] = w * forward(model, std::span<const double>(&x, 1));
    g[i] = w * eval_expansion(exp, model, std::span<const double>(&x, 1));
  }
  const auto sf = sampled_spectrum(f, grid);
  const auto sg = sampled_spectrum(g, grid);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sf.size(); ++i) {
    num += std::norm(sf.values[i] - sg.values[i]);
    den += std::norm(sf.values[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace winr
