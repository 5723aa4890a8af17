#pragma once

// Self-check suites run by `winr verify` and the acceptance binary. Each
// suite is deterministic in its seed list and reports the worst observed
// error against its tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "winr/expansion.hpp"
#include "winr/init.hpp"
#include "winr/io.hpp"
#include "winr/model.hpp"
#include "winr/rng.hpp"
#include "winr/spectral.hpp"
#include "winr/templates.hpp"
#include "winr/training.hpp"
#include "winr/verify/reference_eval.hpp"

namespace winr::verify {

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> failures;

  void record(double err, const std::string& label) {
    ++cases;
    worst = std::max(worst, err);
    if (!(err <= tolerance)) {
      passed = false;
      failures.push_back(label + ": error " + format_double(err) + " exceeds " + format_double(tolerance));
    }
  }
};

inline std::vector<std::uint64_t> default_seeds() { return {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}; }

namespace detail {

inline Cplx random_complex(Rng& rng, double a) { return {rng.uniform(-a, a), rng.uniform(-a, a)}; }

inline void randomize_dense(INRModel& m, Rng& rng, double hidden_scale, double out_scale) {
  for (auto& h : m.hidden) {
    for (auto& w : h.weights.data()) w = random_complex(rng, hidden_scale);
    for (auto& b : h.bias) b = random_complex(rng, 0.5 * hidden_scale);
  }
  for (auto& w : m.output.weights.data()) w = random_complex(rng, out_scale);
  m.output.bias = random_complex(rng, 0.5 * out_scale);
}

inline std::size_t draw_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.bits() % (hi - lo + 1));
}

}  // namespace detail

/// Polynomial-activation Gabor INRs: direct forward vs. the closed-form
/// multi-index expansion, pointwise relative error. `corrupt` may alter the
/// expansion before evaluation; it exists to exercise the failure path.
inline SuiteResult expansion_equivalence(
    const std::vector<std::uint64_t>& seeds, double tol = 1e-9,
    const std::function<void(PolynomialExpansion&)>& corrupt = {}) {
  SuiteResult res{"expansion-equivalence"};
  res.tolerance = tol;
  for (auto seed : seeds) {
    Rng rng = Rng::stream(seed, "expansion-equivalence");
    const std::size_t f1 = detail::draw_int(rng, 1, 4), k = detail::draw_int(rng, 1, 3),
                      layers = detail::draw_int(rng, 1, 3);
    std::vector<Cplx> coeffs(k + 1);
    for (auto& c : coeffs) c = detail::random_complex(rng, 1.0);
    coeffs.back() += Cplx(1.5, 0.0);
    auto m = make_model(gabor_template(), WeightConstraint::Free, f1, std::vector<std::size_t>(layers - 1, 3),
                        ActivationSpec::polynomial(coeffs));
    for (std::size_t t = 0; t < f1; ++t) {
      m.first.set_weight(t, 0, 0, rng.uniform(0.5, 1.5));
      m.first.set_bias(t, 0, rng.uniform(-1.0, 1.0));
    }
    detail::randomize_dense(m, rng, 0.7, 1.0);
    auto e = expand_polynomial(m);
    if (corrupt) corrupt(e);
    double worst = 0.0;
    for (int i = 0; i < 256; ++i) {
      const double x = rng.uniform(-2.0, 2.0);
      const Cplx a = forward(m, x), b = eval_expansion(e, m, std::span<const double>(&x, 1));
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-12));
    }
    res.record(worst, "seed " + std::to_string(seed) + " (F1=" + std::to_string(f1) + ", K=" + std::to_string(k) +
                          ", L=" + std::to_string(layers) + ")");
  }
  return res;
}

/// Bump-template INRs: moving every atom whose support excludes r0 further
/// away must leave f(r0) bit-identical. Ten cases per seed, alternating
/// between 1D and 2D models.
inline SuiteResult support_locality(const std::vector<std::uint64_t>& seeds) {
  SuiteResult res{"support-locality"};
  res.tolerance = 0.0;
  constexpr double radius = 0.5;
  for (auto seed : seeds) {
    Rng rng = Rng::stream(seed, "support-locality");
    for (int c = 0; c < 10; ++c) {
      const int dim = c % 2 == 0 ? 1 : 2;
      const auto d = static_cast<std::size_t>(dim);
      const std::size_t atoms = 6;
      auto m = make_model(TemplateSpec::bump(radius, dim), WeightConstraint::Free, atoms, {3},
                          ActivationSpec::alternating_cubic());
      for (std::size_t t = 0; t < atoms; ++t) {
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = 0; j < d; ++j) m.first.set_weight(t, i, j, i == j ? rng.uniform(1.0, 2.0) : 0.0);
          m.first.set_bias(t, i, rng.uniform(-2.0, 2.0));
        }
      }
      detail::randomize_dense(m, rng, 0.7, 1.0);
      std::vector<double> r0(d), arg(d);
      std::vector<std::size_t> excluded;
      for (int attempt = 0; attempt < 100 && (excluded.empty() || excluded.size() == atoms); ++attempt) {
        for (auto& v : r0) v = rng.uniform(-1.0, 1.0);
        excluded.clear();
        for (std::size_t t = 0; t < atoms; ++t) {
          m.first.argument(t, r0, arg);
          double n2 = 0.0;
          for (double a : arg) n2 += a * a;
          if (std::sqrt(n2) >= radius) excluded.push_back(t);
        }
      }
      const std::string label = "seed " + std::to_string(seed) + " case " + std::to_string(c);
      if (excluded.empty()) {
        res.record(1.0, label + " (no excluded atom)");
        continue;
      }
      const Cplx before = forward(m, r0);
      auto moved = m;
      for (auto t : excluded) {
        m.first.argument(t, r0, arg);
        double n = 0.0;
        for (double a : arg) n += a * a;
        n = std::sqrt(n);
        const double shift = rng.uniform(0.1, 3.0);
        for (std::size_t i = 0; i < d; ++i) moved.first.set_bias(t, i, m.first.bias(t, i) + shift * arg[i] / n);
      }
      const Cplx after = forward(moved, r0);
      res.record(before == after ? 0.0 : std::abs(after - before), label);
    }
  }
  return res;
}

/// Negative-frequency energy fraction of Gabor INRs (12 atoms, scales in
/// [1, 7], n=4096 samples of [0, 1]) and of sinusoid-template INRs.
inline SuiteResult progressivity(const std::vector<std::uint64_t>& seeds, double coord_scale = 32.0,
                                 double gabor_tol = 1e-2, double sinusoid_tol = 1e-10) {
  SuiteResult res{"progressivity"};
  res.tolerance = gabor_tol;
  const auto negative_fraction = [](const SpectrumReport& rep) {
    double neg = 0.0;
    for (std::size_t i = 0; i < rep.size(); ++i)
      if (rep.fx(i) < 0.0) neg += rep.energy(i);
    return neg / rep.total_energy;
  };
  for (auto seed : seeds) {
    Rng rng = Rng::stream(seed, "progressivity");
    auto g = make_model(gabor_template(), WeightConstraint::ScaleOnly, 12, {32, 32},
                        ActivationSpec::alternating_cubic());
    for (std::size_t t = 0; t < 12; ++t) {
      g.first.set_scale(t, rng.uniform(1.0, 7.0));
      const double c = coord_scale * rng.uniform(0.1, 0.9);
      g.first.center_at(t, std::span<const double>(&c, 1));
    }
    initialize_dense_layers(g, seed);
    const double gf = negative_fraction(measure_spectrum(g, Grid1D{0.0, coord_scale, 4096}));
    res.record(gf, "gabor seed " + std::to_string(seed));

    auto s = make_model(TemplateSpec::sinusoid(1.0), WeightConstraint::ScaleOnly, 3, {6},
                        ActivationSpec::alternating_cubic());
    for (std::size_t t = 0; t < 3; ++t) {
      s.first.set_log_scale(t, 0, std::log(static_cast<double>(detail::draw_int(rng, 1, 8))));
      s.first.set_bias(t, 0, rng.uniform(-1.0, 1.0));
    }
    initialize_dense_layers(s, seed);
    const double sf = negative_fraction(measure_spectrum(s, Grid1D{0.0, 1.0, 256}));
    if (!(sf <= sinusoid_tol)) {
      res.passed = false;
      res.failures.push_back("sinusoid seed " + std::to_string(seed) + ": error " + format_double(sf) +
                             " exceeds " + format_double(sinusoid_tol));
    }
    ++res.cases;
  }
  return res;
}

/// Analytic gradients vs. central finite differences in extended precision,
/// for every parameter group of Gaussian, Gabor and sinusoid INRs under all
/// three weight constraints in 1D and 2D.
inline SuiteResult gradients(const std::vector<std::uint64_t>& seeds, double tol = 1e-5) {
  SuiteResult res{"gradients"};
  res.tolerance = tol;
  const std::vector<TemplateSpec> kinds{TemplateSpec::gaussian(0.6), gabor_template(), TemplateSpec::sinusoid(0.8)};
  for (auto seed : seeds) {
    Rng rng = Rng::stream(seed, "gradients");
    for (const auto& kind : kinds)
      for (auto c : {WeightConstraint::Free, WeightConstraint::ScaleOnly, WeightConstraint::UnitWeights})
        for (int dim : {1, 2}) {
          TemplateSpec ts = kind;
          ts.dim = dim;
          const auto d = static_cast<std::size_t>(dim);
          auto m = make_model(ts, c, 3, {4, 3}, ActivationSpec::alternating_cubic());
          for (std::size_t t = 0; t < 3; ++t) {
            if (c == WeightConstraint::Free)
              for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                  m.first.set_weight(t, i, j, (i == j ? 1.5 : 0.0) + rng.uniform(-0.4, 0.4));
            if (c == WeightConstraint::ScaleOnly)
              for (std::size_t i = 0; i < d; ++i) m.first.set_log_scale(t, i, rng.uniform(-0.5, 0.5));
            for (std::size_t i = 0; i < d; ++i) m.first.set_bias(t, i, rng.uniform(-1.0, 1.0));
          }
          detail::randomize_dense(m, rng, 0.6, 1.0);
          Dataset data;
          data.dim = dim;
          data.points.resize(20 * d);
          for (auto& p : data.points) p = rng.uniform(-1.0, 1.0);
          data.targets.resize(20);
          for (auto& t : data.targets) t = rng.uniform(-1.0, 1.0);
          const auto r = check_gradients(m, data);
          res.record(r.checked == 0 ? 1.0 : r.worst_rel,
                     "seed " + std::to_string(seed) + " " + to_string(ts.kind) + " " + to_string(c) +
                         " d=" + std::to_string(dim) + " parameter " + std::to_string(r.worst_index));
        }
  }
  return res;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"expansion-equivalence", "support-locality", "progressivity",
                                              "gradients"};
  return names;
}

inline SuiteResult run_suite(const std::string& name, const std::vector<std::uint64_t>& seeds) {
  if (name == "expansion-equivalence") return expansion_equivalence(seeds);
  if (name == "support-locality") return support_locality(seeds);
  if (name == "progressivity") return progressivity(seeds);
  if (name == "gradients") return gradients(seeds);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace winr::verify
