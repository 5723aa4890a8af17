// A two-atom Gabor INR with a cubic activation, written out as a polynomial in
// its atoms. The closed form reproduces the network to rounding error.

#include <cstdio>

#include "winr/winr.hpp"

int main() {
  using namespace winr;
  auto m = make_model(gabor_template(), WeightConstraint::Free, 2, {2}, ActivationSpec::alternating_cubic());
  m.first.set_weight(0, 0, 0, 1.0);
  m.first.set_weight(1, 0, 0, 2.0);
  m.first.set_bias(1, 0, 0.5);
  initialize_dense_layers(m, 7);

  const auto e = expand_polynomial(m);
  std::printf("%zu monomials up to order %zu\n", e.terms.size(), e.max_order);
  for (const auto& t : e.terms) {
    std::printf("  psi0^%u psi1^%u  beta = %+.4f %+.4fi\n", t.index[0], t.index[1], t.beta.real(), t.beta.imag());
  }

  double worst = 0.0;
  for (double x = -2.0; x <= 2.0; x += 0.125) {
    const Cplx a = forward(m, x), b = eval_expansion(e, m, std::span<const double>(&x, 1));
    worst = std::max(worst, std::abs(a - b));
  }
  std::printf("max |network - expansion| on [-2, 2]: %.2e\n", worst);

  // Every monomial of Gabor atoms with positive frequencies has a spectrum on
  // the positive half-line, so the network output is essentially progressive.
  const auto rep = measure_spectrum(m, Grid1D{-16.0, 16.0, 2048});
  double neg = 0.0;
  for (std::size_t i = 0; i < rep.size(); ++i)
    if (rep.fx(i) < 0.0) neg += rep.energy(i);
  std::printf("negative-frequency energy fraction: %.2e\n", neg / rep.total_energy);
}
