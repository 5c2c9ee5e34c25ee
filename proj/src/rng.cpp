#include "rhoflow/rng.hpp"

#include <cmath>

namespace rhoflow {

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  cached_ = r * std::sin(theta);
  have_cached_ = true;
  return r * std::cos(theta);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) / std::sqrt(2.0);
}

HermitianOperator random_hermitian(Index d, Rng& rng) {
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      g(i, j) = rng.complex_normal();
    }
  }
  return HermitianOperator(0.5 * (g + g.adjoint().eval()));
}

DensityMatrix random_density(Index d, Index rank, Rng& rng) {
  if (rank < 1 || rank > d) throw Error("random_density: rank out of range");
  Matrix g(d, rank);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < rank; ++j) {
      g(i, j) = rng.complex_normal();
    }
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::from_matrix(rho);
}

PureState random_pure(Index d, Rng& rng) {
  Vector psi(d);
  for (Index i = 0; i < d; ++i) psi(i) = rng.complex_normal();
  psi.normalize();
  return PureState(std::move(psi));
}

}  // namespace rhoflow
