#ifndef RHOFLOW_RNG_HPP
#define RHOFLOW_RNG_HPP

#include <cstdint>
#include <random>

#include "rhoflow/state.hpp"

namespace rhoflow {

/// Deterministic random source. The uniform/normal maps are implemented
/// directly on the mt19937_64 bit stream so that identical seeds produce
/// identical matrices on every platform (std::*_distribution is
/// implementation-defined).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform();           // [0, 1)
  double normal();            // standard normal, Box-Muller
  Complex complex_normal();   // (normal + i normal) / sqrt(2)

private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

/// Hermitian matrix with Gaussian entries, (G + G^dagger)/2.
HermitianOperator random_hermitian(Index d, Rng& rng);

/// Density matrix G G^dagger / Tr(G G^dagger) with G a d x rank Gaussian
/// block; rank = d gives a generic full-rank state.
DensityMatrix random_density(Index d, Index rank, Rng& rng);

PureState random_pure(Index d, Rng& rng);

}  // namespace rhoflow

#endif
