#ifndef RHOFLOW_LINALG_HPP
#define RHOFLOW_LINALG_HPP

#include "rhoflow/types.hpp"

namespace rhoflow {

/// A validated self-adjoint operator. Construction checks
/// ||M - M^dagger||_max <= 1e-10 and stores the exactly symmetrized matrix,
/// so downstream code can rely on bitwise Hermiticity.
class HermitianOperator {
public:
  explicit HermitianOperator(const Matrix& m);

  const Matrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

private:
  Matrix m_;
};

/// Spectral decomposition H = V diag(w) V^dagger.
struct Eig {
  RealVector eigenvalues;  // sorted descending
  Matrix eigenvectors;     // columns; unitary
};

/// Hermitian eigendecomposition with a deterministic output convention:
/// eigenvalues descending, each eigenvector's first nonzero component made
/// real positive. Throws if the underlying solver fails to converge.
Eig hermitian_eig(const HermitianOperator& h);

/// exp(-i s H) computed through the eigendecomposition of H. The result is
/// unitary up to solver accuracy (~1e-14 for the supported sizes).
Matrix unitary_exp(const HermitianOperator& h, double s);

/// Nearest unitary to an almost-unitary matrix (polar factor via SVD).
/// Used to contain rounding drift in accumulated propagator products.
Matrix polar_unitary(const Matrix& u);

inline double real_trace(const Matrix& m) { return m.trace().real(); }

}  // namespace rhoflow

#endif
