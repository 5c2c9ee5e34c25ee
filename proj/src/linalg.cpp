#include "rhoflow/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace rhoflow {

HermitianOperator::HermitianOperator(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error("HermitianOperator: matrix is " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()) + ", expected square");
  }
  require_finite(m, "HermitianOperator");
  const double residual = max_abs(m - m.adjoint());
  if (residual > kHermitianTol) {
    throw Error("HermitianOperator: not Hermitian, ||M - M^dagger||_max = " +
                std::to_string(residual));
  }
  m_ = 0.5 * (m + m.adjoint().eval());
}

Eig hermitian_eig(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error("hermitian_eig: eigensolver failed to converge (dim=" +
                std::to_string(h.dim()) +
                ", ||H||_max=" + std::to_string(max_abs(h.matrix())) + ")");
  }

  const Index d = h.dim();
  Eig out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();

  // Phase convention: first component above threshold made real positive.
  for (Index k = 0; k < d; ++k) {
    for (Index i = 0; i < d; ++i) {
      const Complex c = out.eigenvectors(i, k);
      if (std::abs(c) > 1e-12) {
        out.eigenvectors.col(k) *= std::conj(c) / std::abs(c);
        break;
      }
    }
  }
  return out;
}

Matrix unitary_exp(const HermitianOperator& h, double s) {
  const Eig eig = hermitian_eig(h);
  Vector phases(h.dim());
  for (Index k = 0; k < h.dim(); ++k) {
    phases(k) = std::exp(Complex(0.0, -s * eig.eigenvalues(k)));
  }
  return eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();
}

Matrix polar_unitary(const Matrix& u) {
  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace rhoflow
