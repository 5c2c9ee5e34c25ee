#ifndef RHOFLOW_TYPES_HPP
#define RHOFLOW_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rhoflow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Tolerances shared across modules. Construction-time validation uses these;
// integrator drift beyond them is treated as an error, not silently repaired.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigClipTol = 1e-10;
inline constexpr double kUnitNormTol = 1e-12;
inline constexpr double kWeightSumTol = 1e-12;

/// Library error type. Messages name the violated invariant and carry the
/// measured residual where one exists.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Entrywise max-modulus norm.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

/// Commutator AB - BA. Throws on dimension mismatch.
template <typename DA, typename DB>
Matrix commutator(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw Error("commutator: dimension mismatch (" + std::to_string(a.rows()) + "x" +
                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                std::to_string(b.cols()) + ")");
  }
  return a.derived() * b.derived() - b.derived() * a.derived();
}

inline void require_finite(const Matrix& m, const char* where) {
  if (!m.allFinite()) throw Error(std::string(where) + ": non-finite entries");
}

}  // namespace rhoflow

#endif
