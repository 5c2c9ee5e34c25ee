#ifndef RHOFLOW_FUNCTIONAL_HPP
#define RHOFLOW_FUNCTIONAL_HPP

#include <string>

#include "rhoflow/grid.hpp"
#include "rhoflow/state.hpp"

namespace rhoflow {

/// Smooth real functional on Hermitian matrices, carried around as a closed
/// value: evaluation, the analytic differential (the Hermitian operator D
/// with Tr(nu D) = d/dt|0 f(rho + t nu)), and optionally the derivative of
/// the differential (Hessian action), which composite constructors need to
/// differentiate through.
///
/// Arguments are raw Hermitian matrices, not DensityMatrix: finite-difference
/// probes rho +- t nu legitimately step outside the state space.
class DifferentiableFunctional {
public:
  using EvalFn = std::function<double(const Matrix&)>;
  using DiffFn = std::function<HermitianOperator(const Matrix&)>;
  using DiffDerivFn = std::function<Matrix(const Matrix&, const Matrix&)>;

  DifferentiableFunctional(std::string label, EvalFn eval, DiffFn differential,
                           DiffDerivFn differential_derivative = nullptr);

  double eval(const Matrix& rho) const { return eval_(rho); }
  double eval(const DensityMatrix& rho) const { return eval_(rho.matrix()); }

  HermitianOperator differential(const Matrix& rho) const { return diff_(rho); }
  HermitianOperator differential(const DensityMatrix& rho) const {
    return diff_(rho.matrix());
  }

  /// d/ds|0 differential(rho + s nu), a Hermitian matrix. Available for the
  /// built-in leaves and their sums/products; brackets do not provide it
  /// (that would take third derivatives of the factors).
  bool has_differential_derivative() const { return bool(dd_); }
  Matrix differential_derivative(const Matrix& rho, const Matrix& nu) const;

  const std::string& label() const { return label_; }

private:
  std::string label_;
  EvalFn eval_;
  DiffFn diff_;
  DiffDerivFn dd_;
};

namespace functionals {

DifferentiableFunctional constant(double value);

/// f(rho) = Tr(rho A); differential identically A.
DifferentiableFunctional linear(const HermitianOperator& a,
                                std::string label = "linear");

/// Q(rho) = Tr(rho H0) + eps/(alpha+1) * sum_k r_k^(alpha+1) dV with
/// r_k = rho_kk / dV the kernel diagonal. Differential H0 + eps diag(r_k^alpha).
/// Diagonal values below 1e-14 are treated as exactly zero (the alpha > 0
/// limit of r^alpha); values below -1e-8 are a domain error when alpha < 1,
/// where the derivative of r^alpha blows up at the boundary.
DifferentiableFunctional grid_nonlinear(const GridSpec& grid,
                                        const HermitianOperator& h0, double eps,
                                        double alpha);

DifferentiableFunctional sum(const DifferentiableFunctional& f,
                             const DifferentiableFunctional& g);
DifferentiableFunctional scaled(const DifferentiableFunctional& f, double c);

/// Pointwise product (f*g)(rho) = f(rho) g(rho); differential by the Leibniz
/// rule g Df + f Dg.
DifferentiableFunctional product(const DifferentiableFunctional& f,
                                 const DifferentiableFunctional& g);

/// The Poisson bracket {f,g} as a functional in its own right. Its
/// differential is assembled by the chain rule
///   D{f,g}(rho) = i[F,G] + F'[i[G,rho]] + G'[i[rho,F]]
/// (F = Df(rho), F' its Hessian action), which needs both factors to carry a
/// differential derivative; nesting one level deep is exactly what the
/// Jacobi identity test requires.
DifferentiableFunctional bracket(const DifferentiableFunctional& f,
                                 const DifferentiableFunctional& g);

}  // namespace functionals

HermitianOperator differential(const DifferentiableFunctional& f, const Matrix& rho);

/// Central difference (f(rho + t nu) - f(rho - t nu)) / (2t); the
/// finite-difference oracle for the analytic differential, O(t^2) accurate.
double fd_directional(const DifferentiableFunctional& f, const Matrix& rho,
                      const HermitianOperator& nu, double t);

/// {f,h}(rho) = i Tr(rho [Df, Dh]); the imaginary rounding residue is
/// discarded.
double poisson_bracket(const DifferentiableFunctional& f,
                       const DifferentiableFunctional& h, const Matrix& rho);

}  // namespace rhoflow

#endif
