#include "rhoflow/functional.hpp"

#include <cmath>
#include <utility>

namespace rhoflow {

DifferentiableFunctional::DifferentiableFunctional(std::string label, EvalFn eval,
                                                   DiffFn differential,
                                                   DiffDerivFn differential_derivative)
    : label_(std::move(label)),
      eval_(std::move(eval)),
      diff_(std::move(differential)),
      dd_(std::move(differential_derivative)) {
  if (!eval_ || !diff_) throw Error("functional requires eval and differential");
}

Matrix DifferentiableFunctional::differential_derivative(const Matrix& rho,
                                                         const Matrix& nu) const {
  if (!dd_)
    throw Error("functional '" + label_ + "' has no differential derivative");
  return dd_(rho, nu);
}

namespace functionals {

DifferentiableFunctional constant(double value) {
  return DifferentiableFunctional(
      "const", [value](const Matrix&) { return value; },
      [](const Matrix& rho) {
        return HermitianOperator(Matrix::Zero(rho.rows(), rho.cols()));
      },
      [](const Matrix& rho, const Matrix&) -> Matrix {
        return Matrix::Zero(rho.rows(), rho.cols());
      });
}

DifferentiableFunctional linear(const HermitianOperator& a, std::string label) {
  const Matrix m = a.matrix();
  return DifferentiableFunctional(
      std::move(label),
      [m](const Matrix& rho) { return (rho * m).trace().real(); },
      [m](const Matrix&) { return HermitianOperator(m); },
      [m](const Matrix&, const Matrix&) -> Matrix {
        return Matrix::Zero(m.rows(), m.cols());
      });
}

namespace {

// Kernel diagonal of a raw matrix with the functional's clamp rule applied:
// entries below 1e-14 count as exactly 0; below -1e-8 with alpha < 1 the
// power's derivative is singular and the argument is outside the domain.
RealVector clamped_kernel_diagonal(const Matrix& rho, const GridSpec& grid,
                                   double alpha) {
  if (rho.rows() != grid.dim())
    throw Error("matrix dimension does not match grid size");
  RealVector r = rho.diagonal().real() / grid.cell_volume();
  for (Index k = 0; k < r.size(); ++k) {
    if (r(k) < 1e-14) {
      if (alpha < 1.0 && r(k) < -1e-8)
        throw Error("diagonal kernel value negative beyond tolerance for alpha < 1");
      r(k) = 0.0;
    }
  }
  return r;
}

}  // namespace

DifferentiableFunctional grid_nonlinear(const GridSpec& grid,
                                        const HermitianOperator& h0, double eps,
                                        double alpha) {
  if (h0.dim() != grid.dim()) throw Error("H0 dimension does not match grid size");
  if (!(alpha > 0)) throw Error("grid functional requires alpha > 0");
  const Matrix h0m = h0.matrix();
  const double dv = grid.cell_volume();

  auto eval = [grid, h0m, eps, alpha, dv](const Matrix& rho) {
    double q = (rho * h0m).trace().real();
    const RealVector r = clamped_kernel_diagonal(rho, grid, alpha);
    double s = 0.0;
    for (Index k = 0; k < r.size(); ++k)
      if (r(k) > 0.0) s += std::pow(r(k), alpha + 1.0);
    return q + eps / (alpha + 1.0) * s * dv;
  };

  auto diff = [grid, h0m, eps, alpha](const Matrix& rho) {
    const RealVector r = clamped_kernel_diagonal(rho, grid, alpha);
    Matrix d = h0m;
    for (Index k = 0; k < r.size(); ++k)
      if (r(k) > 0.0) d(k, k) += eps * std::pow(r(k), alpha);
    return HermitianOperator(d);
  };

  auto dd = [grid, eps, alpha, dv](const Matrix& rho, const Matrix& nu) -> Matrix {
    const RealVector r = clamped_kernel_diagonal(rho, grid, alpha);
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (Index k = 0; k < r.size(); ++k)
      if (r(k) > 0.0)
        out(k, k) = eps * alpha * std::pow(r(k), alpha - 1.0) * nu(k, k).real() / dv;
    return out;
  };

  return DifferentiableFunctional("grid_nonlinear", eval, diff, dd);
}

DifferentiableFunctional sum(const DifferentiableFunctional& f,
                             const DifferentiableFunctional& g) {
  DifferentiableFunctional::DiffDerivFn dd;
  if (f.has_differential_derivative() && g.has_differential_derivative())
    dd = [f, g](const Matrix& rho, const Matrix& nu) -> Matrix {
      return f.differential_derivative(rho, nu) + g.differential_derivative(rho, nu);
    };
  return DifferentiableFunctional(
      f.label() + "+" + g.label(),
      [f, g](const Matrix& rho) { return f.eval(rho) + g.eval(rho); },
      [f, g](const Matrix& rho) {
        return HermitianOperator(f.differential(rho).matrix() +
                                 g.differential(rho).matrix());
      },
      dd);
}

DifferentiableFunctional scaled(const DifferentiableFunctional& f, double c) {
  DifferentiableFunctional::DiffDerivFn dd;
  if (f.has_differential_derivative())
    dd = [f, c](const Matrix& rho, const Matrix& nu) -> Matrix {
      return c * f.differential_derivative(rho, nu);
    };
  return DifferentiableFunctional(
      "scaled(" + f.label() + ")",
      [f, c](const Matrix& rho) { return c * f.eval(rho); },
      [f, c](const Matrix& rho) {
        return HermitianOperator(c * f.differential(rho).matrix());
      },
      dd);
}

DifferentiableFunctional product(const DifferentiableFunctional& f,
                                 const DifferentiableFunctional& g) {
  DifferentiableFunctional::DiffDerivFn dd;
  if (f.has_differential_derivative() && g.has_differential_derivative())
    dd = [f, g](const Matrix& rho, const Matrix& nu) -> Matrix {
      const Matrix df = f.differential(rho).matrix();
      const Matrix dg = g.differential(rho).matrix();
      const double tf = (nu * df).trace().real();
      const double tg = (nu * dg).trace().real();
      return tg * df + g.eval(rho) * f.differential_derivative(rho, nu) +
             tf * dg + f.eval(rho) * g.differential_derivative(rho, nu);
    };
  return DifferentiableFunctional(
      f.label() + "*" + g.label(),
      [f, g](const Matrix& rho) { return f.eval(rho) * g.eval(rho); },
      [f, g](const Matrix& rho) {
        return HermitianOperator(g.eval(rho) * f.differential(rho).matrix() +
                                 f.eval(rho) * g.differential(rho).matrix());
      },
      dd);
}

DifferentiableFunctional bracket(const DifferentiableFunctional& f,
                                 const DifferentiableFunctional& g) {
  auto eval = [f, g](const Matrix& rho) { return poisson_bracket(f, g, rho); };
  auto diff = [f, g](const Matrix& rho) {
    const Matrix df = f.differential(rho).matrix();
    const Matrix dg = g.differential(rho).matrix();
    const Complex i(0.0, 1.0);
    Matrix out = i * commutator(df, dg);
    // Chain-rule tails through the rho-dependence of the differentials; the
    // Hessian is symmetric as a bilinear form, which moves it onto the
    // Hermitian directions i[G,rho] and i[rho,F].
    out += f.differential_derivative(rho, (i * commutator(dg, rho)).eval());
    out += g.differential_derivative(rho, (i * commutator(rho, df)).eval());
    return HermitianOperator(out);
  };
  return DifferentiableFunctional("{" + f.label() + "," + g.label() + "}", eval,
                                  diff);
}

}  // namespace functionals

HermitianOperator differential(const DifferentiableFunctional& f, const Matrix& rho) {
  return f.differential(rho);
}

double fd_directional(const DifferentiableFunctional& f, const Matrix& rho,
                      const HermitianOperator& nu, double t) {
  if (!(t > 0)) throw Error("fd_directional requires t > 0");
  return (f.eval((rho + t * nu.matrix()).eval()) -
          f.eval((rho - t * nu.matrix()).eval())) /
         (2.0 * t);
}

double poisson_bracket(const DifferentiableFunctional& f,
                       const DifferentiableFunctional& h, const Matrix& rho) {
  const Matrix df = f.differential(rho).matrix();
  const Matrix dh = h.differential(rho).matrix();
  if (df.rows() != dh.rows()) throw Error("poisson_bracket dimension mismatch");
  const Complex val = Complex(0.0, 1.0) * (rho * commutator(df, dh)).trace();
  return val.real();
}

}  // namespace rhoflow
