#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rhoflow/functional.hpp"
#include "rhoflow/rng.hpp"

using namespace rhoflow;

namespace {

Matrix diag4(double a, double b, double c, double d) {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  m(3, 3) = d;
  return m;
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

}  // namespace

TEST_CASE("linear functional matches its trace definition") {
  Rng rng(11);
  const Matrix a = random_hermitian(6, rng).matrix();
  const auto f = functionals::linear(HermitianOperator(a));
  const Matrix rho = random_density(6, 6, rng).matrix();

  // naive double-loop trace as the oracle
  Complex tr = 0;
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) tr += rho(i, j) * a(j, i);
  CHECK(std::abs(f.eval(rho) - tr.real()) <= 1e-14);

  CHECK(max_abs((f.differential(rho).matrix() - a).eval()) == 0.0);

  const HermitianOperator nu = random_hermitian(6, rng);
  const double exact = (nu.matrix() * a).trace().real();
  // affine in rho: central difference is exact up to roundoff
  CHECK(std::abs(fd_directional(f, rho, nu, 1e-3) - exact) <= 1e-10);

  // Hessian of a linear functional vanishes
  CHECK(max_abs(f.differential_derivative(rho, nu.matrix())) == 0.0);
}

TEST_CASE("constant functional has zero differential") {
  const auto f = functionals::constant(3.25);
  const Matrix rho = Matrix::Identity(4, 4) / 4.0;
  CHECK(f.eval(rho) == 3.25);
  CHECK(max_abs(f.differential(rho).matrix()) == 0.0);
  Rng rng(2);
  CHECK(fd_directional(f, rho, random_hermitian(4, rng), 1e-2) == 0.0);
}

TEST_CASE("grid functional: hand-computed values at unit spacing") {
  const GridSpec g(1, 0.0, 4.0, 4);  // dx = 1
  const HermitianOperator h0 = build_h0(g, potentials::zero(), 1.0);
  const Matrix rho = diag4(0.4, 0.3, 0.2, 0.1);

  SUBCASE("alpha = 1") {
    const auto q = functionals::grid_nonlinear(g, h0, 0.6, 1.0);
    // Tr(rho H0) = 2, nonlinear term 0.3 * (0.16+0.09+0.04+0.01) = 0.09
    CHECK(std::abs(q.eval(rho) - 2.09) <= 1e-15);

    const Matrix d = q.differential(rho).matrix();
    const Matrix expect = h0.matrix() + 0.6 * rho;  // eps * diag(r_k), dV = 1
    CHECK(max_abs((d - expect).eval()) <= 1e-15);

    Rng rng(5);
    const Matrix nu = random_hermitian(4, rng).matrix();
    Matrix dd_expect = Matrix::Zero(4, 4);
    for (Index k = 0; k < 4; ++k) dd_expect(k, k) = 0.6 * nu(k, k);
    CHECK(max_abs((q.differential_derivative(rho, nu) - dd_expect).eval()) <=
          1e-15);
  }

  SUBCASE("alpha = 2") {
    const auto q = functionals::grid_nonlinear(g, h0, 0.9, 2.0);
    // 2 + 0.3 * (0.064+0.027+0.008+0.001) = 2.03
    CHECK(std::abs(q.eval(rho) - 2.03) <= 1e-15);

    Matrix expect = h0.matrix();
    for (Index k = 0; k < 4; ++k)
      expect(k, k) += 0.9 * rho(k, k).real() * rho(k, k).real();
    CHECK(max_abs((q.differential(rho).matrix() - expect).eval()) <= 1e-15);

    Rng rng(6);
    const Matrix nu = random_hermitian(4, rng).matrix();
    Matrix dd_expect = Matrix::Zero(4, 4);
    for (Index k = 0; k < 4; ++k)
      dd_expect(k, k) = 1.8 * rho(k, k).real() * nu(k, k);
    CHECK(max_abs((q.differential_derivative(rho, nu) - dd_expect).eval()) <=
          1e-14);
  }
}

TEST_CASE("grid functional clamps tiny negatives and rejects large ones") {
  const GridSpec g(1, 0.0, 4.0, 4);
  const HermitianOperator h0 = build_h0(g, potentials::zero(), 0.0);

  Matrix m = diag4(0.5, 0.5, 0.0, 0.0);
  m(2, 2) = -1e-15;  // inside the clamp band even for fractional alpha
  const auto q_half = functionals::grid_nonlinear(g, h0, 1.0, 0.5);
  CHECK(std::abs(q_half.eval(m) -
                 (1.0 / 1.5) * (std::pow(0.5, 1.5) * 2.0)) <= 1e-15);
  const Matrix d = q_half.differential(m).matrix();
  CHECK(d(2, 2) == Complex(0.0, 0.0));
  CHECK(std::abs(d(0, 0).real() - std::pow(0.5, 0.5)) <= 1e-15);

  Matrix bad = diag4(0.5, 0.5, -1e-6, 0.0);
  CHECK_THROWS_WITH_AS(q_half.eval(bad), doctest::Contains("negative"), Error);
  CHECK_THROWS_AS(q_half.differential(bad), Error);

  // integer alpha tolerates the same excursion: the value clamps to zero
  const auto q_two = functionals::grid_nonlinear(g, h0, 1.0, 2.0);
  CHECK(std::abs(q_two.eval(bad) -
                 (1.0 / 3.0) * (std::pow(0.5, 3.0) * 2.0)) <= 1e-15);
}

TEST_CASE("finite differences converge at second order to the differential") {
  const GridSpec g(1, -4.0, 4.0, 8);
  const HermitianOperator h0 = build_h0(g, potentials::harmonic(0.5), 0.5);
  const auto q = functionals::grid_nonlinear(g, h0, 0.8, 2.0);

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix rho =
        (0.5 * random_density(8, 8, rng).matrix() + 0.0625 * Matrix::Identity(8, 8))
            .eval();
    HermitianOperator nu = random_hermitian(8, rng);
    const double exact = (nu.matrix() * q.differential(rho).matrix()).trace().real();
    const double e1 = std::abs(fd_directional(q, rho, nu, 1e-2) - exact);
    const double e2 = std::abs(fd_directional(q, rho, nu, 1e-3) - exact);
    CHECK(e2 <= std::max(e1 / 25.0, 1e-11));
  }

  CHECK_THROWS_AS(fd_directional(q, Matrix::Identity(8, 8) / 8.0,
                                 random_hermitian(8, rng), 0.0),
                  Error);
}

TEST_CASE("product functional: Tr(rho A)^2 differentiates by Leibniz") {
  Rng rng(23);
  const HermitianOperator a = random_hermitian(5, rng);
  const auto la = functionals::linear(a, "a");
  const auto f = functionals::product(la, la);
  const Matrix rho = random_density(5, 5, rng).matrix();

  const double tra = (rho * a.matrix()).trace().real();
  CHECK(std::abs(f.eval(rho) - tra * tra) <= 1e-13);
  CHECK(max_abs((f.differential(rho).matrix() - 2.0 * tra * a.matrix()).eval()) <=
        1e-12);

  const HermitianOperator nu = random_hermitian(5, rng);
  const double exact = 2.0 * tra * (nu.matrix() * a.matrix()).trace().real();
  // quadratic in rho: central difference has no truncation term
  CHECK(std::abs(fd_directional(f, rho, nu, 1e-3) - exact) <= 1e-10);

  // Hessian of the product: dd[nu] = 2 Tr(nu A) A
  const Matrix dd = f.differential_derivative(rho, nu.matrix());
  const Matrix dd_expect =
      2.0 * (nu.matrix() * a.matrix()).trace().real() * a.matrix();
  CHECK(max_abs((dd - dd_expect).eval()) <= 1e-12);
}

TEST_CASE("poisson bracket closed-form values") {
  const auto fx = functionals::linear(HermitianOperator(pauli_x()), "x");
  const auto fy = functionals::linear(HermitianOperator(pauli_y()), "y");

  for (double p : {0.2, 0.5, 0.9}) {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = p;
    rho(1, 1) = 1.0 - p;
    // i Tr(rho [x, y]) = i Tr(rho 2i z) = -2 (2p - 1)
    CHECK(std::abs(poisson_bracket(fx, fy, rho) + 2.0 * (2.0 * p - 1.0)) <=
          1e-14);
    CHECK(poisson_bracket(fx, fx, rho) == 0.0);
  }

  // direct trace oracle on random data
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_hermitian(6, rng).matrix();
    const Matrix b = random_hermitian(6, rng).matrix();
    const Matrix rho = random_density(6, 6, rng).matrix();
    const auto fa = functionals::linear(HermitianOperator(a), "a");
    const auto fb = functionals::linear(HermitianOperator(b), "b");
    const double oracle = (Complex(0, 1) * (rho * commutator(a, b)).trace()).real();
    CHECK(std::abs(poisson_bracket(fa, fb, rho) - oracle) <= 1e-12);
  }

  CHECK_THROWS_AS(poisson_bracket(fx, functionals::linear(HermitianOperator(
                                          Matrix::Identity(3, 3))),
                                  Matrix::Identity(2, 2) / 2.0),
                  Error);
}

TEST_CASE("bracket algebra: antisymmetry, bilinearity, Jacobi, Leibniz") {
  Rng rng(41);
  const Index d = 8;
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix am = random_hermitian(d, rng).matrix();
    const Matrix bm = random_hermitian(d, rng).matrix();
    const Matrix cm = random_hermitian(d, rng).matrix();
    const auto fa = functionals::linear(HermitianOperator(am), "a");
    const auto fb = functionals::linear(HermitianOperator(bm), "b");
    const auto fc = functionals::linear(HermitianOperator(cm), "c");
    const Matrix rho = random_density(d, d, rng).matrix();

    CHECK(std::abs(poisson_bracket(fa, fb, rho) + poisson_bracket(fb, fa, rho)) <=
          1e-12);

    const double x = 2.0 * rng.uniform() - 1.0, y = 2.0 * rng.uniform() - 1.0;
    const auto comb =
        functionals::sum(functionals::scaled(fa, x), functionals::scaled(fb, y));
    CHECK(std::abs(poisson_bracket(comb, fc, rho) -
                   (x * poisson_bracket(fa, fc, rho) +
                    y * poisson_bracket(fb, fc, rho))) <= 1e-12);

    // Jacobi via one level of nesting
    const double jac = poisson_bracket(fa, functionals::bracket(fb, fc), rho) +
                       poisson_bracket(fb, functionals::bracket(fc, fa), rho) +
                       poisson_bracket(fc, functionals::bracket(fa, fb), rho);
    CHECK(std::abs(jac) <= 1e-10);

    // for linear leaves {a,{b,c}}(rho) collapses to -Tr(rho [A,[B,C]])
    const double nested = poisson_bracket(fa, functionals::bracket(fb, fc), rho);
    const double shortcut = -(rho * commutator(am, commutator(bm, cm))).trace().real();
    CHECK(std::abs(nested - shortcut) <= 1e-12);

    // Leibniz in the second slot
    const auto fg = functionals::product(fb, fc);
    const double lhs = poisson_bracket(fa, fg, rho);
    const double rhs = fb.eval(rho) * poisson_bracket(fa, fc, rho) +
                       fc.eval(rho) * poisson_bracket(fa, fb, rho);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("bracket functional differential agrees with finite differences") {
  // exercises the chain rule, Hessian terms included, on a genuinely
  // nonlinear factor
  const GridSpec g(1, -4.0, 4.0, 8);
  const HermitianOperator h0 = build_h0(g, potentials::harmonic(0.3), 0.5);
  const auto q = functionals::grid_nonlinear(g, h0, 0.8, 2.0);

  Rng rng(53);
  const auto f = functionals::linear(random_hermitian(8, rng), "obs");
  const auto qf = functionals::bracket(q, f);
  const auto fq = functionals::bracket(f, q);

  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rho =
        (0.5 * random_density(8, 8, rng).matrix() + 0.0625 * Matrix::Identity(8, 8))
            .eval();
    const HermitianOperator nu = random_hermitian(8, rng);

    const Matrix dq = qf.differential(rho).matrix();
    CHECK(max_abs((dq + fq.differential(rho).matrix()).eval()) <= 1e-12);

    const double exact = (nu.matrix() * dq).trace().real();
    const double e1 = std::abs(fd_directional(qf, rho, nu, 1e-2) - exact);
    const double e2 = std::abs(fd_directional(qf, rho, nu, 1e-3) - exact);
    CHECK(e2 <= std::max(e1 / 25.0, 1e-11));
  }

  // brackets do not expose a Hessian of their own
  CHECK(!qf.has_differential_derivative());
  CHECK_THROWS_WITH_AS(
      qf.differential_derivative(Matrix::Identity(8, 8) / 8.0,
                                 Matrix::Identity(8, 8)),
      doctest::Contains("no differential derivative"), Error);
}
