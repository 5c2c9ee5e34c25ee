#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rhoflow/linalg.hpp"
#include "rhoflow/rng.hpp"

using namespace rhoflow;

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST_CASE("construction validates hermiticity and symmetrizes exactly") {
  Matrix m(2, 2);
  m << Complex(1, 0), Complex(0.25, 0.5), Complex(0.25, -0.5), Complex(2, 0);
  HermitianOperator h(m);
  CHECK(max_abs((h.matrix() - h.matrix().adjoint()).eval()) == 0.0);

  Matrix bad = m;
  bad(0, 1) = Complex(0.3, 0.5);  // asymmetry 0.05 >> tolerance
  CHECK_THROWS_AS(HermitianOperator{bad}, Error);

  Matrix nan = m;
  nan(1, 1) = Complex(std::nan(""), 0);
  CHECK_THROWS_AS(HermitianOperator{nan}, Error);
}

TEST_CASE("sigma_x spectrum is (1, -1)") {
  const Eig e = hermitian_eig(HermitianOperator(pauli_x()));
  CHECK(std::abs(e.eigenvalues(0) - 1.0) <= 1e-14);
  CHECK(std::abs(e.eigenvalues(1) + 1.0) <= 1e-14);
}

TEST_CASE("identity spectrum") {
  const Eig e = hermitian_eig(HermitianOperator(Matrix::Identity(2, 2)));
  CHECK(std::abs(e.eigenvalues(0) - 1.0) <= 1e-14);
  CHECK(std::abs(e.eigenvalues(1) - 1.0) <= 1e-14);
  // columns orthonormal
  CHECK(max_abs((e.eigenvectors.adjoint() * e.eigenvectors -
                 Matrix::Identity(2, 2)).eval()) <= 1e-12);
}

TEST_CASE("eigendecomposition round trip on random hermitian") {
  Rng rng(11);
  for (Index d : {2, 6, 16, 64}) {
    const HermitianOperator h = random_hermitian(d, rng);
    const Eig e = hermitian_eig(h);
    const Matrix rebuilt = e.eigenvectors *
                           e.eigenvalues.cast<Complex>().asDiagonal() *
                           e.eigenvectors.adjoint();
    CHECK(max_abs((rebuilt - h.matrix()).eval()) <= 1e-11 * max_abs(h.matrix()));
    CHECK(max_abs((e.eigenvectors.adjoint() * e.eigenvectors -
                   Matrix::Identity(d, d)).eval()) <= 1e-12);
    // descending order
    for (Index i = 0; i + 1 < d; ++i)
      CHECK(e.eigenvalues(i) >= e.eigenvalues(i + 1));
  }
}

TEST_CASE("eigenvector phase convention: first nonzero component real positive") {
  Rng rng(13);
  const Eig e = hermitian_eig(random_hermitian(6, rng));
  for (Index c = 0; c < 6; ++c) {
    for (Index i = 0; i < 6; ++i) {
      const Complex v = e.eigenvectors(i, c);
      if (std::abs(v) > 1e-12) {
        CHECK(v.real() > 0.0);
        CHECK(std::abs(v.imag()) <= 1e-12 * std::abs(v.real()));
        break;
      }
    }
  }
}

TEST_CASE("unitary_exp at s = 0 is the identity") {
  Rng rng(17);
  const HermitianOperator h = random_hermitian(5, rng);
  CHECK(max_abs((unitary_exp(h, 0.0) - Matrix::Identity(5, 5)).eval()) <= 1e-12);
}

TEST_CASE("unitary_exp of sigma_z at pi is -I") {
  const Matrix u = unitary_exp(HermitianOperator(pauli_z()), M_PI);
  CHECK(max_abs((u + Matrix::Identity(2, 2)).eval()) <= 1e-12);
}

TEST_CASE("unitary_exp matches the closed form for sigma_x") {
  // exp(-i t sx) = cos(t) I - i sin(t) sx
  const double t = 0.3;
  const Matrix u = unitary_exp(HermitianOperator(pauli_x()), t);
  const Matrix expect = std::cos(t) * Matrix::Identity(2, 2) -
                        Complex(0, 1) * std::sin(t) * pauli_x();
  CHECK(max_abs((u - expect).eval()) <= 1e-14);
}

TEST_CASE("unitary_exp is unitary and satisfies the group law") {
  Rng rng(19);
  const HermitianOperator h = random_hermitian(12, rng);
  const Matrix u = unitary_exp(h, 0.3);
  CHECK(max_abs((u.adjoint() * u - Matrix::Identity(12, 12)).eval()) <= 1e-12);
  const Matrix lhs = unitary_exp(h, 0.2) * unitary_exp(h, 0.5);
  const Matrix rhs = unitary_exp(h, 0.7);
  CHECK(max_abs((lhs - rhs).eval()) <= 1e-10);
}

TEST_CASE("polar_unitary projects a drifted product back to the unitary group") {
  Rng rng(23);
  const Matrix u0 = unitary_exp(random_hermitian(8, rng), 0.9);
  Matrix drifted = u0;
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j)
      drifted(i, j) += 1e-8 * rng.complex_normal();
  const Matrix u = polar_unitary(drifted);
  CHECK(max_abs((u.adjoint() * u - Matrix::Identity(8, 8)).eval()) <= 1e-13);
  CHECK(max_abs((u - u0).eval()) <= 1e-6);  // stays near the input
}

TEST_CASE("commutator algebra") {
  const Matrix any = Matrix::Random(3, 3);
  CHECK(max_abs(commutator(Matrix::Identity(3, 3).eval(), any)) == 0.0);
  CHECK(max_abs((commutator(pauli_x(), pauli_y()) -
                 Complex(0, 2) * pauli_z()).eval()) <= 1e-14);

  Rng rng(29);
  const Matrix a = random_hermitian(7, rng).matrix();
  const Matrix b = random_hermitian(7, rng).matrix();
  CHECK(max_abs((commutator(a, b) + commutator(b, a)).eval()) <= 1e-13);
  CHECK(std::abs(commutator(a, b).trace()) <= 1e-12);

  Matrix wrong(3, 4);
  wrong.setZero();
  CHECK_THROWS_AS(commutator(a, wrong), Error);
}
