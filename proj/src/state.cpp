#include "rhoflow/state.hpp"

#include <cmath>
#include <utility>

namespace rhoflow {

DensityMatrix DensityMatrix::from_matrix(const Matrix& m, double clip_tol) {
  HermitianOperator op(m);  // checks Hermiticity and finiteness

  const double tr = real_trace(op.matrix());
  if (std::abs(tr - 1.0) > kTraceTol) {
    throw Error("DensityMatrix: trace is " + std::to_string(tr) +
                ", |Tr - 1| = " + std::to_string(std::abs(tr - 1.0)));
  }
  Matrix normalized = op.matrix() / tr;

  const Eig eig = hermitian_eig(HermitianOperator(normalized));
  const double min_eval = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (min_eval < -clip_tol) {
    throw Error("DensityMatrix: not positive semidefinite, min eigenvalue = " +
                std::to_string(min_eval));
  }
  if (min_eval < 0.0) {
    RealVector clipped = eig.eigenvalues.cwiseMax(0.0);
    clipped /= clipped.sum();
    normalized = eig.eigenvectors * clipped.cast<Complex>().asDiagonal() *
                 eig.eigenvectors.adjoint();
  }
  return DensityMatrix(HermitianOperator(normalized));
}

PureState::PureState(Vector psi) : psi_(std::move(psi)) {
  if (psi_.size() == 0 || !psi_.allFinite()) {
    throw Error("PureState: empty or non-finite vector");
  }
  const double n = psi_.norm();
  if (std::abs(n - 1.0) > kUnitNormTol) {
    throw Error("PureState: norm is " + std::to_string(n) + ", expected 1");
  }
  psi_ /= n;
}

GenuineMixture::GenuineMixture(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw Error("GenuineMixture: empty component list");
  double sum = 0.0;
  const Index d = components_.front().state.dim();
  for (const auto& c : components_) {
    if (c.weight <= 0.0) {
      throw Error("GenuineMixture: weight " + std::to_string(c.weight) +
                  " is not in (0, 1]");
    }
    if (c.state.dim() != d) throw Error("GenuineMixture: mixed dimensions");
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    throw Error("GenuineMixture: weights sum to " + std::to_string(sum) +
                ", |sum - 1| = " + std::to_string(std::abs(sum - 1.0)));
  }
}

PureStateMixture::PureStateMixture(std::vector<double> weights,
                                   std::vector<PureState> states)
    : weights_(std::move(weights)), states_(std::move(states)) {
  if (weights_.empty() || weights_.size() != states_.size()) {
    throw Error("PureStateMixture: need equally many weights and states");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (w <= 0.0) throw Error("PureStateMixture: nonpositive weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    throw Error("PureStateMixture: weights sum to " + std::to_string(sum));
  }
}

GenuineMixture PureStateMixture::to_genuine() const {
  std::vector<GenuineMixture::Component> comps;
  comps.reserve(weights_.size());
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    comps.push_back({weights_[j], projector(states_[j])});
  }
  return GenuineMixture(std::move(comps));
}

DensityMatrix density_from_matrix(const Matrix& m) {
  return DensityMatrix::from_matrix(m);
}

DensityMatrix projector(const PureState& psi) {
  const Matrix p = psi.vector() * psi.vector().adjoint();
  return DensityMatrix::from_matrix(p);
}

DensityMatrix barycenter(const GenuineMixture& m) {
  Matrix sum = Matrix::Zero(m.dim(), m.dim());
  for (const auto& c : m.components()) {
    sum += c.weight * c.state.matrix();
  }
  return DensityMatrix::from_matrix(sum);
}

double expectation(const DensityMatrix& rho, const HermitianOperator& a) {
  if (rho.dim() != a.dim()) {
    throw Error("expectation: dimension mismatch (" + std::to_string(rho.dim()) +
                " vs " + std::to_string(a.dim()) + ")");
  }
  return (rho.matrix() * a.matrix()).trace().real();
}

double purity(const DensityMatrix& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

namespace {

Matrix hermitian_power(const Matrix& a, int k) {
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

}  // namespace

double mixture_expectation(const GenuineMixture& m, const ObservableField& a, int k) {
  if (k < 1) throw Error("mixture_expectation: moment order must be >= 1");
  double sum = 0.0;
  for (const auto& c : m.components()) {
    const HermitianOperator ac = a(c.state);
    if (ac.dim() != c.state.dim()) {
      throw Error("mixture_expectation: observable field dimension mismatch");
    }
    sum += c.weight * (c.state.matrix() * hermitian_power(ac.matrix(), k)).trace().real();
  }
  return sum;
}

double scalar_moment(const GenuineMixture& m, const ObservableField& a, int k) {
  if (k < 1) throw Error("scalar_moment: moment order must be >= 1");
  double sum = 0.0;
  for (const auto& c : m.components()) {
    const double v = expectation(c.state, a(c.state));
    sum += c.weight * std::pow(v, k);
  }
  return sum;
}

PureState purify(const DensityMatrix& rho) {
  const Index d = rho.dim();
  const Eig eig = hermitian_eig(rho.op());
  Vector phi = Vector::Zero(d * d);
  // Phi[(i, k)] = sqrt(w_k) v_k[i]; ancilla index k runs over the eigenbasis.
  for (Index k = 0; k < d; ++k) {
    const double w = std::max(eig.eigenvalues(k), 0.0);
    if (w == 0.0) continue;
    const double rw = std::sqrt(w);
    for (Index i = 0; i < d; ++i) {
      phi(i * d + k) = rw * eig.eigenvectors(i, k);
    }
  }
  return PureState(std::move(phi));
}

DensityMatrix partial_trace_second(const DensityMatrix& sigma, Index d, Index d2) {
  if (d < 1 || d2 < 1 || sigma.dim() != d * d2) {
    throw Error("partial_trace_second: dimension " + std::to_string(sigma.dim()) +
                " does not factor as " + std::to_string(d) + " * " + std::to_string(d2));
  }
  const Matrix& s = sigma.matrix();
  Matrix rho = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      Complex acc = 0.0;
      for (Index a = 0; a < d2; ++a) {
        acc += s(i * d2 + a, j * d2 + a);
      }
      rho(i, j) = acc;
    }
  }
  return DensityMatrix::from_matrix(rho);
}

}  // namespace rhoflow
