#ifndef RHOFLOW_STATE_HPP
#define RHOFLOW_STATE_HPP

#include <functional>
#include <vector>

#include "rhoflow/linalg.hpp"

namespace rhoflow {

/// A point of the quantum phase space: Hermitian, positive semidefinite,
/// unit trace. The trace is renormalized exactly at construction; eigenvalues
/// in [-clip_tol, 0) are clipped to zero (with trace renormalization), larger
/// violations are hard errors.
class DensityMatrix {
public:
  static DensityMatrix from_matrix(const Matrix& m, double clip_tol = kEigClipTol);

  const Matrix& matrix() const { return op_.matrix(); }
  const HermitianOperator& op() const { return op_; }
  Index dim() const { return op_.dim(); }

private:
  explicit DensityMatrix(HermitianOperator op) : op_(std::move(op)) {}
  HermitianOperator op_;
};

/// Unit vector in the Hilbert space. Stored exactly normalized.
class PureState {
public:
  explicit PureState(Vector psi);

  const Vector& vector() const { return psi_; }
  Index dim() const { return psi_.rows(); }

private:
  Vector psi_;
};

/// A genuine mixture: a specific convex decomposition {(lambda_j, rho_j)},
/// i.e. a discrete probability measure on state space. A single component is
/// the Dirac measure at its state.
class GenuineMixture {
public:
  struct Component {
    double weight;
    DensityMatrix state;
  };

  explicit GenuineMixture(std::vector<Component> components);

  const std::vector<Component>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  Index dim() const { return components_.front().state.dim(); }

private:
  std::vector<Component> components_;
};

/// Weighted list of pure states; the rank-1 special case of a genuine
/// mixture, kept separate because some operations need the vectors.
class PureStateMixture {
public:
  PureStateMixture(std::vector<double> weights, std::vector<PureState> states);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<PureState>& states() const { return states_; }
  std::size_t size() const { return weights_.size(); }
  Index dim() const { return states_.front().dim(); }

  GenuineMixture to_genuine() const;

private:
  std::vector<double> weights_;
  std::vector<PureState> states_;
};

/// Operator-valued function on states, nu -> a(nu).
using ObservableField = std::function<HermitianOperator(const DensityMatrix&)>;

DensityMatrix density_from_matrix(const Matrix& m);

/// Rank-1 projector psi psi^dagger.
DensityMatrix projector(const PureState& psi);

/// Sum of weight * state over the mixture components.
DensityMatrix barycenter(const GenuineMixture& m);

/// Tr(rho A). The trace is real for Hermitian arguments; the imaginary
/// rounding residue is discarded.
double expectation(const DensityMatrix& rho, const HermitianOperator& a);

double purity(const DensityMatrix& rho);

/// k-th moment of an operator-valued observable over a genuine mixture:
/// sum_j lambda_j Tr(rho_j a(rho_j)^k). The power acts on the operator.
double mixture_expectation(const GenuineMixture& m, const ObservableField& a, int k);

/// Alternative reading of the k-th moment where the power acts on the
/// per-component scalar: sum_j lambda_j (Tr rho_j a(rho_j))^k.
double scalar_moment(const GenuineMixture& m, const ObservableField& a, int k);

/// Pure state Phi on the doubled space (dim d^2) with
/// partial_trace_second(projector(Phi)) = rho. Built from the eigenbasis:
/// Phi = sum_k sqrt(w_k) v_k (x) e_k.
PureState purify(const DensityMatrix& rho);

/// Trace out the second factor of a state on a d x d2 product space.
DensityMatrix partial_trace_second(const DensityMatrix& sigma, Index d, Index d2);

}  // namespace rhoflow

#endif
