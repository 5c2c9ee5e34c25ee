#ifndef RHOFLOW_DYNAMICS_HPP
#define RHOFLOW_DYNAMICS_HPP

#include "rhoflow/functional.hpp"
#include "rhoflow/state.hpp"

namespace rhoflow {

enum class MethodKind { CocycleMidpoint, RK4Direct };

struct EvolutionMethod {
  MethodKind kind = MethodKind::CocycleMidpoint;
  double dt = 1e-3;
  int midpoint_iterations = 3;  // CocycleMidpoint only

  void validate() const;
};

/// Sampled evolution of one elementary state. `cocycle` is filled only when
/// requested and holds the accumulated propagator u(t_i) with u(0) = I, so
/// states[i] = u(t_i) states[0] u(t_i)^dagger for the cocycle integrator.
struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<double> functional_values;  // Q(rho(t_i))
  std::vector<Matrix> cocycle;
};

struct PureTrajectory {
  std::vector<double> times;
  std::vector<PureState> states;  // stored exactly normalized
  std::vector<double> norms;      // raw integrator norm at each sample
  std::vector<double> functional_values;
};

/// Weights never change in time: the flow moves the points of the mixture,
/// not the measure's masses.
struct MixtureTrajectory {
  std::vector<double> weights;
  std::vector<Trajectory> components;
};

struct SampleOptions {
  int sample_every = 1;        // record every k-th step; final step always kept
  bool record_cocycle = false;
};

/// d(rho)/dt = -i [D_rho Q, rho]: Hermitian, traceless.
Matrix rhs(const DifferentiableFunctional& q, const DensityMatrix& rho);
Matrix rhs_raw(const DifferentiableFunctional& q, const Matrix& rho);

/// Integrate the nonlinear density-matrix equation over [0, T].
///
/// CocycleMidpoint: per step the generator is frozen at a self-consistent
/// midpoint state (rho_mid fixed-point iterated midpoint_iterations times,
/// starting from rho_n), then rho_{n+1} = U rho_n U^dagger with
/// U = exp(-i dt D_{rho_mid} Q). Conjugation keeps the spectrum exactly; the
/// accumulated propagator is re-orthonormalized every 100 steps.
///
/// RK4Direct: classical 4th-order step on rhs, post-step Hermitian
/// symmetrization only. A sampled eigenvalue below -1e-8 is an integration
/// error (the remedy is a smaller dt).
///
/// The step count is round(T/dt) (at least 1) and the step size is adjusted
/// to cover [0, T] exactly.
Trajectory evolve_elementary(const DifferentiableFunctional& q,
                             const DensityMatrix& rho0, double T,
                             const EvolutionMethod& method,
                             const SampleOptions& opts = {});

/// Wave-equation form i dpsi/dt = D_psi Q psi. CocycleMidpoint applies the
/// same step unitary as the density-matrix path (built from rho_n =
/// psi psi^dagger), so each step is exactly norm-preserving.
PureTrajectory evolve_pure(const DifferentiableFunctional& q, const PureState& psi0,
                           double T, const EvolutionMethod& method,
                           const SampleOptions& opts = {});

/// Evolve every component of a genuine mixture independently; weights are
/// carried through unchanged. Component failures are reported with the
/// component index.
MixtureTrajectory evolve_genuine(const DifferentiableFunctional& q,
                                 const GenuineMixture& m, double T,
                                 const EvolutionMethod& method,
                                 const SampleOptions& opts = {});

/// Barycenter of the mixture trajectory at sample index i.
DensityMatrix barycenter_at(const MixtureTrajectory& t, std::size_t i);

/// || u(t+s, rho) - u(s, phi_t(rho)) u(t, rho) ||_max, all three propagators
/// integrated with one common step size near method.dt that divides both legs.
/// Zero duration on either side short-circuits to 0 (u(0) = identity).
double cocycle_identity_residual(const DifferentiableFunctional& q,
                                 const DensityMatrix& rho, double s, double t,
                                 const EvolutionMethod& method);

/// Closed-form mixture discriminator at t = 0 for the grid functional with
/// parameters (eps, alpha): the difference between the barycenter's time
/// derivative when the mixture is evolved componentwise and when it is
/// evolved as one elementary state. Hermitian, traceless; identically zero
/// when eps = 0 or the decomposition is trivial.
Matrix delta_analytic(double eps, double alpha, const PureStateMixture& m,
                      const GridSpec& grid);

/// Same discriminator from the equation of motion directly:
/// sum_j lambda_j rhs(Q, P_j) - rhs(Q, barycenter). The linear part of Q
/// cancels between the two terms. Components must be pure.
Matrix delta_numeric(const DifferentiableFunctional& q, const GenuineMixture& m);

/// Trajectory finite-difference approximation of the discriminator:
/// (sum_j lambda_j phi_t(rho_j) - phi_t(barycenter)) / t. Converges to the
/// t = 0 discriminator at rate O(t).
Matrix delta_trajectory_fd(const DifferentiableFunctional& q, const GenuineMixture& m,
                           double t, const EvolutionMethod& method);

}  // namespace rhoflow

#endif
