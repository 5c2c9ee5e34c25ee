#include "rhoflow/dynamics.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace rhoflow {

namespace {

constexpr int kPolarEvery = 100;  // propagator re-orthonormalization cadence

long step_count(double T, double dt) {
  if (!(T > 0)) throw Error("evolution requires T > 0");
  return std::max(1L, std::lround(T / dt));
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// One CocycleMidpoint step unitary at state rho_n: the generator is frozen at
// a self-consistent midpoint, rho_mid <- (rho_n + U rho_n U^dagger)/2 with
// U = exp(-i dt D_{rho_mid}), iterated from rho_mid = rho_n.
Matrix midpoint_step_unitary(const DifferentiableFunctional& q, const Matrix& rho_n,
                             double dt, int iterations) {
  Matrix rho_mid = rho_n;
  for (int i = 0; i < iterations; ++i) {
    const Matrix u = unitary_exp(q.differential(rho_mid), dt);
    rho_mid = hermitize(0.5 * (rho_n + u * rho_n * u.adjoint()));
  }
  return unitary_exp(q.differential(rho_mid), dt);
}

Matrix rk4_density_step(const DifferentiableFunctional& q, const Matrix& rho,
                        double dt) {
  const Matrix k1 = rhs_raw(q, rho);
  const Matrix k2 = rhs_raw(q, (rho + 0.5 * dt * k1).eval());
  const Matrix k3 = rhs_raw(q, (rho + 0.5 * dt * k2).eval());
  const Matrix k4 = rhs_raw(q, (rho + dt * k3).eval());
  return hermitize(rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

void check_rk4_spectrum(const Matrix& rho, long step) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  const double min_eval = es.eigenvalues().minCoeff();
  if (min_eval < -1e-8) {
    throw Error("integration step " + std::to_string(step) +
                " produced eigenvalue " + std::to_string(min_eval) +
                "; reduce dt");
  }
}

Vector rk4_wave_step(const DifferentiableFunctional& q, const Vector& psi,
                     double dt) {
  const Complex mi(0.0, -1.0);
  auto f = [&](const Vector& v) -> Vector {
    const Matrix rho = v * v.adjoint();
    return mi * (q.differential(rho).matrix() * v);
  };
  const Vector k1 = f(psi);
  const Vector k2 = f(psi + 0.5 * dt * k1);
  const Vector k3 = f(psi + 0.5 * dt * k2);
  const Vector k4 = f(psi + dt * k3);
  return psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

void EvolutionMethod::validate() const {
  if (!(dt > 0)) throw Error("EvolutionMethod: dt must be positive");
  if (kind == MethodKind::CocycleMidpoint &&
      (midpoint_iterations < 1 || midpoint_iterations > 8)) {
    throw Error("EvolutionMethod: midpoint_iterations must be in [1, 8]");
  }
}

Matrix rhs_raw(const DifferentiableFunctional& q, const Matrix& rho) {
  const Matrix d = q.differential(rho).matrix();
  return hermitize(Complex(0.0, -1.0) * commutator(d, rho));
}

Matrix rhs(const DifferentiableFunctional& q, const DensityMatrix& rho) {
  return rhs_raw(q, rho.matrix());
}

Trajectory evolve_elementary(const DifferentiableFunctional& q,
                             const DensityMatrix& rho0, double T,
                             const EvolutionMethod& method,
                             const SampleOptions& opts) {
  method.validate();
  if (opts.sample_every < 1) throw Error("sample_every must be >= 1");
  const long n = step_count(T, method.dt);
  const double dt = T / n;
  const bool rk4 = method.kind == MethodKind::RK4Direct;
  // RK4 has no structural positivity; eigenvalues down to -1e-8 are accepted
  // (and clipped) at sample points, anything worse is an integration error.
  const double clip = rk4 ? 1e-8 : kEigClipTol;

  Matrix rho = rho0.matrix();
  Matrix u = Matrix::Identity(rho.rows(), rho.cols());

  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(rho0);
  out.functional_values.push_back(q.eval(rho));
  if (opts.record_cocycle) out.cocycle.push_back(u);

  for (long k = 1; k <= n; ++k) {
    if (rk4) {
      rho = rk4_density_step(q, rho, dt);
      check_rk4_spectrum(rho, k);
    } else {
      const Matrix step_u = midpoint_step_unitary(q, rho, dt, method.midpoint_iterations);
      rho = hermitize(step_u * rho * step_u.adjoint());
      if (opts.record_cocycle) {
        u = step_u * u;
        if (k % kPolarEvery == 0) u = polar_unitary(u);
      }
    }
    if (k % opts.sample_every == 0 || k == n) {
      out.times.push_back(k == n ? T : T * double(k) / double(n));
      out.states.push_back(DensityMatrix::from_matrix(rho, clip));
      out.functional_values.push_back(q.eval(rho));
      if (opts.record_cocycle) out.cocycle.push_back(u);
    }
  }
  return out;
}

PureTrajectory evolve_pure(const DifferentiableFunctional& q, const PureState& psi0,
                           double T, const EvolutionMethod& method,
                           const SampleOptions& opts) {
  method.validate();
  if (opts.sample_every < 1) throw Error("sample_every must be >= 1");
  const long n = step_count(T, method.dt);
  const double dt = T / n;
  const bool rk4 = method.kind == MethodKind::RK4Direct;

  Vector psi = psi0.vector();
  PureTrajectory out;
  auto record = [&](long k) {
    const double nrm = psi.norm();
    out.times.push_back(k == n ? T : T * double(k) / double(n));
    out.norms.push_back(nrm);
    out.states.push_back(PureState(psi / nrm));
    const Matrix rho = psi * psi.adjoint() / (nrm * nrm);
    out.functional_values.push_back(q.eval(rho));
  };
  record(0);

  for (long k = 1; k <= n; ++k) {
    if (rk4) {
      psi = rk4_wave_step(q, psi, dt);
    } else {
      const Matrix rho = psi * psi.adjoint();
      const Matrix step_u = midpoint_step_unitary(q, rho, dt, method.midpoint_iterations);
      psi = step_u * psi;
    }
    if (k % opts.sample_every == 0 || k == n) record(k);
  }
  return out;
}

MixtureTrajectory evolve_genuine(const DifferentiableFunctional& q,
                                 const GenuineMixture& m, double T,
                                 const EvolutionMethod& method,
                                 const SampleOptions& opts) {
  MixtureTrajectory out;
  out.weights.reserve(m.size());
  out.components.reserve(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    out.weights.push_back(m.components()[j].weight);
    try {
      out.components.push_back(
          evolve_elementary(q, m.components()[j].state, T, method, opts));
    } catch (const Error& e) {
      throw Error("mixture component " + std::to_string(j) + ": " + e.what());
    }
  }
  return out;
}

DensityMatrix barycenter_at(const MixtureTrajectory& t, std::size_t i) {
  if (t.components.empty()) throw Error("barycenter_at: empty mixture trajectory");
  Matrix sum;
  for (std::size_t j = 0; j < t.components.size(); ++j) {
    if (i >= t.components[j].states.size())
      throw Error("barycenter_at: sample index out of range");
    const Matrix& m = t.components[j].states[i].matrix();
    if (j == 0)
      sum = t.weights[j] * m;
    else
      sum += t.weights[j] * m;
  }
  return DensityMatrix::from_matrix(sum);
}

double cocycle_identity_residual(const DifferentiableFunctional& q,
                                 const DensityMatrix& rho, double s, double t,
                                 const EvolutionMethod& method) {
  method.validate();
  if (s < 0 || t < 0) throw Error("cocycle durations must be nonnegative");
  if (s == 0.0 || t == 0.0) return 0.0;  // u(0, rho) = identity
  if (method.kind != MethodKind::CocycleMidpoint)
    throw Error("cocycle identity requires the cocycle integrator");

  // One shared step size near method.dt that divides both legs, so the
  // discrete flows compose exactly where the continuous ones do.
  const long n_t = std::max(1L, std::lround(t / method.dt));
  const double dt = t / n_t;
  const long n_s = std::max(1L, std::lround(s / dt));

  auto run = [&](const Matrix& start, long steps) {
    Matrix r = start;
    Matrix u = Matrix::Identity(start.rows(), start.cols());
    for (long k = 1; k <= steps; ++k) {
      const Matrix step_u = midpoint_step_unitary(q, r, dt, method.midpoint_iterations);
      r = hermitize(step_u * r * step_u.adjoint());
      u = step_u * u;
      if (k % kPolarEvery == 0) u = polar_unitary(u);
    }
    return std::pair<Matrix, Matrix>(r, u);
  };

  const auto [rho_t, u_t] = run(rho.matrix(), n_t);
  const auto [rho_ts, u_s_shifted] = run(rho_t, n_s);
  const auto [rho_full, u_full] = run(rho.matrix(), n_t + n_s);
  (void)rho_ts;
  (void)rho_full;
  return max_abs((u_full - u_s_shifted * u_t).eval());
}

Matrix delta_analytic(double eps, double alpha, const PureStateMixture& m,
                      const GridSpec& grid) {
  if (m.dim() != grid.dim())
    throw Error("delta_analytic: mixture dimension does not match grid");
  if (!(alpha > 0)) throw Error("delta_analytic requires alpha > 0");
  const Index d = grid.dim();
  const double dv = grid.cell_volume();
  const std::size_t J = m.size();

  // Per-component position densities |psi_j(x)|^2 and the mixture density.
  std::vector<RealVector> dens(J);
  RealVector mix = RealVector::Zero(d);
  for (std::size_t j = 0; j < J; ++j) {
    dens[j] = m.states()[j].vector().cwiseAbs2() / dv;
    mix += m.weights()[j] * dens[j];
  }

  // chi_j(x) = |psi_j(x)|^(2 alpha) - (sum_k lambda_k |psi_k(x)|^2)^alpha.
  // The discriminator kernel is eps * sum_j lambda_j psi_j(x) conj(psi_j(y))
  // (chi_j(x) - chi_j(y)); written for i d(rho)/dt, so the d(rho)/dt
  // difference carries an extra factor -i, which also makes it Hermitian.
  Matrix delta = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < J; ++j) {
    RealVector chi(d);
    for (Index a = 0; a < d; ++a)
      chi(a) = std::pow(dens[j](a), alpha) - std::pow(mix(a), alpha);
    const Vector& v = m.states()[j].vector();
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b)
        delta(a, b) += m.weights()[j] * v(a) * std::conj(v(b)) * (chi(a) - chi(b));
  }
  return hermitize(Complex(0.0, -1.0) * eps * delta);
}

Matrix delta_numeric(const DifferentiableFunctional& q, const GenuineMixture& m) {
  Matrix acc = Matrix::Zero(m.dim(), m.dim());
  for (std::size_t j = 0; j < m.size(); ++j) {
    const auto& c = m.components()[j];
    const double pur = purity(c.state);
    if (std::abs(pur - 1.0) > 1e-10) {
      throw Error("delta_numeric requires pure components; component " +
                  std::to_string(j) + " has purity " + std::to_string(pur));
    }
    acc += c.weight * rhs(q, c.state);
  }
  acc -= rhs(q, barycenter(m));
  return hermitize(acc);
}

Matrix delta_trajectory_fd(const DifferentiableFunctional& q, const GenuineMixture& m,
                           double t, const EvolutionMethod& method) {
  if (!(t > 0)) throw Error("delta_trajectory_fd requires t > 0");
  SampleOptions final_only;
  final_only.sample_every = std::numeric_limits<int>::max();

  Matrix acc = Matrix::Zero(m.dim(), m.dim());
  for (const auto& c : m.components()) {
    const Trajectory traj = evolve_elementary(q, c.state, t, method, final_only);
    acc += c.weight * traj.states.back().matrix();
  }
  const Trajectory bar = evolve_elementary(q, barycenter(m), t, method, final_only);
  acc -= bar.states.back().matrix();
  return acc / t;
}

}  // namespace rhoflow
