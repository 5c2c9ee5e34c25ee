#ifndef RHOFLOW_GRID_HPP
#define RHOFLOW_GRID_HPP

#include <array>
#include <functional>

#include "rhoflow/state.hpp"

namespace rhoflow {

/// Uniform discretization of L^2(R^n), n = 1 or 2. Grid points sit at cell
/// centers: x_k = x_min + (k + 1/2) dx with dx = (x_max - x_min) / N. For
/// n = 2 indices are flattened row-major, k = i*N + j.
///
/// Convention used throughout: a wave function enters the matrix picture as
/// psi_i = psi(x_i) sqrt(dV) and an operator kernel as matrix = kernel * dV
/// (dV = dx^n), so matrix traces equal kernel integrals. This single rule
/// fixes every dx factor in the nonlinear term.
class GridSpec {
public:
  GridSpec(int n, double x_min, double x_max, int points);

  int n() const { return n_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  int points() const { return points_; }

  double spacing() const { return (x_max_ - x_min_) / points_; }
  double cell_volume() const;
  Index dim() const;

  /// Coordinates of flattened index k; the second component is 0 for n = 1.
  std::array<double, 2> point(Index k) const;

private:
  int n_;
  double x_min_, x_max_;
  int points_;
};

enum class Boundary { Dirichlet, Periodic };

/// Pointwise potential v(x, y); y is passed as 0 for one-dimensional grids.
using Potential = std::function<double(double, double)>;

namespace potentials {
Potential zero();
Potential harmonic(double k);  // v(x) = k |x|^2
}  // namespace potentials

/// Potential values at the grid points. Throws on non-finite samples.
RealVector sample_potential(const GridSpec& grid, const Potential& v);

/// H0 = -hop * Laplacian + diag(v(x_k)), with the (2n+1)-point second
/// difference scaled by 1/dx^2. Dirichlet boundaries by default; periodic
/// wrap-around behind the flag.
HermitianOperator build_h0(const GridSpec& grid, const RealVector& potential_samples,
                           double hop, Boundary bc = Boundary::Dirichlet);
HermitianOperator build_h0(const GridSpec& grid, const Potential& v, double hop,
                           Boundary bc = Boundary::Dirichlet);

/// Pack point samples psi(x_k) into a unit vector: psi_i = psi(x_i) sqrt(dV),
/// then normalized. Throws on all-zero input.
PureState wave_to_vector(const Vector& samples, const GridSpec& grid);

/// Kernel diagonal r_k = rho_kk / dV, the position-space probability density;
/// satisfies sum_k r_k dV = 1.
RealVector kernel_diagonal(const DensityMatrix& rho, const GridSpec& grid);

// Named wave shapes (one-dimensional), sampled on the grid and normalized.

/// exp(-(x - center)^2 / (2 width^2)).
PureState gaussian_state(const GridSpec& grid, double center, double width);

/// Indicator of [from, to].
PureState box_state(const GridSpec& grid, double from, double to);

/// Two-valued function on [from, to]: value hi left of split, lo right of it.
/// A plain indicator has constant density on its support; a genuinely
/// two-valued profile is what makes the nonlinear mixture discriminator
/// nonzero, so this shape is the workhorse of the disjoint-support examples.
PureState step_state(const GridSpec& grid, double from, double to, double split,
                     double hi, double lo);

}  // namespace rhoflow

#endif
