#include "rhoflow/grid.hpp"

#include <cmath>

namespace rhoflow {

GridSpec::GridSpec(int n, double x_min, double x_max, int points)
    : n_(n), x_min_(x_min), x_max_(x_max), points_(points) {
  if (n != 1 && n != 2) throw Error("grid dimension must be 1 or 2");
  if (!(x_max > x_min)) throw Error("grid requires x_max > x_min");
  if (points < 4) throw Error("grid needs at least 4 points per axis");
  Index total = points;
  for (int i = 1; i < n; ++i) total *= points;
  if (total > 256) throw Error("grid too large: total points exceed 256");
}

double GridSpec::cell_volume() const {
  double dv = spacing();
  for (int i = 1; i < n_; ++i) dv *= spacing();
  return dv;
}

Index GridSpec::dim() const {
  Index total = points_;
  for (int i = 1; i < n_; ++i) total *= points_;
  return total;
}

std::array<double, 2> GridSpec::point(Index k) const {
  const double dx = spacing();
  if (n_ == 1) return {x_min_ + (k + 0.5) * dx, 0.0};
  const Index i = k / points_, j = k % points_;
  return {x_min_ + (i + 0.5) * dx, x_min_ + (j + 0.5) * dx};
}

namespace potentials {

Potential zero() {
  return [](double, double) { return 0.0; };
}

Potential harmonic(double k) {
  return [k](double x, double y) { return k * (x * x + y * y); };
}

}  // namespace potentials

RealVector sample_potential(const GridSpec& grid, const Potential& v) {
  RealVector out(grid.dim());
  for (Index k = 0; k < grid.dim(); ++k) {
    auto p = grid.point(k);
    out(k) = v(p[0], p[1]);
    if (!std::isfinite(out(k))) throw Error("potential sample is not finite");
  }
  return out;
}

HermitianOperator build_h0(const GridSpec& grid, const RealVector& potential_samples,
                           double hop, Boundary bc) {
  const Index d = grid.dim();
  if (potential_samples.size() != d)
    throw Error("potential sample count does not match grid size");
  const double dx = grid.spacing();
  const double w = hop / (dx * dx);
  const int N = grid.points();
  Matrix h = Matrix::Zero(d, d);

  // -hop * second difference: +2n/dx^2 on the diagonal, -1/dx^2 per neighbor.
  for (Index k = 0; k < d; ++k) h(k, k) = 2.0 * grid.n() * w + potential_samples(k);

  auto couple = [&](Index a, Index b) {
    h(a, b) -= w;
    h(b, a) -= w;
  };

  if (grid.n() == 1) {
    for (int i = 0; i + 1 < N; ++i) couple(i, i + 1);
    if (bc == Boundary::Periodic && N > 2) couple(0, N - 1);
  } else {
    auto id = [N](int i, int j) { return Index(i) * N + j; };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (i + 1 < N) couple(id(i, j), id(i + 1, j));
        if (j + 1 < N) couple(id(i, j), id(i, j + 1));
        if (bc == Boundary::Periodic && N > 2) {
          if (i == N - 1) couple(id(i, j), id(0, j));
          if (j == N - 1) couple(id(i, j), id(i, 0));
        }
      }
  }
  return HermitianOperator(h);
}

HermitianOperator build_h0(const GridSpec& grid, const Potential& v, double hop,
                           Boundary bc) {
  return build_h0(grid, sample_potential(grid, v), hop, bc);
}

PureState wave_to_vector(const Vector& samples, const GridSpec& grid) {
  if (samples.size() != grid.dim())
    throw Error("sample count does not match grid size");
  const double scale = std::sqrt(grid.cell_volume());
  Vector v = samples * scale;
  const double nrm = v.norm();
  if (nrm < 1e-14) throw Error("wave samples are identically zero");
  return PureState(v / nrm);
}

RealVector kernel_diagonal(const DensityMatrix& rho, const GridSpec& grid) {
  if (rho.dim() != grid.dim())
    throw Error("density matrix dimension does not match grid size");
  return rho.matrix().diagonal().real() / grid.cell_volume();
}

PureState gaussian_state(const GridSpec& grid, double center, double width) {
  if (grid.n() != 1) throw Error("gaussian_state is one-dimensional");
  if (!(width > 0)) throw Error("gaussian width must be positive");
  Vector s(grid.dim());
  for (Index k = 0; k < grid.dim(); ++k) {
    const double x = grid.point(k)[0] - center;
    s(k) = std::exp(-x * x / (2.0 * width * width));
  }
  return wave_to_vector(s, grid);
}

PureState box_state(const GridSpec& grid, double from, double to) {
  return step_state(grid, from, to, to, 1.0, 1.0);
}

PureState step_state(const GridSpec& grid, double from, double to, double split,
                     double hi, double lo) {
  if (grid.n() != 1) throw Error("step_state is one-dimensional");
  if (!(to > from)) throw Error("step support requires to > from");
  Vector s = Vector::Zero(grid.dim());
  for (Index k = 0; k < grid.dim(); ++k) {
    const double x = grid.point(k)[0];
    if (x < from || x > to) continue;
    s(k) = (x < split) ? hi : lo;
  }
  return wave_to_vector(s, grid);
}

}  // namespace rhoflow
