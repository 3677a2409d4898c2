#include "occ/pde.hpp"

#include <algorithm>
#include <cmath>

namespace occ {

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw PreconditionError(std::string(what) + " produced a non-finite value");
}

double interp1(const Vec& xs, const Vec& vals, double xq) {
  const double lo = xs(0), hi = xs(xs.size() - 1);
  if (xq <= lo) return vals(0);
  if (xq >= hi) return vals(vals.size() - 1);
  const double step = xs(1) - xs(0);
  const int i = std::min<int>(static_cast<int>((xq - lo) / step), static_cast<int>(xs.size()) - 2);
  const double t = (xq - xs(i)) / step;
  return (1.0 - t) * vals(i) + t * vals(i + 1);
}

}  // namespace

void Grid2D::validate() const {
  if (!(x_max > x_min) || n_x < 2 || n_t < 1 || !(horizon > 0.0))
    throw PreconditionError("Grid2D: need x_max > x_min, n_x >= 2, n_t >= 1, horizon > 0");
}

void Grid3D::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min) || n_x < 2 || n_y < 2 || n_t < 1 || !(horizon > 0.0))
    throw PreconditionError("Grid3D: need nonempty ranges, n_x, n_y >= 2, n_t >= 1, horizon > 0");
}

double PdeSolution2D::at(double xq) const { return interp1(x, values.row(0).transpose(), xq); }

double PdeSolution3D::at(double xq, double yq) const {
  const double step = y(1) - y(0);
  const double lo = y(0), hi = y(y.size() - 1);
  if (yq <= lo) return interp1(x, initial.col(0), xq);
  if (yq >= hi) return interp1(x, initial.col(initial.cols() - 1), xq);
  const int j = std::min<int>(static_cast<int>((yq - lo) / step), static_cast<int>(y.size()) - 2);
  const double t = (yq - y(j)) / step;
  return (1.0 - t) * interp1(x, initial.col(j), xq) + t * interp1(x, initial.col(j + 1), xq);
}

PdeSolution3D solve_linear_occupied(const std::function<double(double)>& phi,
                                    const std::function<double(double)>& psi,
                                    const Grid3D& grid) {
  grid.validate();
  if (!phi || !psi) throw PreconditionError("solve_linear_occupied: phi and psi required");
  const int nx = grid.n_x, ny = grid.n_y;
  const double dx = grid.dx(), dy = grid.dy(), dt = grid.dt();

  Vec phi_vals(nx + 1);
  double max_abs_phi = 0.0;
  for (int i = 0; i <= nx; ++i) {
    phi_vals(i) = phi(grid.x_node(i));
    check_finite(phi_vals(i), "phi");
    max_abs_phi = std::max(max_abs_phi, std::abs(phi_vals(i)));
  }

  // Monotonicity: the center weight 1 - dt/dx^2 - |phi| dt/dy must stay nonnegative.
  const double cfl = dt * (1.0 / (dx * dx) + max_abs_phi / dy);
  if (cfl > 1.0 + 1e-12)
    throw PreconditionError("solve_linear_occupied: CFL violated, need dt (1/dx^2 + max|phi|/dy) <= 1");

  PdeSolution3D sol;
  sol.cfl_ratio = cfl;
  sol.scheme = "explicit centered-x upwind-y";
  sol.x = Vec::LinSpaced(nx + 1, grid.x_min, grid.x_max);
  sol.y = Vec::LinSpaced(ny + 1, grid.y_min, grid.y_max);

  Mat u(nx + 1, ny + 1);
  for (int j = 0; j <= ny; ++j) {
    const double pv = psi(grid.y_node(j));
    check_finite(pv, "psi");
    u.col(j).setConstant(pv);
  }
  sol.terminal = u;

  const double cx = 0.5 * dt / (dx * dx);
  Mat next(nx + 1, ny + 1);
  for (int m = 0; m < grid.n_t; ++m) {
    for (int i = 0; i <= nx; ++i) {
      // Copy ghosts: out-of-range neighbors reuse the edge value (zero normal gradient).
      const int im = std::max(i - 1, 0), ip = std::min(i + 1, nx);
      const double adv = phi_vals(i) * dt / dy;
      for (int j = 0; j <= ny; ++j) {
        const int jm = std::max(j - 1, 0), jp = std::min(j + 1, ny);
        const double diff = cx * (u(ip, j) - 2.0 * u(i, j) + u(im, j));
        // Upwind by the sign of phi: transport speed +phi along y when marching backward.
        const double trans = adv >= 0.0 ? adv * (u(i, jp) - u(i, j)) : adv * (u(i, j) - u(i, jm));
        next(i, j) = u(i, j) + diff + trans;
      }
    }
    u.swap(next);
  }
  sol.initial = std::move(u);
  if (!sol.initial.allFinite())
    throw PreconditionError("solve_linear_occupied: non-finite solution values");
  return sol;
}

namespace {

// One backward march shared by the nonlinear band scheme and the plain linear scheme.
// vol2_pick(d2) returns the squared volatility used at a node with discrete second
// difference d2; the surrounding arithmetic is identical for every caller, which is what
// makes a collapsed band byte-identical to the linear solver.
template <typename Vol2Pick>
PdeSolution2D march_bs(const std::function<double(double)>& payoff, double vol2_max,
                       const Grid2D& grid, Vol2Pick vol2_pick, const char* scheme) {
  grid.validate();
  if (!payoff) throw PreconditionError("solve_bsb: payoff required");
  const int nx = grid.n_x;
  const double dx = grid.dx(), dt = grid.dt();
  const double x_abs_max = std::max(std::abs(grid.x_min), std::abs(grid.x_max));

  const double limit = dx * dx / (vol2_max * x_abs_max * x_abs_max);
  if (dt > limit * (1.0 + 1e-12))
    throw PreconditionError("solve_bsb: CFL violated, need dt <= dx^2 / (a_high^2 x_max^2)");

  PdeSolution2D sol;
  sol.cfl_ratio = dt / limit;
  sol.scheme = scheme;
  sol.x = Vec::LinSpaced(nx + 1, grid.x_min, grid.x_max);
  sol.values.resize(grid.n_t + 1, nx + 1);

  Vec u(nx + 1);
  for (int i = 0; i <= nx; ++i) {
    u(i) = payoff(sol.x(i));
    check_finite(u(i), "payoff");
  }
  sol.values.row(grid.n_t) = u.transpose();

  const double inv_dx2 = 1.0 / (dx * dx);
  Vec next(nx + 1);
  for (int m = grid.n_t - 1; m >= 0; --m) {
    next(0) = u(0);     // Dirichlet: boundary values frozen at the payoff's
    next(nx) = u(nx);   // boundary evaluations for the whole march
    for (int i = 1; i < nx; ++i) {
      const double d2 = (u(i + 1) - 2.0 * u(i) + u(i - 1)) * inv_dx2;
      const double v2 = vol2_pick(d2);
      next(i) = u(i) + (0.5 * dt * sol.x(i) * sol.x(i)) * (v2 * d2);
    }
    u.swap(next);
    sol.values.row(m) = u.transpose();
  }
  if (!sol.values.allFinite()) throw PreconditionError("solve_bsb: non-finite solution values");
  return sol;
}

}  // namespace

PdeSolution2D solve_bsb(const std::function<double(double)>& payoff, double a_low,
                        double a_high, const Grid2D& grid, BsbSense sense) {
  if (!(a_low > 0.0) || !(a_high > 0.0) || a_low > a_high)
    throw PreconditionError("solve_bsb: need 0 < a_low <= a_high");
  const double v_low = a_low * a_low, v_high = a_high * a_high;
  if (sense == BsbSense::kSeller)
    return march_bs(
        payoff, v_high, grid, [=](double d2) { return d2 >= 0.0 ? v_high : v_low; },
        "explicit monotone band scheme (seller)");
  return march_bs(
      payoff, v_high, grid, [=](double d2) { return d2 >= 0.0 ? v_low : v_high; },
      "explicit monotone band scheme (buyer)");
}

PdeSolution2D solve_bs_linear(const std::function<double(double)>& payoff, double sigma,
                              const Grid2D& grid) {
  if (!(sigma > 0.0)) throw PreconditionError("solve_bs_linear: sigma must be positive");
  const double v2 = sigma * sigma;
  return march_bs(
      payoff, v2, grid, [=](double) { return v2; }, "explicit linear scheme");
}

void write_slice_csv(std::ostream& out, const PdeSolution2D& sol, int t_row) {
  if (t_row < 0 || t_row >= sol.values.rows())
    throw PreconditionError("write_slice_csv: time row out of range");
  out << "x,value\n";
  for (Eigen::Index i = 0; i < sol.x.size(); ++i)
    out << format_double(sol.x(i)) << ',' << format_double(sol.values(t_row, i)) << '\n';
}

}  // namespace occ
