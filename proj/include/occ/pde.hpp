// Explicit monotone finite-difference solvers for the two projected equations the
// occupation framework reduces to on worked examples:
//
//   (1) the degenerate linear transport-diffusion equation on (t, x, y)
//           -d_t u - 1/2 d_xx u - phi(x) d_y u = 0,   u(T, x, y) = psi(y),
//       where y tracks the running pairing of the occupation flow against phi, and
//
//   (2) the Black-Scholes-Barenblatt equation on (t, x)
//           d_t p + 1/2 x^2 V(d_xx p) = 0,   p(T, x) = payoff(x),
//           V(G) = a_high^2 G for G >= 0, a_low^2 G otherwise   (seller; buyer swapped),
//       the uncertain-volatility bound with the mass budget as the time variable.
//
// Explicit monotone schemes are used on purpose: monotone + consistent + stable schemes
// converge to the viscosity solution, and monotonicity is mechanically testable here.
// Domain truncation margins (e.g. keeping the strike several standard deviations away
// from x_max) are the caller's responsibility; the solvers enforce only CFL.
#ifndef OCC_PDE_HPP
#define OCC_PDE_HPP

#include <functional>
#include <ostream>
#include <string>

#include "occ/common.hpp"

namespace occ {

// Uniform (t, x) grid: n_x space cells on [x_min, x_max], n_t time steps on [0, horizon].
struct Grid2D {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_x = 100;
  double horizon = 1.0;
  int n_t = 100;

  double dx() const { return (x_max - x_min) / n_x; }
  double dt() const { return horizon / n_t; }
  double x_node(int i) const { return x_min + i * dx(); }
  void validate() const;
};

// Adds a y-axis (the projected occupation coordinate) to Grid2D.
struct Grid3D {
  double x_min = -1.0;
  double x_max = 1.0;
  int n_x = 100;
  double y_min = -1.0;
  double y_max = 1.0;
  int n_y = 100;
  double horizon = 1.0;
  int n_t = 100;

  double dx() const { return (x_max - x_min) / n_x; }
  double dy() const { return (y_max - y_min) / n_y; }
  double dt() const { return horizon / n_t; }
  double x_node(int i) const { return x_min + i * dx(); }
  double y_node(int j) const { return y_min + j * dy(); }
  void validate() const;
};

// Full space-time solution of a (t, x) solve. Row m holds time t_m = m * dt, so row 0 is
// the valuation slice and the last row is the supplied terminal data.
struct PdeSolution2D {
  Vec x;            // n_x + 1 node positions
  Mat values;       // (n_t + 1) x (n_x + 1)
  double cfl_ratio = 0.0;  // dt over the stability limit; <= 1 by construction
  std::string scheme;

  // Linear interpolation along the valuation slice (row 0).
  double at(double xq) const;
};

// (t, x, y) solve keeping only the two planes of interest; interior planes would cost
// O(n_t n_x n_y) memory for no consumer.
struct PdeSolution3D {
  Vec x;            // n_x + 1
  Vec y;            // n_y + 1
  Mat initial;      // u(0, x, y), (n_x + 1) x (n_y + 1)
  Mat terminal;     // u(T, x, y) = psi(y) broadcast over x
  double cfl_ratio = 0.0;
  std::string scheme;

  // Bilinear interpolation on the valuation plane.
  double at(double xq, double yq) const;
};

// Solves the degenerate linear equation (1): centered second difference in x, first-order
// upwind in y with the direction chosen per node by the sign of phi(x), copy-ghost
// (zero-gradient) boundaries on all four sides, explicit backward marching from T.
// Throws on CFL violation: dt (1/dx^2 + max|phi|/dy) <= 1 is required.
PdeSolution3D solve_linear_occupied(const std::function<double(double)>& phi,
                                    const std::function<double(double)>& psi,
                                    const Grid3D& grid);

enum class BsbSense { kSeller, kBuyer };

// Solves the Black-Scholes-Barenblatt equation (2): at every node the squared volatility
// is switched on the sign of the discrete second difference (seller: a_high^2 where
// convex; buyer mirrored), Dirichlet boundaries frozen at the payoff's boundary values,
// explicit backward marching. Throws on CFL violation: dt <= dx^2 / (a_high^2 x_max^2).
PdeSolution2D solve_bsb(const std::function<double(double)>& payoff, double a_low,
                        double a_high, const Grid2D& grid, BsbSense sense);

// Plain linear Black-Scholes scheme (constant volatility). Shares the arithmetic of the
// BSB kernel expression-for-expression, so solve_bsb with a collapsed band reproduces it
// bit for bit on the same grid.
PdeSolution2D solve_bs_linear(const std::function<double(double)>& payoff, double sigma,
                              const Grid2D& grid);

// CSV export of one time row: header "x,value", %.17g formatting.
void write_slice_csv(std::ostream& out, const PdeSolution2D& sol, int t_row);

}  // namespace occ

#endif  // OCC_PDE_HPP
