// Euler-Maruyama simulation of the controlled occupied SDE
//
//   dO_t = lambda(O_t, X_t, a_t) delta_{X_t} dt,      dX_t = b dt + sigma dW_t,
//
// with pluggable clocks, exit detection at the mass budget T (the first time the clock
// Lambda_t = |O_t| reaches T), and coupled simulation on a shared Brownian driver for
// stability diagnostics.
#ifndef OCC_OSDE_HPP
#define OCC_OSDE_HPP

#include <functional>
#include <memory>
#include <optional>

#include "occ/measure.hpp"

namespace occ {

// What coefficient functions see of the occupation state: the total mass |O_t| plus the
// cylindrical coordinates O_t(f_k) for the member indices the model declares. This keeps
// per-step cost bounded; terminal costs still receive the full particle measure.
struct CoeffState {
  double mass = 0.0;
  Vec cyl;  // ordered as OsdeModel::cyl_indices
};

enum class ClockKind {
  kStandard,            // lambda == 1 (occupation by elapsed time)
  kQuadraticVariation,  // lambda == ||sigma||_F^2 (occupation by realized variance)
  kCustom,              // lambda supplied explicitly
};

// Coefficient bundle of the occupied SDE. All coefficient callables may be null:
// null drift = 0, null diffusion = identity, null costs = 0.
// Exactly one of sigma_scalar (d = 1 fast path) and sigma_matrix may be set.
struct OsdeModel {
  int dim = 1;
  double horizon = 1.0;  // mass budget T
  double c_star = 1.0;   // growth/Lipschitz/ellipticity constant, >= 1; lambda >= 1/c_star

  ClockKind clock = ClockKind::kStandard;
  std::function<double(const CoeffState&, const Vec&, double)> lambda;  // kCustom only

  std::function<Vec(const CoeffState&, const Vec&, double)> drift;
  std::function<double(const CoeffState&, const Vec&, double)> sigma_scalar;  // dim == 1 only
  std::function<Mat(const CoeffState&, const Vec&, double)> sigma_matrix;

  std::function<double(const CoeffState&, const Vec&, double)> running_cost;          // ell
  std::function<double(const OccupationMeasure&, const Vec&)> terminal_cost;          // g

  // Finite control set (used by Hamiltonian evaluation and policy search); for continuum
  // sets, [control_lo, control_hi] is the interval hull that emitted controls must lie in.
  std::vector<double> control_grid{0.0};
  double control_lo = 0.0;
  double control_hi = 0.0;

  // Cylindrical coordinates the coefficients receive (member indices of `family`).
  std::vector<int> cyl_indices;
  std::shared_ptr<const SeparatingFamily> family;

  // Builds the coefficient view of a raw measure (pairs against the declared members).
  CoeffState coeff_state(const OccupationMeasure& o) const;
};

// Control policy: constant, feedback on (t, x, coefficient view of O_t), or a
// right-open piecewise-constant schedule on time.
class ControlPolicy {
 public:
  static ControlPolicy constant(double a);
  static ControlPolicy feedback(std::function<double(double, const Vec&, const CoeffState&)> f);
  static ControlPolicy piecewise_constant(std::vector<double> times, std::vector<double> values);

  double at(double t, const Vec& x, const CoeffState& cs) const;

 private:
  enum class Kind { kConstant, kFeedback, kPiecewise } kind_ = Kind::kConstant;
  double constant_ = 0.0;
  std::function<double(double, const Vec&, const CoeffState&)> feedback_;
  std::vector<double> times_;
  std::vector<double> values_;
};

// Initial state (o_0, x_0) of the occupied process; Lambda_0 = |o_0|.
using SimInit = ParabolicPoint;

// One discretized trajectory. Nodes are indexed 0..N (N = steps()); per-step arrays hold
// quantities evaluated at the step's left endpoint.
struct SimPath {
  std::uint64_t path_index = 0;
  double budget = 0.0;  // T
  double tau = 0.0;     // exit time: first time Lambda reaches T
  bool exit_interpolated = false;  // true for coupled paths (fixed grid, interpolated tau)

  Vec times;    // N+1 node times
  Mat states;   // dim x (N+1) node states
  Vec clock;    // N+1 node Lambda values (Lambda_0 = |o_0|)
  Vec dts;      // N step lengths actually taken
  Vec lambdas;  // N clock rates at left endpoints
  Vec weights;  // N deposited particle weights
  Vec controls; // N controls
  Mat dw;       // dim x N Brownian increments actually applied
  Mat drifts;   // dim x N drift values at left endpoints
  std::vector<Mat> sigmas;  // N diffusion matrices at left endpoints

  ParabolicPoint init{OccupationMeasure::empty(1), Vec::Zero(1)};
  double running_cost_integral = 0.0;  // rectangle rule sum of ell * dt

  std::int64_t steps() const { return dts.size(); }
  // O_tau: initial measure plus the deposits, truncated at the budget for coupled paths.
  OccupationMeasure exit_measure() const;
  Vec exit_state() const { return states.col(states.cols() - 1); }
};

// Lightweight per-path result for ensembles.
struct PathSummary {
  std::uint64_t path_index = 0;
  double tau = 0.0;
  double terminal_cost = 0.0;
  double running_cost = 0.0;
  double total_cost = 0.0;  // running + terminal
  double exit_mass = 0.0;
  Vec exit_x;
  Vec exit_cyl;  // coefficient-view coordinates of O_tau (model.cyl_indices order)
  std::int64_t n_steps = 0;
};

struct BatchResult {
  std::vector<PathSummary> summaries;
  McEstimate cost;  // mean of total_cost
};

// Single-path simulation. Deterministic given (seed, path_index). The final step is
// shrunk by the fraction (T - Lambda_n)/(lambda_n dt) — with the Brownian increment
// rescaled to the shrunk step's variance — so that Lambda_tau = T exactly.
SimPath simulate(const OsdeModel& model, const ControlPolicy& policy, const SimInit& init,
                 double dt, std::uint64_t seed, std::uint64_t path_index);

// Coupled simulation: two occupied processes driven by the identical Brownian stream and
// the identical control stream (the policy is evaluated along the first path and applied
// to both, matching the coupling used by the stability estimates). Both paths run on the
// same fixed grid until both clocks have crossed T; exit times are interpolated within
// their crossing steps.
std::pair<SimPath, SimPath> simulate_coupled(const OsdeModel& model, const OsdeModel& model2,
                                             const ControlPolicy& policy, const SimInit& init,
                                             const SimInit& init2, double dt, std::uint64_t seed,
                                             std::uint64_t path_index);

struct BatchOptions {
  double dt = 1.0 / 1024.0;
  std::int64_t n_paths = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::uint64_t phase = 0;           // RNG substream (pilot runs use a distinct phase)
  std::uint64_t path_index_base = 0; // first path index
};

// Ensemble of path summaries. Results are independent of the worker count: every path's
// randomness is keyed by its path index and the reduction order is fixed.
BatchResult batch(const OsdeModel& model, const ControlPolicy& policy, const SimInit& init,
                  const BatchOptions& opts);

}  // namespace occ

#endif  // OCC_OSDE_HPP
