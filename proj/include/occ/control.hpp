// Monte Carlo estimation of occupation-dependent control objectives, policy-set value
// bounds, the Hamiltonian, and the quantitative stability diagnostics: the Gronwall-type
// state estimate, the exit-time estimate (pathwise and L2), the Holder continuity probe
// of the cost in the initial data, and the two-point trace inequality behind the
// comparison argument.
#ifndef OCC_CONTROL_HPP
#define OCC_CONTROL_HPP

#include <utility>
#include <vector>

#include "occ/osde.hpp"

namespace occ {

// Second-order jet (theta, Delta, Gamma) the Hamiltonian acts on: theta stands in for
// the occupation derivative, Delta for the gradient, Gamma for the Hessian.
struct JetPoint {
  double theta = 0.0;
  Vec delta;
  Mat gamma;  // symmetric d x d
};

// Expected total cost J(o, x, policy) = E[ integral_0^tau ell dt + g(O_tau, X_tau) ].
// On the boundary |o| = T no time elapses: returns g(o, x) exactly with zero standard
// error and no simulation.
McEstimate estimate_cost(const OsdeModel& model, const ControlPolicy& policy,
                         const SimInit& init, double dt, std::int64_t n_paths,
                         std::uint64_t seed, int threads = 1);

enum class Sense { kMin, kMax };

// Best policy over a finite set under common random numbers (identical seeds and path
// indices for every policy). The result bounds the true optimal value from above (kMin)
// or below (kMax), since the supplied set is a subset of all admissible controls.
struct PolicySweep {
  std::vector<McEstimate> estimates;  // one per supplied policy, same order
  std::size_t best_index = 0;
  Sense sense = Sense::kMin;
};
PolicySweep value_over_policies(const OsdeModel& model,
                                const std::vector<ControlPolicy>& policies,
                                const SimInit& init, double dt, std::int64_t n_paths,
                                std::uint64_t seed, Sense sense, int threads = 1);

// H(o, x, zeta) = -inf_a [ lambda theta + b . Delta + 1/2 tr(sigma sigma^T Gamma) + ell ],
// minimized exactly over the model's finite control grid. Nonincreasing in Gamma
// (degenerate ellipticity: each inner objective grows with Gamma against the PSD
// coefficient sigma sigma^T, so the infimum grows and its negative shrinks).
double hamiltonian(const OsdeModel& model, const ParabolicPoint& p, const JetPoint& jet);

// ---- Stability diagnostics on coupled ensembles ----------------------------------------

// E[ sup_{t_n <= tau'} rho^2(O_n - O'_n, X_n - X'_n) ] <= C1 rho^2(initial gap), with
//   T* = c* T,  C = c*^2 [3(T* + 4) + 2(T + T*)^2],  C1 = 3 e^{C T*}.
// Both sides use the cylindrical norm truncated at member K; the closed-form bound on
// what truncation can omit from the left side is reported alongside (not gated, since
// the clean inequality between truncated quantities is what the estimate predicts).
struct GronwallReport {
  McEstimate lhs;          // E[sup rho_K^2] over coupled paths
  double rhs = 0.0;        // C1 * rho0^2
  double rho0 = 0.0;       // truncated parabolic gap of the initial data
  double t_star = 0.0;
  double c_const = 0.0;
  double c1_const = 0.0;
  double lhs_tail_bound = 0.0;  // sup over omitted members: tail_sup_sq(K) * (|O|+|O'|)^2
  int K = 0;
  bool pass = false;       // lhs.mean + 3 lhs.stderr <= rhs
};
GronwallReport gronwall_diagnostic(const OsdeModel& model, const ControlPolicy& policy,
                                   const SimInit& init, const SimInit& init_prime, double dt,
                                   std::int64_t n_paths, std::uint64_t seed, int K = 64,
                                   int threads = 1);

// Exit-time stability: pathwise |tau - tau'| <= c* sup_n |Lambda_n - Lambda'_n| + 2 dt
// on every coupled pair, and ||tau - tau'||_{L2} <= C2 rho(initial gap) with
//   C2 = c* sqrt(2 (c0^{-2} + c*^2 T*^2 C1)).
struct ExitTimeReport {
  McEstimate sq_diff;      // E[(tau - tau')^2]
  double l2_diff = 0.0;    // sqrt(sq_diff.mean)
  double l2_stderr = 0.0;  // delta-method standard error of l2_diff
  double rhs = 0.0;        // C2 * rho0
  double rho0 = 0.0;
  double t_star = 0.0;
  double c2_const = 0.0;
  bool pathwise_pass = false;
  double max_pathwise_slack = 0.0;  // max over pairs of |tau-tau'| - bound (<= 0 when passing)
  bool l2_pass = false;    // l2_diff <= rhs
};
ExitTimeReport exit_time_diagnostic(const OsdeModel& model, const ControlPolicy& policy,
                                    const SimInit& init, const SimInit& init_prime, double dt,
                                    std::int64_t n_paths, std::uint64_t seed, int K = 64,
                                    int threads = 1);

// Cost gap |J(base) - J(perturbed)| against the parabolic gap of the initial data, under
// common random numbers, for each supplied perturbation. The fitted log-log slope probes
// the half-order continuity of the value in the initial point; the proportionality
// constant is not quantitative, so this is a shape diagnostic, not a bound check.
struct HolderRow {
  double rho = 0.0;      // parabolic gap between base and perturbed initial data
  double dj = 0.0;       // |J - J'|
  double stderr_ = 0.0;  // standard error of the paired difference
};
struct HolderReport {
  std::vector<HolderRow> rows;   // one per perturbation, input order
  double slope = 0.0;            // log|dJ| against log rho, rows with rho > 0 and dj > 0
  bool slope_fitted = false;     // false when fewer than 2 usable rows
};
HolderReport holder_probe(const OsdeModel& model, const std::vector<ControlPolicy>& policies,
                          const SimInit& base, const std::vector<SimInit>& perturbations,
                          double dt, std::int64_t n_paths, std::uint64_t seed, Sense sense,
                          int threads = 1);

// Two-point second-order trace inequality: for every admissible pair (Gamma, Gamma')
// with  -(3/eps) I <= diag(Gamma, -Gamma') <= (3/eps) G,  G = [[I,-I],[-I,I]]  (verified
// here by eigenvalue checks), and every control a on the grid,
//
//   tr( (sigma sigma^T)(o, x, a) Gamma - (sigma sigma^T)(o', x', a) Gamma' )
//       <= (3/eps) || sigma(o, x, a) - sigma(o', x', a) ||_F^2.
//
// Inadmissible pairs are counted and skipped, never tested.
struct CilReport {
  std::int64_t n_supplied = 0;
  std::int64_t n_admissible = 0;
  std::int64_t n_rejected = 0;
  bool all_pass = false;
  double max_violation = 0.0;   // max over tested combos of lhs - rhs
  double rho = 0.0;             // parabolic gap of the two points
  double lipschitz_rhs = 0.0;   // (3 c*^2 / eps) rho^2, the coarser closed-form ceiling
};
CilReport cil_trace_check(const OsdeModel& model, const ParabolicPoint& p,
                          const ParabolicPoint& p_prime, double epsilon,
                          const std::vector<std::pair<Mat, Mat>>& gamma_pairs);

// Rejection sampler for admissible (Gamma, Gamma') pairs: draws Gamma' symmetric, sets
// Gamma = Gamma' - Q with Q positive semidefinite, and keeps the pair only if the
// two-sided eigenvalue condition above verifies. Cannot emit a false admissible.
std::vector<std::pair<Mat, Mat>> sample_admissible_gamma_pairs(int dim, double epsilon,
                                                               int count, std::uint64_t seed);

}  // namespace occ

#endif  // OCC_CONTROL_HPP
