// Occupation-derivative calculus on the enlarged state space: a bench of occupation
// functionals v(o, x) with analytic jets, one-sided finite-difference occupation
// derivatives, the discrete Ito residual along simulated paths, and convergence-order
// consistency reports for all derivative formulas.
#ifndef OCC_CALCULUS_HPP
#define OCC_CALCULUS_HPP

#include <memory>
#include <vector>

#include "occ/measure.hpp"
#include "occ/osde.hpp"

namespace occ {

// Analytic jet of a smooth outer function F(z, x), z in R^m being the cylindrical
// coordinates o(f_k) the functional reads. Only x-derivatives up to second order and
// first-order z-derivatives are needed: the occupation component has finite variation,
// so no second-order z terms appear in the chain rule.
struct OuterJet {
  std::function<double(const Vec& z, const Vec& x)> value;
  std::function<Vec(const Vec& z, const Vec& x)> grad_z;  // size m
  std::function<Vec(const Vec& z, const Vec& x)> grad_x;  // size d
  std::function<Mat(const Vec& z, const Vec& x)> hess_x;  // d x d
};

// A functional v(o, x) with closed-form occupation derivative d_occ v, gradient and
// Hessian in x. Kinds:
//
//   mass         v = |o|                              d_occ = 1, grad = 0, hess = 0
//   theta        v = o(q) + q(x), q = sqrt(1+|x|^2)   d_occ = q(x)
//   rho_squared  v = sum_{k<=K} ((o - o_ref)(f_k))^2 + |x - x_ref|^2
//                                                     d_occ = 2 sum_k (o - o_ref)(f_k) f_k(x)
//   cylindrical  v = F(pi(o), x)                      d_occ = sum_k dF/dz_k * f_k(x)
//
// Evaluation along a path is incremental: State caches the coordinates the functional
// reads, and deposit() updates them in O(#members) when one particle is added, so a
// full-path sweep costs O(N) instead of O(N^2).
class TestFunctional {
 public:
  struct State {
    double mass = 0.0;
    double q_pair = 0.0;  // o(q), maintained for theta only
    Vec z;                // cached member coordinates (kind-specific)
  };

  static TestFunctional mass();
  static TestFunctional theta();
  // v = rho^2 against the fixed reference point (o_ref, x_ref), truncated at member K.
  static TestFunctional rho_squared(std::shared_ptr<const SeparatingFamily> family,
                                    OccupationMeasure o_ref, Vec x_ref, int K);
  // v = F(z, x) with z = (o(f_k))_{k in members}.
  static TestFunctional cylindrical(std::shared_ptr<const SeparatingFamily> family,
                                    std::vector<int> members, OuterJet outer);

  State state_of(const OccupationMeasure& o) const;
  // Updates the cached coordinates for o += w * delta_x.
  void deposit(State& s, const Vec& x, double w) const;

  double value(const State& s, const Vec& x) const;
  double d_occ(const State& s, const Vec& x) const;
  Vec grad(const State& s, const Vec& x) const;
  Mat hess(const State& s, const Vec& x) const;

  // Convenience entry points building the state on the fly.
  double value(const OccupationMeasure& o, const Vec& x) const { return value(state_of(o), x); }
  double d_occ(const OccupationMeasure& o, const Vec& x) const { return d_occ(state_of(o), x); }
  Vec grad(const OccupationMeasure& o, const Vec& x) const { return grad(state_of(o), x); }
  Mat hess(const OccupationMeasure& o, const Vec& x) const { return hess(state_of(o), x); }

 private:
  enum class Kind { kMass, kTheta, kRhoSquared, kCylindrical } kind_ = Kind::kMass;
  std::shared_ptr<const SeparatingFamily> family_;
  std::vector<int> members_;  // member indices backing z (0..K for rho^2)
  Vec z_ref_;                 // o_ref coordinates (rho^2)
  Vec x_ref_;                 // reference position (rho^2)
  OuterJet outer_;            // cylindrical only
};

// One-sided occupation-derivative quotient (v(o + h delta_x, x) - v(o, x)) / h. The
// mass cone admits only nonnegative increments, so the difference is one-sided; it
// converges to the analytic d_occ at rate O(h).
double occ_derivative_fd(const TestFunctional& v, const ParabolicPoint& p, double h);

// Residual of the change-of-variable formula along one simulated path:
//
//   v(O_tau, X_tau) - v(O_0, X_0)
//     - sum_n [ (lambda_n d_occ v + b_n . grad v + 1/2 tr(sigma_n sigma_n^T hess v)) dt_n
//               + grad v . sigma_n dW_n ]
//
// with every coefficient and derivative evaluated at the step's left endpoint, matching
// the simulation scheme. The root-mean-square residual over an ensemble vanishes as
// dt -> 0 (at the usual half-order rate driven by the martingale term).
double ito_residual(const TestFunctional& v, const SimPath& path);

// Finite-difference cross-check of the analytic jet. For each h (descending) the report
// records the worst relative error over the supplied points, then fits the observed
// order on the decreasing-error prefix of the sweep. A derivative whose error is at
// roundoff level already at the largest h is flagged exact (order infinity).
struct DerivativeSweep {
  std::vector<double> h;
  std::vector<double> max_rel_err;
  double observed_order = 0.0;
  bool exact = false;
};

struct ConsistencyReport {
  DerivativeSweep d_occ;  // one-sided quotient, first order
  DerivativeSweep grad;   // central quotient, second order
  DerivativeSweep hess;   // central second difference, second order
};

ConsistencyReport derivative_consistency(const TestFunctional& v,
                                         const std::vector<ParabolicPoint>& points,
                                         const std::vector<double>& h_sequence);

// dt-sweep of RMS Ito residuals over a fixed ensemble: for each dt, simulates n_paths
// paths and records sqrt(mean residual^2) with its jackknife-free standard error, then
// fits the log2-log2 slope of RMS against dt.
struct ItoConvergence {
  std::vector<double> dts;
  std::vector<double> rms;
  std::vector<double> rms_stderr;
  double slope = 0.0;  // d log2(rms) / d log2(dt)
};

ItoConvergence ito_convergence(const OsdeModel& model, const ControlPolicy& policy,
                               const SimInit& init, const TestFunctional& v,
                               const std::vector<double>& dts, std::int64_t n_paths,
                               std::uint64_t seed, int threads = 1);

}  // namespace occ

#endif  // OCC_CALCULUS_HPP
