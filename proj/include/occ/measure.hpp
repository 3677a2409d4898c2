// Occupation measures as weighted particle systems, the trigonometric separating family,
// cylindrical/parabolic norms, finite-dimensional projections, and the coercivity
// function theta(o, x) = o(q) + q(x) with q(x) = sqrt(1 + |x|^2).
#ifndef OCC_MEASURE_HPP
#define OCC_MEASURE_HPP

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "occ/common.hpp"

namespace occ {

// A finite positive measure on R^d represented exactly as a list of weighted particles.
// Simulated occupation flows are particle measures by construction (one particle per time
// step), so every pairing o(f) below is an exact finite sum, not a quadrature.
//
// Weights must be nonnegative; signed quantities (differences of measures) are always
// handled as ordered pairs of positive measures by the norm routines.
class OccupationMeasure {
 public:
  explicit OccupationMeasure(int dim) : dim_(dim) {
    if (dim <= 0) throw PreconditionError("OccupationMeasure: dim must be positive");
  }

  // Zero measure in dimension `dim`.
  static OccupationMeasure empty(int dim) { return OccupationMeasure(dim); }

  // Single atom w * delta_x.
  static OccupationMeasure atom(const Vec& x, double w) {
    OccupationMeasure o(static_cast<int>(x.size()));
    o.append(x, w);
    return o;
  }

  int dim() const { return dim_; }
  std::int64_t size() const { return static_cast<std::int64_t>(weights_.size()); }

  // Appends one particle. Not thread-safe; measures are treated as immutable once shared.
  void append(const Vec& x, double w) {
    if (x.size() != dim_) throw PreconditionError("OccupationMeasure::append: dimension mismatch");
    if (!(w >= 0.0)) throw PreconditionError("OccupationMeasure::append: negative weight");
    positions_.insert(positions_.end(), x.data(), x.data() + dim_);
    weights_.push_back(w);
  }

  void reserve(std::int64_t n) {
    positions_.reserve(static_cast<std::size_t>(n) * dim_);
    weights_.reserve(static_cast<std::size_t>(n));
  }

  void clear() {
    positions_.clear();
    weights_.clear();
  }

  // Position of particle i as a non-owning Eigen view.
  Eigen::Map<const Vec> position(std::int64_t i) const {
    return Eigen::Map<const Vec>(positions_.data() + static_cast<std::size_t>(i) * dim_, dim_);
  }
  double weight(std::int64_t i) const { return weights_[static_cast<std::size_t>(i)]; }

  // Total mass |o| (deterministic pairwise reduction).
  double mass() const { return pairwise_sum(weights_); }

  // Pairing o(f) = sum_i w_i f(x_i), exact for particle measures.
  double pair(const std::function<double(Eigen::Map<const Vec>)>& f) const {
    std::vector<double> terms(weights_.size());
    for (std::int64_t i = 0; i < size(); ++i) terms[static_cast<std::size_t>(i)] = weights_[i] * f(position(i));
    return pairwise_sum(terms);
  }

  // Mass inside the closed ball B(center, radius): o(1_B).
  double ball_mass(const Vec& center, double radius) const {
    if (center.size() != dim_) throw PreconditionError("ball_mass: dimension mismatch");
    std::vector<double> terms(weights_.size(), 0.0);
    for (std::int64_t i = 0; i < size(); ++i)
      if ((position(i) - center).norm() <= radius) terms[static_cast<std::size_t>(i)] = weights_[i];
    return pairwise_sum(terms);
  }

  // First moment of one coordinate: integral of y_coord o(dy).
  double coordinate_moment(int coord) const {
    std::vector<double> terms(weights_.size());
    for (std::int64_t i = 0; i < size(); ++i)
      terms[static_cast<std::size_t>(i)] = weights_[i] * position(i)(coord);
    return pairwise_sum(terms);
  }

  // Marginal on a subset of coordinates (e.g. the price coordinate of a hedging state).
  OccupationMeasure marginal(const std::vector<int>& coords) const {
    OccupationMeasure out(static_cast<int>(coords.size()));
    out.reserve(size());
    Vec y(static_cast<Eigen::Index>(coords.size()));
    for (std::int64_t i = 0; i < size(); ++i) {
      const auto x = position(i);
      for (std::size_t c = 0; c < coords.size(); ++c) y(static_cast<Eigen::Index>(c)) = x(coords[c]);
      out.append(y, weights_[static_cast<std::size_t>(i)]);
    }
    return out;
  }

  // Merges particles with bitwise-identical positions by adding weights. Optional; never
  // applied implicitly, since it changes nothing mathematically but reorders particles.
  OccupationMeasure compacted() const;

 private:
  int dim_;
  std::vector<double> positions_;  // flattened, dim_ entries per particle
  std::vector<double> weights_;
};

// The countable family (f_k) defining cylindrical coordinates o(f_k) and the cylindrical
// norm. Construction:
//   f_0       = c0 (constant, c0 in (0,1), default 1/4)
//   f_{2j-1}  = a_j cos(xi_j . x),  f_{2j} = a_j sin(xi_j . x)   for oscillators j = 1,2,...
// with dyadic frequencies xi_j (dense in R^d as the family grows) and amplitudes
//   a_j = 2^{-(j+2)} / (1 + |xi_j|),
// so that ||f_k||_{C^1} = ||f||_inf + ||grad f||_inf satisfies the closed forms
//   ||f_0||_{C^1} = c0,  ||a cos(xi.x)||_{C^1} = a (1 + |xi|) = 2^{-(j+2)},
// and sum_k ||f_k||_{C^1}^2 <= c0^2 + sum_j 2*4^{-(j+2)} = c0^2 + 1/24 <= 1.
//
// Members are indexed k = 0..k_max; trigonometric pairs at +xi and -xi span the same
// two-dimensional function space, so only canonical representatives (first nonzero
// frequency component positive) are enumerated.
class SeparatingFamily {
 public:
  SeparatingFamily(int dim, int k_max = 4096, double c0 = 0.25);

  int dim() const { return dim_; }
  int k_max() const { return k_max_; }
  double c0() const { return c0_; }

  // f_k(x) and its gradient.
  double value(int k, const Vec& x) const;
  Vec gradient(int k, const Vec& x) const;

  double sup_norm(int k) const;  // ||f_k||_inf
  double c1_norm(int k) const;   // ||f_k||_inf + ||grad f_k||_inf

  // Pairing o(f_k), exact sum over particles.
  double pair(const OccupationMeasure& o, int k) const;

  // Upper bound on sum_{j > k} ||f_j||_inf^2 including the infinite tail beyond k_max
  // (geometric majorant a_j <= 2^{-(j+2)} for the unstored oscillators).
  double tail_sup_sq(int k) const;

  // Frequency of the oscillator behind member k (k >= 1); exposed for diagnostics.
  const Vec& frequency(int k) const;

 private:
  struct Member {
    enum Kind { kConstant, kCos, kSin } kind;
    Vec xi;         // frequency (empty for the constant member)
    double amp;     // amplitude = sup norm
    double c1;      // amp * (1 + |xi|)
  };
  void check_index(int k) const;

  int dim_;
  int k_max_;
  double c0_;
  std::vector<Member> members_;   // size k_max + 1
  double tail_beyond_stored_;     // sum_{j > stored oscillators} 2 * 4^{-(j+2)}
};

// A point (o, x) of the enlarged state space: an occupation measure paired with the
// current position. Used as initial data for simulations and as the evaluation point of
// occupation functionals.
struct ParabolicPoint {
  OccupationMeasure measure;
  Vec x;
};

// ---- Free operations on measures (expression-friendly, all pure) ----------------------

// Pairing with an arbitrary scalar function.
inline double pair(const OccupationMeasure& o, const std::function<double(Eigen::Map<const Vec>)>& f) {
  return o.pair(f);
}

// Truncated cylindrical norm of the signed difference o_plus - o_minus:
//   value      = ( sum_{k <= K} |(o+ - o-)(f_k)|^2 )^{1/2}
//   tail_bound = ( sum_{k > K} ||f_k||_inf^2 )^{1/2} * (|o+| + |o-|),
// a valid upper bound on the omitted contribution since |(o+ - o-)(f)| <= ||f||_inf (|o+|+|o-|).
struct CylNormResult {
  double value = 0.0;
  double tail_bound = 0.0;
};
CylNormResult cyl_norm(const OccupationMeasure& o_plus, const OccupationMeasure& o_minus,
                       const SeparatingFamily& family, int K);

// Truncated parabolic norm rho((o+ - o-), dx) = sqrt(cyl_norm^2 + |dx|^2).
double parabolic_norm(const OccupationMeasure& o_plus, const OccupationMeasure& o_minus,
                      const Vec& dx, const SeparatingFamily& family, int K);

// Finite-dimensional projection pi_K(o) = (o(f_1), ..., o(f_K)). The constant member f_0
// is excluded by definition; it carries total mass, which projections do not see.
Vec project(const OccupationMeasure& o, const SeparatingFamily& family, int K);

// Omitted-coordinate gap between the truncated cylindrical norm and the projection:
//   gap(K) = sum_{K < k <= k_max} |(o - o')(f_k)|^2.
// Nonnegative, nonincreasing in K, exactly 0 at K = k_max, and bounded by
// tail_sup_sq(K) * (|o| + |o'|)^2.
double projection_gap(const OccupationMeasure& o, const OccupationMeasure& o_prime,
                      const SeparatingFamily& family, int K);

// Closed-form upper bound for the gap given only the masses.
double projection_gap_bound(const SeparatingFamily& family, int K, double mass_sum);

// Coercivity function theta(o, x) = o(q) + q(x), q(x) = sqrt(1 + |x|^2), with its exact
// derivatives: occupation derivative q(x), gradient x/q(x), Hessian (I - x x^T / q^2)/q.
struct ThetaJet {
  double value = 0.0;
  double d_occ = 0.0;
  Vec grad;
  Mat hess;
};
ThetaJet theta_coercive(const OccupationMeasure& o, const Vec& x);
inline ThetaJet theta_coercive(const ParabolicPoint& p) { return theta_coercive(p.measure, p.x); }

// ---- Serialization ---------------------------------------------------------------------

// Columnar text format: header "x0,...,x{d-1},w", one row per particle, %.17g values.
void write_measure_csv(std::ostream& out, const OccupationMeasure& o);
OccupationMeasure read_measure_csv(std::istream& in);

}  // namespace occ

#endif  // OCC_MEASURE_HPP
