#include "occ/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace occ {

namespace {

double q_of(const Vec& x) { return std::sqrt(1.0 + x.squaredNorm()); }

}  // namespace

TestFunctional TestFunctional::mass() {
  TestFunctional v;
  v.kind_ = Kind::kMass;
  return v;
}

TestFunctional TestFunctional::theta() {
  TestFunctional v;
  v.kind_ = Kind::kTheta;
  return v;
}

TestFunctional TestFunctional::rho_squared(std::shared_ptr<const SeparatingFamily> family,
                                           OccupationMeasure o_ref, Vec x_ref, int K) {
  if (!family) throw PreconditionError("rho_squared: family required");
  if (K < 0 || K > family->k_max()) throw PreconditionError("rho_squared: K out of range");
  TestFunctional v;
  v.kind_ = Kind::kRhoSquared;
  v.family_ = std::move(family);
  v.members_.resize(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) v.members_[static_cast<std::size_t>(k)] = k;
  v.z_ref_ = Vec::Zero(K + 1);
  for (int k = 0; k <= K; ++k) v.z_ref_(k) = v.family_->pair(o_ref, k);
  v.x_ref_ = std::move(x_ref);
  return v;
}

TestFunctional TestFunctional::cylindrical(std::shared_ptr<const SeparatingFamily> family,
                                           std::vector<int> members, OuterJet outer) {
  if (!family) throw PreconditionError("cylindrical: family required");
  if (members.empty()) throw PreconditionError("cylindrical: need at least one member");
  if (!outer.value || !outer.grad_z || !outer.grad_x || !outer.hess_x)
    throw PreconditionError("cylindrical: outer jet must provide value/grad_z/grad_x/hess_x");
  TestFunctional v;
  v.kind_ = Kind::kCylindrical;
  v.family_ = std::move(family);
  v.members_ = std::move(members);
  v.outer_ = std::move(outer);
  return v;
}

TestFunctional::State TestFunctional::state_of(const OccupationMeasure& o) const {
  State s;
  s.mass = o.mass();
  switch (kind_) {
    case Kind::kMass:
      break;
    case Kind::kTheta:
      s.q_pair = o.pair([](Eigen::Map<const Vec> x) { return std::sqrt(1.0 + x.squaredNorm()); });
      break;
    case Kind::kRhoSquared:
    case Kind::kCylindrical:
      s.z = Vec::Zero(static_cast<Eigen::Index>(members_.size()));
      for (std::size_t i = 0; i < members_.size(); ++i)
        s.z(static_cast<Eigen::Index>(i)) = family_->pair(o, members_[i]);
      break;
  }
  return s;
}

void TestFunctional::deposit(State& s, const Vec& x, double w) const {
  s.mass += w;
  switch (kind_) {
    case Kind::kMass:
      break;
    case Kind::kTheta:
      s.q_pair += w * q_of(x);
      break;
    case Kind::kRhoSquared:
    case Kind::kCylindrical:
      for (std::size_t i = 0; i < members_.size(); ++i)
        s.z(static_cast<Eigen::Index>(i)) += w * family_->value(members_[i], x);
      break;
  }
}

double TestFunctional::value(const State& s, const Vec& x) const {
  switch (kind_) {
    case Kind::kMass:
      return s.mass;
    case Kind::kTheta:
      return s.q_pair + q_of(x);
    case Kind::kRhoSquared:
      return (s.z - z_ref_).squaredNorm() + (x - x_ref_).squaredNorm();
    case Kind::kCylindrical:
      return outer_.value(s.z, x);
  }
  return 0.0;
}

double TestFunctional::d_occ(const State& s, const Vec& x) const {
  switch (kind_) {
    case Kind::kMass:
      return 1.0;
    case Kind::kTheta:
      return q_of(x);
    case Kind::kRhoSquared: {
      double acc = 0.0;
      for (std::size_t i = 0; i < members_.size(); ++i)
        acc += (s.z(static_cast<Eigen::Index>(i)) - z_ref_(static_cast<Eigen::Index>(i))) *
               family_->value(members_[i], x);
      return 2.0 * acc;
    }
    case Kind::kCylindrical: {
      const Vec gz = outer_.grad_z(s.z, x);
      double acc = 0.0;
      for (std::size_t i = 0; i < members_.size(); ++i)
        acc += gz(static_cast<Eigen::Index>(i)) * family_->value(members_[i], x);
      return acc;
    }
  }
  return 0.0;
}

Vec TestFunctional::grad(const State& s, const Vec& x) const {
  switch (kind_) {
    case Kind::kMass:
      return Vec::Zero(x.size());
    case Kind::kTheta:
      return x / q_of(x);
    case Kind::kRhoSquared:
      return 2.0 * (x - x_ref_);
    case Kind::kCylindrical:
      return outer_.grad_x(s.z, x);
  }
  return Vec::Zero(x.size());
}

Mat TestFunctional::hess(const State& s, const Vec& x) const {
  const Eigen::Index d = x.size();
  switch (kind_) {
    case Kind::kMass:
      return Mat::Zero(d, d);
    case Kind::kTheta: {
      const double q = q_of(x);
      return (Mat::Identity(d, d) - x * x.transpose() / (q * q)) / q;
    }
    case Kind::kRhoSquared:
      return 2.0 * Mat::Identity(d, d);
    case Kind::kCylindrical:
      return outer_.hess_x(s.z, x);
  }
  return Mat::Zero(d, d);
}

double occ_derivative_fd(const TestFunctional& v, const ParabolicPoint& p, double h) {
  if (!(h > 0.0)) throw PreconditionError("occ_derivative_fd: h must be positive");
  TestFunctional::State s = v.state_of(p.measure);
  const double v0 = v.value(s, p.x);
  v.deposit(s, p.x, h);
  return (v.value(s, p.x) - v0) / h;
}

double ito_residual(const TestFunctional& v, const SimPath& path) {
  if (path.exit_interpolated)
    throw PreconditionError("ito_residual: needs a path whose deposits stop exactly at the budget");
  TestFunctional::State s = v.state_of(path.init.measure);
  const double v0 = v.value(s, path.states.col(0));

  double rhs = 0.0;
  for (Eigen::Index n = 0; n < path.steps(); ++n) {
    const Vec x = path.states.col(n);
    const double docc = v.d_occ(s, x);
    const Vec g = v.grad(s, x);
    const Mat H = v.hess(s, x);
    const Mat& sig = path.sigmas[static_cast<std::size_t>(n)];
    const double drift_part = path.lambdas(n) * docc + path.drifts.col(n).dot(g) +
                              0.5 * (sig * sig.transpose()).cwiseProduct(H).sum();
    rhs += drift_part * path.dts(n) + g.dot(sig * path.dw.col(n));
    v.deposit(s, x, path.weights(n));
  }

  const double v1 = v.value(s, path.exit_state());
  return (v1 - v0) - rhs;
}

namespace {

// Worst relative error over points, with an absolute floor of 1 in the scale so that
// zero analytic derivatives do not blow the ratio up.
double rel_err(double fd, double exact) {
  return std::abs(fd - exact) / std::max(1.0, std::abs(exact));
}

DerivativeSweep make_sweep(std::vector<double> h, std::vector<double> errs) {
  DerivativeSweep sweep;
  sweep.h = std::move(h);
  sweep.max_rel_err = std::move(errs);
  // Truncation error at the largest h already at roundoff level means the analytic
  // formula is exact for this functional; no order is measurable. The threshold must sit
  // above the cancellation floor of second differences of O(10) values at h = 1e-2.
  if (sweep.max_rel_err.front() <= 1e-9) {
    sweep.exact = true;
    sweep.observed_order = std::numeric_limits<double>::infinity();
    return sweep;
  }
  // Fit on the prefix where shrinking h still shrinks the error (before roundoff noise).
  std::size_t m = 1;
  while (m < sweep.max_rel_err.size() && sweep.max_rel_err[m] < sweep.max_rel_err[m - 1]) ++m;
  if (m < 2) {
    sweep.observed_order = 0.0;
    return sweep;
  }
  std::vector<double> lh(m), le(m);
  for (std::size_t i = 0; i < m; ++i) {
    lh[i] = std::log(sweep.h[i]);
    le[i] = std::log(std::max(sweep.max_rel_err[i], 1e-300));
  }
  sweep.observed_order = fit_slope(lh, le);
  return sweep;
}

}  // namespace

ConsistencyReport derivative_consistency(const TestFunctional& v,
                                         const std::vector<ParabolicPoint>& points,
                                         const std::vector<double>& h_sequence) {
  if (points.empty()) throw PreconditionError("derivative_consistency: no points");
  if (h_sequence.size() < 2) throw PreconditionError("derivative_consistency: need >= 2 step sizes");
  std::vector<double> hs = h_sequence;
  std::sort(hs.begin(), hs.end(), std::greater<double>());

  // Per-point states are x-independent, so one state serves all shifted evaluations.
  std::vector<TestFunctional::State> states;
  states.reserve(points.size());
  for (const auto& p : points) states.push_back(v.state_of(p.measure));

  std::vector<double> e_docc(hs.size(), 0.0), e_grad(hs.size(), 0.0), e_hess(hs.size(), 0.0);
  for (std::size_t hi = 0; hi < hs.size(); ++hi) {
    const double h = hs[hi];
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const ParabolicPoint& p = points[pi];
      const TestFunctional::State& s = states[pi];
      const Eigen::Index d = p.x.size();

      e_docc[hi] = std::max(e_docc[hi], rel_err(occ_derivative_fd(v, p, h), v.d_occ(s, p.x)));

      const Vec g = v.grad(s, p.x);
      const Mat H = v.hess(s, p.x);
      const double g_scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      const double h_scale = std::max(1.0, H.cwiseAbs().maxCoeff());
      const double v_mid = v.value(s, p.x);

      Vec xp = p.x, xm = p.x;
      for (Eigen::Index i = 0; i < d; ++i) {
        xp(i) += h;
        xm(i) -= h;
        const double vp = v.value(s, xp);
        const double vm = v.value(s, xm);
        e_grad[hi] = std::max(e_grad[hi], std::abs((vp - vm) / (2.0 * h) - g(i)) / g_scale);
        e_hess[hi] =
            std::max(e_hess[hi], std::abs((vp - 2.0 * v_mid + vm) / (h * h) - H(i, i)) / h_scale);
        // Off-diagonal entries by the four-point cross difference.
        for (Eigen::Index j = i + 1; j < d; ++j) {
          Vec xpp = p.x, xpm = p.x, xmp = p.x, xmm = p.x;
          xpp(i) += h; xpp(j) += h;
          xpm(i) += h; xpm(j) -= h;
          xmp(i) -= h; xmp(j) += h;
          xmm(i) -= h; xmm(j) -= h;
          const double cross = (v.value(s, xpp) - v.value(s, xpm) - v.value(s, xmp) +
                                v.value(s, xmm)) /
                               (4.0 * h * h);
          e_hess[hi] = std::max(e_hess[hi], std::abs(cross - H(i, j)) / h_scale);
        }
        xp(i) = p.x(i);
        xm(i) = p.x(i);
      }
    }
  }

  ConsistencyReport report;
  report.d_occ = make_sweep(hs, std::move(e_docc));
  report.grad = make_sweep(hs, std::move(e_grad));
  report.hess = make_sweep(hs, std::move(e_hess));
  return report;
}

ItoConvergence ito_convergence(const OsdeModel& model, const ControlPolicy& policy,
                               const SimInit& init, const TestFunctional& v,
                               const std::vector<double>& dts, std::int64_t n_paths,
                               std::uint64_t seed, int threads) {
  if (dts.size() < 2) throw PreconditionError("ito_convergence: need >= 2 step sizes");
  ItoConvergence out;
  out.dts = dts;
  out.rms.resize(dts.size());
  out.rms_stderr.resize(dts.size());

  std::vector<double> sq(static_cast<std::size_t>(n_paths));
  for (std::size_t di = 0; di < dts.size(); ++di) {
    parallel_for(n_paths, threads, [&](std::int64_t i) {
      const SimPath path =
          simulate(model, policy, init, dts[di], seed, static_cast<std::uint64_t>(i));
      const double r = ito_residual(v, path);
      sq[static_cast<std::size_t>(i)] = r * r;
    });
    const McEstimate est = mc_estimate(sq, seed);
    out.rms[di] = std::sqrt(est.mean);
    // Delta method: se(sqrt(m)) = se(m) / (2 sqrt(m)).
    out.rms_stderr[di] = out.rms[di] > 0.0 ? est.stderr_ / (2.0 * out.rms[di]) : 0.0;
  }

  std::vector<double> lx(dts.size()), ly(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    lx[i] = std::log2(dts[i]);
    ly[i] = std::log2(std::max(out.rms[i], 1e-300));
  }
  out.slope = fit_slope(lx, ly);
  return out;
}

}  // namespace occ
