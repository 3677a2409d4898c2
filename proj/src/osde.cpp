#include "occ/osde.hpp"

#include <algorithm>
#include <cmath>

#include "occ/rng.hpp"

namespace occ {

CoeffState OsdeModel::coeff_state(const OccupationMeasure& o) const {
  CoeffState cs;
  cs.mass = o.mass();
  cs.cyl = Vec::Zero(static_cast<Eigen::Index>(cyl_indices.size()));
  if (!cyl_indices.empty()) {
    if (!family) throw PreconditionError("OsdeModel: cyl_indices declared without a family");
    for (std::size_t i = 0; i < cyl_indices.size(); ++i)
      cs.cyl(static_cast<Eigen::Index>(i)) = family->pair(o, cyl_indices[i]);
  }
  return cs;
}

ControlPolicy ControlPolicy::constant(double a) {
  ControlPolicy p;
  p.kind_ = Kind::kConstant;
  p.constant_ = a;
  return p;
}

ControlPolicy ControlPolicy::feedback(std::function<double(double, const Vec&, const CoeffState&)> f) {
  ControlPolicy p;
  p.kind_ = Kind::kFeedback;
  p.feedback_ = std::move(f);
  return p;
}

ControlPolicy ControlPolicy::piecewise_constant(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.empty())
    throw PreconditionError("ControlPolicy: schedule times/values must be nonempty and equal-length");
  if (!std::is_sorted(times.begin(), times.end()))
    throw PreconditionError("ControlPolicy: schedule times must be sorted");
  ControlPolicy p;
  p.kind_ = Kind::kPiecewise;
  p.times_ = std::move(times);
  p.values_ = std::move(values);
  return p;
}

double ControlPolicy::at(double t, const Vec& x, const CoeffState& cs) const {
  switch (kind_) {
    case Kind::kConstant:
      return constant_;
    case Kind::kFeedback:
      return feedback_(t, x, cs);
    case Kind::kPiecewise: {
      // value on [times_[i], times_[i+1]); before the first knot, the first value applies
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const std::size_t idx = (it == times_.begin()) ? 0 : static_cast<std::size_t>(it - times_.begin() - 1);
      return values_[idx];
    }
  }
  return constant_;
}

namespace {

// Per-step coefficient evaluations at a left endpoint.
struct StepCoeffs {
  double a = 0.0;
  double lambda = 0.0;
  double ell = 0.0;
  Vec b;
  Mat sigma;      // dim x dim (identity if the model has no diffusion callable)
  double sigma_s = 1.0;  // scalar fast path (dim == 1)
  bool scalar_sigma = false;
};

class Stepper {
 public:
  Stepper(const OsdeModel& model, const ControlPolicy& policy, const SimInit& init,
          std::uint64_t path_index)
      : model_(model), policy_(policy), path_index_(path_index) {
    if (model.dim <= 0) throw PreconditionError("OsdeModel: dim must be positive");
    if (init.measure.dim() != model.dim || init.x.size() != model.dim)
      throw PreconditionError("simulate: init dimension mismatch");
    if (model.sigma_scalar && model.dim != 1)
      throw PreconditionError("OsdeModel: sigma_scalar requires dim == 1");
    if (model.sigma_scalar && model.sigma_matrix)
      throw PreconditionError("OsdeModel: set only one of sigma_scalar / sigma_matrix");
    if (model.clock == ClockKind::kCustom && !model.lambda)
      throw PreconditionError("OsdeModel: custom clock requires a lambda callable");

    x_ = init.x;
    measure_ = init.measure;  // copy; deposits appended in place
    cs_ = model.coeff_state(init.measure);
    lambda_node_ = cs_.mass;
    eye_ = Mat::Identity(model.dim, model.dim);
  }

  // Evaluates all coefficients at the current (O, X) left endpoint. A non-null
  // `a_override` bypasses the policy (used to drive a coupled path with the control
  // computed from its partner).
  StepCoeffs eval(double t, std::int64_t step, const double* a_override = nullptr) {
    StepCoeffs c;
    c.a = a_override ? *a_override : policy_.at(t, x_, cs_);
    if (model_.control_lo <= model_.control_hi &&
        !(c.a >= model_.control_lo && c.a <= model_.control_hi))
      throw SimulationError("policy emitted a control outside the admissible hull", path_index_, step);

    c.scalar_sigma = static_cast<bool>(model_.sigma_scalar);
    double frob_sq;
    if (c.scalar_sigma) {
      c.sigma_s = model_.sigma_scalar(cs_, x_, c.a);
      frob_sq = c.sigma_s * c.sigma_s;
    } else if (model_.sigma_matrix) {
      c.sigma = model_.sigma_matrix(cs_, x_, c.a);
      if (c.sigma.rows() != model_.dim || c.sigma.cols() != model_.dim)
        throw SimulationError("sigma matrix has wrong shape", path_index_, step);
      frob_sq = c.sigma.squaredNorm();
    } else {
      c.sigma = eye_;
      frob_sq = static_cast<double>(model_.dim);
    }

    switch (model_.clock) {
      case ClockKind::kStandard:
        c.lambda = 1.0;
        break;
      case ClockKind::kQuadraticVariation:
        c.lambda = frob_sq;
        break;
      case ClockKind::kCustom:
        c.lambda = model_.lambda(cs_, x_, c.a);
        break;
    }
    if (!std::isfinite(c.lambda) || c.lambda < 1.0 / model_.c_star - 1e-12)
      throw SimulationError("clock rate fell below the ellipticity floor 1/c_star", path_index_, step);

    c.b = model_.drift ? model_.drift(cs_, x_, c.a) : Vec::Zero(model_.dim);
    c.ell = model_.running_cost ? model_.running_cost(cs_, x_, c.a) : 0.0;
    return c;
  }

  // Deposits w * delta_x at the current position and updates the coefficient view.
  void deposit(double w) {
    measure_.append(x_, w);
    if (model_.family)
      for (std::size_t i = 0; i < model_.cyl_indices.size(); ++i)
        cs_.cyl(static_cast<Eigen::Index>(i)) += w * model_.family->value(model_.cyl_indices[i], x_);
  }

  // Euler update of X with increment dW (already scaled to the step length).
  void move(const StepCoeffs& c, double dt_eff, const Vec& dw, std::int64_t step) {
    if (c.scalar_sigma)
      x_(0) += c.b(0) * dt_eff + c.sigma_s * dw(0);
    else
      x_ += c.b * dt_eff + c.sigma * dw;
    if (!x_.allFinite())
      throw SimulationError("state became non-finite (blow-up)", path_index_, step);
  }

  void advance_clock(double w, bool final_step, double budget) {
    lambda_node_ = final_step ? budget : lambda_node_ + w;
    cs_.mass = lambda_node_;
  }

  const Vec& x() const { return x_; }
  double clock_value() const { return lambda_node_; }
  const CoeffState& cs() const { return cs_; }
  const OccupationMeasure& measure() const { return measure_; }

 private:
  const OsdeModel& model_;
  const ControlPolicy& policy_;
  std::uint64_t path_index_;
  Vec x_;
  OccupationMeasure measure_{1};
  CoeffState cs_;
  double lambda_node_ = 0.0;
  Mat eye_;
};

struct TraceBuffers {
  std::vector<double> times, clock, dts, lambdas, weights, controls;
  std::vector<Vec> states, dw, drifts;
  std::vector<Mat> sigmas;
};

void fill_trace(SimPath& path, const TraceBuffers& tb, int dim) {
  const auto n = static_cast<Eigen::Index>(tb.dts.size());
  path.times = Eigen::Map<const Vec>(tb.times.data(), n + 1);
  path.clock = Eigen::Map<const Vec>(tb.clock.data(), n + 1);
  path.dts = Eigen::Map<const Vec>(tb.dts.data(), n);
  path.lambdas = Eigen::Map<const Vec>(tb.lambdas.data(), n);
  path.weights = Eigen::Map<const Vec>(tb.weights.data(), n);
  path.controls = Eigen::Map<const Vec>(tb.controls.data(), n);
  path.states.resize(dim, n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) path.states.col(i) = tb.states[static_cast<std::size_t>(i)];
  path.dw.resize(dim, n);
  path.drifts.resize(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    path.dw.col(i) = tb.dw[static_cast<std::size_t>(i)];
    path.drifts.col(i) = tb.drifts[static_cast<std::size_t>(i)];
  }
  path.sigmas = tb.sigmas;
}

// Core single-path loop shared by simulate() and batch(). Exactly one of `trace`/`summary`
// may be null.
void run_path(const OsdeModel& model, const ControlPolicy& policy, const SimInit& init, double dt,
              std::uint64_t seed, std::uint64_t path_index, std::uint64_t phase, SimPath* trace,
              PathSummary* summary) {
  if (!(dt > 0.0)) throw PreconditionError("simulate: dt must be positive");
  const double T = model.horizon;
  const double init_mass = init.measure.mass();
  if (!(init_mass < T))
    throw PreconditionError("simulate: initial mass must be strictly below the budget T");

  Stepper st(model, policy, init, path_index);
  RandomStream rng(seed, path_index, phase);

  // The exit bound tau <= c_star T makes this cap unreachable for admissible models; it
  // exists to flag inadmissible inputs loudly instead of looping forever.
  const std::int64_t max_steps =
      static_cast<std::int64_t>(std::ceil(10.0 * model.c_star * T / dt)) + 16;

  TraceBuffers tb;
  if (trace) {
    tb.times.push_back(0.0);
    tb.clock.push_back(st.clock_value());
    tb.states.push_back(st.x());
  }

  double t = 0.0;
  double running = 0.0;
  Vec dw(model.dim);
  std::int64_t n = 0;
  double tau = 0.0;
  for (;; ++n) {
    if (n >= max_steps)
      throw SimulationError("mass budget not reached within the hard step cap", path_index, n);

    const StepCoeffs c = st.eval(t, n);
    const double w_full = c.lambda * dt;
    const double remaining = T - st.clock_value();
    const bool final_step = w_full >= remaining;
    const double w = final_step ? remaining : w_full;
    const double dt_eff = final_step ? dt * (remaining / w_full) : dt;

    running += c.ell * dt_eff;

    // One particle per step at the left endpoint (the piecewise-constant convention whose
    // convergence backs the Ito residual check).
    st.deposit(w);

    const double sqrt_dt = std::sqrt(dt_eff);
    for (int i = 0; i < model.dim; ++i)
      dw(i) = sqrt_dt * rng.normal(static_cast<std::uint64_t>(n), static_cast<std::uint32_t>(i));
    st.move(c, dt_eff, dw, n);
    st.advance_clock(w, final_step, T);
    t += dt_eff;

    if (trace) {
      tb.times.push_back(t);
      tb.clock.push_back(st.clock_value());
      tb.states.push_back(st.x());
      tb.dts.push_back(dt_eff);
      tb.lambdas.push_back(c.lambda);
      tb.weights.push_back(w);
      tb.controls.push_back(c.a);
      tb.dw.push_back(dw);
      tb.drifts.push_back(c.b);
      tb.sigmas.push_back(c.scalar_sigma ? Mat::Constant(1, 1, c.sigma_s) : c.sigma);
    }

    if (final_step) {
      tau = t;
      break;
    }
  }

  if (trace) {
    trace->path_index = path_index;
    trace->budget = T;
    trace->tau = tau;
    trace->exit_interpolated = false;
    fill_trace(*trace, tb, model.dim);
    trace->init = init;
    trace->running_cost_integral = running;
  }
  if (summary) {
    summary->path_index = path_index;
    summary->tau = tau;
    summary->running_cost = running;
    summary->terminal_cost =
        model.terminal_cost ? model.terminal_cost(st.measure(), st.x()) : 0.0;
    summary->total_cost = summary->running_cost + summary->terminal_cost;
    summary->exit_mass = st.measure().mass();
    summary->exit_x = st.x();
    summary->exit_cyl = st.cs().cyl;
    summary->n_steps = n + 1;
  }
}

}  // namespace

OccupationMeasure SimPath::exit_measure() const {
  OccupationMeasure m = init.measure;
  m.reserve(m.size() + steps());
  for (Eigen::Index n = 0; n < steps(); ++n) {
    const double lam = clock(n);
    if (lam >= budget) break;
    const double take = std::min(weights(n), budget - lam);
    m.append(states.col(n), take);
  }
  return m;
}

SimPath simulate(const OsdeModel& model, const ControlPolicy& policy, const SimInit& init,
                 double dt, std::uint64_t seed, std::uint64_t path_index) {
  SimPath path;
  run_path(model, policy, init, dt, seed, path_index, /*phase=*/0, &path, nullptr);
  return path;
}

std::pair<SimPath, SimPath> simulate_coupled(const OsdeModel& model, const OsdeModel& model2,
                                             const ControlPolicy& policy, const SimInit& init,
                                             const SimInit& init2, double dt, std::uint64_t seed,
                                             std::uint64_t path_index) {
  if (!(dt > 0.0)) throw PreconditionError("simulate_coupled: dt must be positive");
  if (model.dim != model2.dim || model.horizon != model2.horizon)
    throw PreconditionError("simulate_coupled: models must share dim and budget");
  const double T = model.horizon;
  if (!(init.measure.mass() < T) || !(init2.measure.mass() < T))
    throw PreconditionError("simulate_coupled: initial masses must be strictly below T");

  Stepper s1(model, policy, init, path_index);
  Stepper s2(model2, policy, init2, path_index);
  RandomStream rng(seed, path_index, /*phase=*/0);

  const double c_star = std::max(model.c_star, model2.c_star);
  const std::int64_t max_steps = static_cast<std::int64_t>(std::ceil(10.0 * c_star * T / dt)) + 16;

  TraceBuffers tb1, tb2;
  tb1.times.push_back(0.0);
  tb1.clock.push_back(s1.clock_value());
  tb1.states.push_back(s1.x());
  tb2.times.push_back(0.0);
  tb2.clock.push_back(s2.clock_value());
  tb2.states.push_back(s2.x());

  double t = 0.0;
  double tau1 = -1.0, tau2 = -1.0;
  Vec dw(model.dim);
  for (std::int64_t n = 0;; ++n) {
    if (n >= max_steps)
      throw SimulationError("coupled run: budget not reached within the hard step cap", path_index, n);

    // Identical control stream: the policy reads the FIRST path's state and the same
    // control value drives both coefficient evaluations.
    const StepCoeffs c1 = s1.eval(t, n);
    const StepCoeffs c2 = s2.eval(t, n, &c1.a);

    const double sqrt_dt = std::sqrt(dt);
    for (int i = 0; i < model.dim; ++i)
      dw(i) = sqrt_dt * rng.normal(static_cast<std::uint64_t>(n), static_cast<std::uint32_t>(i));

    const double w1 = c1.lambda * dt;
    const double w2 = c2.lambda * dt;

    // Interpolated exits: tau is where the piecewise-linear clock crosses T within the step.
    if (tau1 < 0.0 && s1.clock_value() + w1 >= T) tau1 = t + dt * ((T - s1.clock_value()) / w1);
    if (tau2 < 0.0 && s2.clock_value() + w2 >= T) tau2 = t + dt * ((T - s2.clock_value()) / w2);

    s1.deposit(w1);
    s2.deposit(w2);
    s1.move(c1, dt, dw, n);
    s2.move(c2, dt, dw, n);
    s1.advance_clock(w1, false, T);
    s2.advance_clock(w2, false, T);
    t += dt;

    tb1.times.push_back(t);
    tb1.clock.push_back(s1.clock_value());
    tb1.states.push_back(s1.x());
    tb1.dts.push_back(dt);
    tb1.lambdas.push_back(c1.lambda);
    tb1.weights.push_back(w1);
    tb1.controls.push_back(c1.a);
    tb1.dw.push_back(dw);
    tb1.drifts.push_back(c1.b);
    tb1.sigmas.push_back(c1.scalar_sigma ? Mat::Constant(1, 1, c1.sigma_s) : c1.sigma);
    tb2.times.push_back(t);
    tb2.clock.push_back(s2.clock_value());
    tb2.states.push_back(s2.x());
    tb2.dts.push_back(dt);
    tb2.lambdas.push_back(c2.lambda);
    tb2.weights.push_back(w2);
    tb2.controls.push_back(c2.a);
    tb2.dw.push_back(dw);
    tb2.drifts.push_back(c2.b);
    tb2.sigmas.push_back(c2.scalar_sigma ? Mat::Constant(1, 1, c2.sigma_s) : c2.sigma);

    if (tau1 >= 0.0 && tau2 >= 0.0) break;
  }

  SimPath p1, p2;
  p1.path_index = p2.path_index = path_index;
  p1.budget = p2.budget = T;
  p1.tau = tau1;
  p2.tau = tau2;
  p1.exit_interpolated = p2.exit_interpolated = true;
  fill_trace(p1, tb1, model.dim);
  fill_trace(p2, tb2, model.dim);
  p1.init = init;
  p2.init = init2;
  return {p1, p2};
}

BatchResult batch(const OsdeModel& model, const ControlPolicy& policy, const SimInit& init,
                  const BatchOptions& opts) {
  if (opts.n_paths < 1) throw PreconditionError("batch: n_paths must be >= 1");
  BatchResult result;
  result.summaries.resize(static_cast<std::size_t>(opts.n_paths));

  parallel_for(opts.n_paths, opts.threads, [&](std::int64_t i) {
    run_path(model, policy, init, opts.dt, opts.seed,
             opts.path_index_base + static_cast<std::uint64_t>(i), opts.phase, nullptr,
             &result.summaries[static_cast<std::size_t>(i)]);
  });

  std::vector<double> costs(result.summaries.size());
  for (std::size_t i = 0; i < result.summaries.size(); ++i) costs[i] = result.summaries[i].total_cost;
  result.cost = mc_estimate(costs, opts.seed);
  return result;
}

}  // namespace occ
