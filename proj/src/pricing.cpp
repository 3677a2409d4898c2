#include "occ/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace occ {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

// Adaptive Simpson quadrature with the usual 15x error heuristic on the halved panels.
double simpson_panel(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double fa, double b,
                        double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_panel(a, fa, m, fm, flm);
  const double right = simpson_panel(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = simpson_panel(a, fa, b, fb, fm);
  return adaptive_simpson(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

}  // namespace

PayoffSpec PayoffSpec::occupation_time(double radius) {
  if (!(radius > 0.0)) throw PreconditionError("occupation_time payoff: radius must be positive");
  PayoffSpec p;
  p.kind_ = Kind::kOccupationTime;
  p.radius_ = radius;
  return p;
}

PayoffSpec PayoffSpec::cyl_terminal(std::function<double(double)> phi_scalar,
                                    std::function<double(double)> psi) {
  if (!phi_scalar || !psi) throw PreconditionError("cyl_terminal payoff: missing phi or psi");
  PayoffSpec p;
  p.kind_ = Kind::kCylTerminal;
  p.phi_ = std::move(phi_scalar);
  p.psi_ = std::move(psi);
  return p;
}

PayoffSpec PayoffSpec::asian_put(double strike) {
  if (!(strike > 0.0)) throw PreconditionError("asian_put payoff: strike must be positive");
  PayoffSpec p;
  p.kind_ = Kind::kAsianPut;
  p.strike_ = strike;
  return p;
}

PayoffSpec PayoffSpec::vanilla_call(double strike) {
  if (!(strike > 0.0)) throw PreconditionError("vanilla payoff: strike must be positive");
  PayoffSpec p;
  p.kind_ = Kind::kVanillaCall;
  p.strike_ = strike;
  return p;
}

PayoffSpec PayoffSpec::vanilla_put(double strike) {
  if (!(strike > 0.0)) throw PreconditionError("vanilla payoff: strike must be positive");
  PayoffSpec p;
  p.kind_ = Kind::kVanillaPut;
  p.strike_ = strike;
  return p;
}

PayoffSpec PayoffSpec::custom(std::function<double(const OccupationMeasure&, const Vec&)> g) {
  if (!g) throw PreconditionError("custom payoff: missing function");
  PayoffSpec p;
  p.kind_ = Kind::kCustom;
  p.custom_ = std::move(g);
  return p;
}

double PayoffSpec::on_price(double s) const {
  switch (kind_) {
    case Kind::kVanillaCall:
      return std::max(s - strike_, 0.0);
    case Kind::kVanillaPut:
      return std::max(strike_ - s, 0.0);
    default:
      throw PreconditionError("on_price: payoff is not a vanilla kind");
  }
}

double PayoffSpec::evaluate(const OccupationMeasure& o, const Vec& x) const {
  switch (kind_) {
    case Kind::kOccupationTime:
      return o.ball_mass(Vec::Zero(o.dim()), radius_);
    case Kind::kCylTerminal: {
      const auto& phi = phi_;
      const double paired = o.pair([&phi](Eigen::Map<const Vec> y) { return phi(y(0)); });
      return psi_(paired);
    }
    case Kind::kAsianPut: {
      const double m = o.mass();
      if (!(m > 0.0)) throw PreconditionError("asian_put payoff: occupation mass must be positive");
      return std::max(strike_ - o.coordinate_moment(0) / m, 0.0);
    }
    case Kind::kVanillaCall:
    case Kind::kVanillaPut:
      if (x.size() < 1) throw PreconditionError("vanilla payoff: empty state");
      return on_price(x(0));
    case Kind::kCustom:
      return custom_(o, x);
  }
  throw PreconditionError("payoff: unknown kind");
}

double black_scholes(double spot, double strike, double vol, double maturity, bool call) {
  if (!(spot > 0.0) || !(strike > 0.0)) throw PreconditionError("black_scholes: spot and strike must be positive");
  if (!(vol >= 0.0) || !(maturity >= 0.0)) throw PreconditionError("black_scholes: vol and maturity must be nonnegative");
  const double tv = vol * std::sqrt(maturity);
  if (tv == 0.0) {
    const double intrinsic = call ? spot - strike : strike - spot;
    return std::max(intrinsic, 0.0);
  }
  const double d1 = std::log(spot / strike) / tv + 0.5 * tv;
  const double d2 = d1 - tv;
  const double c = spot * normal_cdf(d1) - strike * normal_cdf(d2);
  return call ? c : c - spot + strike;  // zero-rate parity
}

double black_scholes_delta(double spot, double strike, double vol, double remaining) {
  if (!(spot > 0.0) || !(strike > 0.0)) throw PreconditionError("black_scholes_delta: spot and strike must be positive");
  const double tv = vol * std::sqrt(std::max(remaining, 0.0));
  if (tv == 0.0) return spot > strike ? 1.0 : (spot < strike ? 0.0 : 0.5);
  return normal_cdf(std::log(spot / strike) / tv + 0.5 * tv);
}

double heat_value_closed_form(double o_b, const Vec& x, double remaining, double radius) {
  if (x.size() != 1) throw PreconditionError("heat_value_closed_form: closed form implemented for d = 1");
  if (!(o_b >= 0.0)) throw PreconditionError("heat_value_closed_form: o_b must be nonnegative");
  if (!(remaining >= 0.0)) throw PreconditionError("heat_value_closed_form: remaining budget must be nonnegative");
  if (!(radius > 0.0)) throw PreconditionError("heat_value_closed_form: radius must be positive");
  if (remaining == 0.0) return o_b;
  const double x0 = x(0);
  const auto in_ball_prob = [x0, radius](double s) {
    if (s <= 0.0) {
      if (std::abs(x0) < radius) return 1.0;
      if (std::abs(x0) > radius) return 0.0;
      return 0.5;
    }
    const double rs = std::sqrt(s);
    return normal_cdf((radius - x0) / rs) - normal_cdf((-radius - x0) / rs);
  };
  return o_b + integrate(in_ball_prob, 0.0, remaining, 1e-8);
}

McEstimate price_timer_mc(const std::function<double(const CoeffState&, const Vec&)>& sigma,
                          const PayoffSpec& payoff, double budget, double x0, double dt,
                          std::int64_t n_paths, std::uint64_t seed, double c_star, int threads) {
  if (!sigma) throw PreconditionError("price_timer_mc: missing volatility model");
  if (!(budget > 0.0)) throw PreconditionError("price_timer_mc: budget must be positive");
  OsdeModel model;
  model.dim = 1;
  model.horizon = budget;
  model.c_star = c_star;
  model.clock = ClockKind::kQuadraticVariation;
  model.sigma_scalar = [&sigma](const CoeffState& cs, const Vec& x, double) {
    return sigma(cs, x);
  };
  model.drift = [&sigma](const CoeffState& cs, const Vec& x, double) {
    const double s = sigma(cs, x);
    return Vec::Constant(1, -0.5 * s * s);
  };
  const bool vanilla = payoff.kind() == PayoffSpec::Kind::kVanillaCall ||
                       payoff.kind() == PayoffSpec::Kind::kVanillaPut;
  model.terminal_cost = [&payoff, vanilla](const OccupationMeasure& o, const Vec& x) {
    if (vanilla) return payoff.on_price(std::exp(x(0)));
    return payoff.evaluate(o, x);
  };
  const SimInit init{OccupationMeasure::empty(1), Vec::Constant(1, x0)};
  BatchOptions opts;
  opts.dt = dt;
  opts.n_paths = n_paths;
  opts.seed = seed;
  opts.threads = threads;
  return batch(model, ControlPolicy::constant(0.0), init, opts).cost;
}

UvmReport price_uvm(const PayoffSpec& payoff, double a_low, double a_high, UvmMethod method,
                    const UvmParams& params) {
  if (!(0.0 < a_low && a_low <= a_high)) {
    throw PreconditionError("price_uvm: volatility band must satisfy 0 < a_low <= a_high");
  }
  if (!(params.spot > 0.0)) throw PreconditionError("price_uvm: spot must be positive");
  UvmReport report;
  // Spot-only view of the payoff; the PDE state carries no occupation coordinate, so only
  // vanilla kinds and custom payoffs that ignore the measure are admissible there.
  const PayoffSpec& p = payoff;
  const auto on_spot = [&p](double s) {
    if (p.kind() == PayoffSpec::Kind::kCustom) {
      return p.evaluate(OccupationMeasure::empty(1), Vec::Constant(1, s));
    }
    return p.on_price(s);
  };
  if (method == UvmMethod::kPde) {
    const double margin = params.spot * std::exp(4.0 * a_high * std::sqrt(params.grid.horizon));
    if (params.grid.x_max < margin) {
      throw PreconditionError("price_uvm: grid x_max must cover spot * exp(4 a_high sqrt(T))");
    }
    report.solution = solve_bsb(on_spot, a_low, a_high, params.grid, params.sense);
    report.method = "pde";
    report.price = report.solution.at(params.spot);
    return report;
  }
  // Constant-volatility policy search: every policy is admissible for the band, so the
  // extremal mean bounds the band price from below (seller) / above (buyer).
  OsdeModel model;
  model.dim = 1;
  model.horizon = params.maturity;
  model.c_star = 1.0;
  model.clock = ClockKind::kStandard;
  model.sigma_scalar = [](const CoeffState&, const Vec& x, double a) { return a * x(0); };
  model.control_lo = a_low;
  model.control_hi = a_high;
  model.terminal_cost = [&p](const OccupationMeasure& o, const Vec& x) { return p.evaluate(o, x); };
  std::vector<ControlPolicy> policies;
  const int n = std::max(params.n_controls, 1);
  for (int i = 0; i < n; ++i) {
    const double a =
        n == 1 ? a_low : a_low + (a_high - a_low) * static_cast<double>(i) / (n - 1);
    policies.push_back(ControlPolicy::constant(a));
  }
  const SimInit init{OccupationMeasure::empty(1), Vec::Constant(1, params.spot)};
  const Sense sense = params.sense == BsbSense::kSeller ? Sense::kMax : Sense::kMin;
  const PolicySweep sweep = value_over_policies(model, policies, init, params.dt, params.n_paths,
                                                params.seed, sense, params.threads);
  report.method = "mc-bound";
  report.mc = sweep.estimates[sweep.best_index];
  report.price = report.mc.mean;
  report.best_control = policies[sweep.best_index].at(0.0, init.x, model.coeff_state(init.measure));
  report.caveat = params.sense == BsbSense::kSeller
                      ? "policy-search value: lower bound on the seller price"
                      : "policy-search value: upper bound on the buyer price";
  return report;
}

McEstimate hedging_cost_mc(double sigma_bs, const PayoffSpec& option, double eta,
                           const ControlPolicy& trading_policy, double maturity, double spot,
                           double dt, std::int64_t n_paths, std::uint64_t seed,
                           std::int64_t pilot_paths, int threads) {
  if (!(sigma_bs > 0.0)) throw PreconditionError("hedging_cost_mc: sigma_bs must be positive");
  if (!(eta >= 0.0)) throw PreconditionError("hedging_cost_mc: eta must be nonnegative");
  if (!(maturity > 0.0) || !(spot > 0.0)) {
    throw PreconditionError("hedging_cost_mc: maturity and spot must be positive");
  }
  if (pilot_paths <= 0) pilot_paths = n_paths;

  // Pilot estimate of E[xi] under the spot dynamics alone, on its own random substream so
  // the hedging paths stay comparable across pilot sizes.
  OsdeModel pilot;
  pilot.dim = 1;
  pilot.horizon = maturity;
  pilot.c_star = 1.0;
  pilot.clock = ClockKind::kStandard;
  pilot.sigma_scalar = [sigma_bs](const CoeffState&, const Vec& x, double) {
    return sigma_bs * x(0);
  };
  const PayoffSpec& opt = option;
  pilot.terminal_cost = [&opt](const OccupationMeasure&, const Vec& x) {
    return opt.on_price(x(0));
  };
  const SimInit pilot_init{OccupationMeasure::empty(1), Vec::Constant(1, spot)};
  BatchOptions pilot_opts;
  pilot_opts.dt = dt;
  pilot_opts.n_paths = pilot_paths;
  pilot_opts.seed = seed;
  pilot_opts.threads = threads;
  pilot_opts.phase = 1;
  const double xi_mean = batch(pilot, ControlPolicy::constant(0.0), pilot_init, pilot_opts).cost.mean;

  // Main run on (S, Delta, Y); one Brownian drives both S and the book value Y.
  OsdeModel model;
  model.dim = 3;
  model.horizon = maturity;
  model.c_star = 1.0;
  model.clock = ClockKind::kStandard;
  model.control_lo = -1e18;
  model.control_hi = 1e18;
  model.drift = [](const CoeffState&, const Vec&, double a) {
    Vec b = Vec::Zero(3);
    b(1) = a;
    return b;
  };
  model.sigma_matrix = [sigma_bs](const CoeffState&, const Vec& x, double) {
    Mat s = Mat::Zero(3, 3);
    s(0, 0) = sigma_bs * x(0);
    s(2, 0) = x(1) * sigma_bs * x(0);
    return s;
  };
  model.running_cost = [eta](const CoeffState&, const Vec& x, double a) {
    return eta * std::abs(a) * x(0);
  };
  model.terminal_cost = [&opt](const OccupationMeasure&, const Vec& x) {
    const double hedging_error = opt.on_price(x(0)) - x(2);
    return hedging_error * hedging_error;
  };
  SimInit init{OccupationMeasure::empty(3), Vec::Zero(3)};
  init.x(0) = spot;
  init.x(2) = xi_mean;
  BatchOptions opts;
  opts.dt = dt;
  opts.n_paths = n_paths;
  opts.seed = seed;
  opts.threads = threads;
  return batch(model, trading_policy, init, opts).cost;
}

}  // namespace occ
