// End-to-end pricing scenarios against frozen independent oracles: the occupation-time
// closed form (high-resolution trapezoid reference, see tools/oracles/heat_quadrature.py),
// Black-Scholes reference values, variance-budget exit pricing, volatility-band bounds and
// quadratic hedging identities.
#include <cmath>
#include <vector>

#include "doctest.h"
#include "occ/pricing.hpp"

using namespace occ;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

}  // namespace

TEST_CASE("occupation-time closed form matches the frozen quadrature references") {
  // (collected mass, position) -> value at unit remaining budget minus collected mass,
  // radius 1. References computed by a 10^6-node trapezoid rule before the build.
  struct Ref {
    double o_b, x, value;
  };
  const std::vector<Ref> refs{
      {0.0, 0.0, 0.849320433312}, {0.0, 0.5, 0.767513729350}, {0.0, 2.0, 0.075136348263},
      {0.3, 0.0, 0.932401378676}, {0.3, 0.5, 0.870992585963}, {0.3, 2.0, 0.333785687360},
  };
  for (const Ref& r : refs) {
    const double v = heat_value_closed_form(r.o_b, v1(r.x), 1.0 - r.o_b, 1.0);
    CHECK(std::abs(v - r.value) <= 1e-7);
  }
}

TEST_CASE("occupation-time value: boundary, asymptotics and preconditions") {
  CHECK(heat_value_closed_form(0.4, v1(0.7), 0.0, 1.0) == 0.4);
  // Far from the ball the expected future occupancy vanishes.
  CHECK(heat_value_closed_form(0.2, v1(30.0), 1.0, 1.0) ==
        doctest::Approx(0.2).epsilon(1e-12));
  Vec x2(2);
  x2 << 0.0, 0.0;
  CHECK_THROWS_AS((void)heat_value_closed_form(0.0, x2, 1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS((void)heat_value_closed_form(-0.1, v1(0.0), 1.0, 1.0), PreconditionError);
}

TEST_CASE("black_scholes matches frozen references, parity and expiry limits") {
  CHECK(black_scholes(1.0, 1.0, 0.2, 1.0, true) ==
        doctest::Approx(0.079655674554).epsilon(1e-10));
  CHECK(black_scholes(1.0, 1.0, 0.3, 0.25, true) ==
        doctest::Approx(0.059785288106).epsilon(1e-10));
  CHECK(black_scholes(1.0, 1.0, 0.2, 0.25, true) ==
        doctest::Approx(0.039877611677).epsilon(1e-10));
  CHECK(black_scholes(1.0, 1.0, 0.1, 0.25, true) ==
        doctest::Approx(0.019945036390).epsilon(1e-10));
  CHECK(black_scholes(1.0, 1.1, 0.25, 0.5, false) ==
        doctest::Approx(0.134412147064).epsilon(1e-10));
  // Zero-rate put-call parity: C - P = S - K.
  for (double k : {0.8, 1.0, 1.3}) {
    const double c = black_scholes(1.1, k, 0.35, 0.7, true);
    const double p = black_scholes(1.1, k, 0.35, 0.7, false);
    CHECK(c - p == doctest::Approx(1.1 - k).epsilon(1e-12));
  }
  CHECK(black_scholes(1.2, 1.0, 0.2, 0.0, true) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(black_scholes(1.2, 1.0, 0.0, 1.0, true) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS((void)black_scholes(-1.0, 1.0, 0.2, 1.0, true), PreconditionError);
}

TEST_CASE("black_scholes_delta: interior value and expiry step") {
  // d1 = 0.1 at spot = strike = 1, vol 0.2, one year: delta = Phi(0.1).
  CHECK(black_scholes_delta(1.0, 1.0, 0.2, 1.0) ==
        doctest::Approx(0.5398278372770290).epsilon(1e-12));
  CHECK(black_scholes_delta(1.2, 1.0, 0.2, 0.0) == 1.0);
  CHECK(black_scholes_delta(0.8, 1.0, 0.2, 0.0) == 0.0);
  CHECK(black_scholes_delta(1.0, 1.0, 0.2, 0.0) == 0.5);
}

TEST_CASE("payoff kinds evaluate their closed forms") {
  OccupationMeasure o = OccupationMeasure::atom(v1(1.0), 0.5);
  o.append(v1(3.0), 0.5);

  CHECK(PayoffSpec::occupation_time(1.5).evaluate(o, v1(0.0)) == 0.5);
  CHECK(PayoffSpec::asian_put(2.5).evaluate(o, v1(0.0)) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(PayoffSpec::asian_put(1.5).evaluate(o, v1(0.0)) == 0.0);
  CHECK_THROWS_AS(
      (void)PayoffSpec::asian_put(1.0).evaluate(OccupationMeasure::empty(1), v1(0.0)),
      PreconditionError);

  const PayoffSpec cyl = PayoffSpec::cyl_terminal(
      [](double y) { return y * y; }, [](double z) { return 2.0 * z + 1.0; });
  // o(phi) = 0.5*1 + 0.5*9 = 5, psi(5) = 11.
  CHECK(cyl.evaluate(o, v1(0.0)) == doctest::Approx(11.0).epsilon(1e-14));

  CHECK(PayoffSpec::vanilla_call(1.0).evaluate(o, v1(1.3)) ==
        doctest::Approx(0.3).epsilon(1e-14));
  CHECK(PayoffSpec::vanilla_put(1.0).on_price(0.7) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS((void)PayoffSpec::occupation_time(1.0).on_price(1.0), PreconditionError);
  CHECK_THROWS_AS((void)PayoffSpec::vanilla_call(-1.0), PreconditionError);
}

TEST_CASE("variance-budget pricing: constant payoff has zero variance") {
  const auto one = PayoffSpec::custom(
      [](const OccupationMeasure&, const Vec&) { return 1.0; });
  const auto sigma = [](const CoeffState&, const Vec&) { return 0.2; };
  const McEstimate e = price_timer_mc(sigma, one, 0.04, 0.0, 1.0 / 128.0, 200, 55, 400.0);
  CHECK(e.mean == 1.0);
  CHECK(e.stderr_ == 0.0);
}

TEST_CASE("variance-budget pricing: constant volatility hits Black-Scholes exactly in law") {
  const auto sigma = [](const CoeffState&, const Vec&) { return 0.2; };
  const PayoffSpec call = PayoffSpec::vanilla_call(1.0);
  const McEstimate e = price_timer_mc(sigma, call, 0.04, 0.0, 1.0 / 256.0, 20000, 777, 400.0);
  const double oracle = black_scholes(1.0, 1.0, 0.2, 1.0, true);
  REQUIRE(e.stderr_ > 0.0);
  CHECK(std::abs(e.mean - oracle) <= 3.5 * e.stderr_);
}

TEST_CASE("variance-budget pricing: state-dependent volatility prices identically") {
  const auto sigma = [](const CoeffState&, const Vec& x) {
    return 0.2 + 0.1 * std::sin(x(0));
  };
  const PayoffSpec call = PayoffSpec::vanilla_call(1.0);
  const McEstimate e = price_timer_mc(sigma, call, 0.04, 0.0, 1.0 / 256.0, 20000, 778, 400.0);
  const double oracle = black_scholes(1.0, 1.0, 0.2, 1.0, true);
  CHECK(std::abs(e.mean - oracle) <= 3.5 * e.stderr_);
}

TEST_CASE("a volatility below the admissibility floor aborts loudly") {
  const auto sigma = [](const CoeffState&, const Vec&) { return 0.02; };
  CHECK_THROWS_AS((void)price_timer_mc(sigma, PayoffSpec::vanilla_call(1.0), 0.04, 0.0,
                                       1.0 / 128.0, 4, 1, 400.0),
                  SimulationError);
}

TEST_CASE("volatility-band bounds collapse to Black-Scholes on a point band") {
  const PayoffSpec call = PayoffSpec::vanilla_call(1.0);
  const double oracle = black_scholes(1.0, 1.0, 0.2, 0.25, true);

  UvmParams pde_params;
  pde_params.maturity = 0.25;
  pde_params.spot = 1.0;
  pde_params.grid.x_min = 0.0;
  pde_params.grid.x_max = 4.0;
  pde_params.grid.n_x = 200;
  pde_params.grid.horizon = 0.25;
  pde_params.grid.n_t = 1000;
  const UvmReport pde = price_uvm(call, 0.2, 0.2, UvmMethod::kPde, pde_params);
  CHECK(pde.method == "pde");
  CHECK(std::abs(pde.price - oracle) <= 0.005);

  UvmParams mc_params;
  mc_params.maturity = 0.25;
  mc_params.spot = 1.0;
  mc_params.dt = 1.0 / 512.0;
  mc_params.n_paths = 4000;
  mc_params.seed = 5;
  const UvmReport mc = price_uvm(call, 0.2, 0.2, UvmMethod::kMcBound, mc_params);
  CHECK(mc.method == "mc-bound");
  CHECK(std::abs(mc.mc.mean - oracle) <= 3.5 * mc.mc.stderr_ + 5e-4);
  CHECK(mc.best_control == 0.2);
  CHECK(!mc.caveat.empty());
}

TEST_CASE("non-convex payoffs price strictly inside the band: butterfly ordering") {
  const auto butterfly = PayoffSpec::custom([](const OccupationMeasure&, const Vec& x) {
    const double s = x(0);
    return std::max(s - 0.9, 0.0) - 2.0 * std::max(s - 1.0, 0.0) + std::max(s - 1.1, 0.0);
  });
  auto bs_butterfly = [](double vol) {
    return black_scholes(1.0, 0.9, vol, 0.25, true) - 2.0 * black_scholes(1.0, 1.0, vol, 0.25, true) +
           black_scholes(1.0, 1.1, vol, 0.25, true);
  };
  UvmParams params;
  params.maturity = 0.25;
  params.spot = 1.0;
  params.grid.x_min = 0.0;
  params.grid.x_max = 4.0;
  params.grid.n_x = 200;
  params.grid.horizon = 0.25;
  params.grid.n_t = 1000;
  const UvmReport pde = price_uvm(butterfly, 0.1, 0.3, UvmMethod::kPde, params);
  CHECK(pde.price > bs_butterfly(0.1));
  CHECK(pde.price > bs_butterfly(0.3));

  UvmParams mc_params;
  mc_params.maturity = 0.25;
  mc_params.spot = 1.0;
  mc_params.dt = 1.0 / 512.0;
  mc_params.n_paths = 3000;
  mc_params.seed = 6;
  mc_params.n_controls = 3;
  const UvmReport mc = price_uvm(butterfly, 0.1, 0.3, UvmMethod::kMcBound, mc_params);
  // The policy-search value is a lower bound on the seller price.
  CHECK(pde.price >= mc.mc.mean - 3.0 * mc.mc.stderr_ - 0.005);
  CHECK(mc.caveat.find("lower bound") != std::string::npos);
}

TEST_CASE("the band solver refuses grids that crowd the spot") {
  UvmParams params;
  params.spot = 1.0;
  params.grid.x_max = 1.2;  // far below spot * exp(4 a_high sqrt(T))
  params.grid.n_x = 100;
  params.grid.horizon = 0.25;
  params.grid.n_t = 4000;
  CHECK_THROWS_AS(
      (void)price_uvm(PayoffSpec::vanilla_call(1.0), 0.1, 0.3, UvmMethod::kPde, params),
      PreconditionError);
  CHECK_THROWS_AS(
      (void)price_uvm(PayoffSpec::vanilla_call(1.0), 0.3, 0.1, UvmMethod::kPde, params),
      PreconditionError);
}

TEST_CASE("hedging: no trading and no friction leaves exactly the payoff variance") {
  const PayoffSpec call = PayoffSpec::vanilla_call(1.0);
  const double cost = hedging_cost_mc(0.2, call, 0.0, ControlPolicy::constant(0.0), 0.25, 1.0,
                                      1.0 / 128.0, 2000, 31, 2000)
                          .mean;
  // Oracle: the same spot paths via the one-dimensional model, pilot on phase 1 and main
  // ensemble on phase 0, reduced to mean squared deviation from the pilot mean.
  OsdeModel gbm;
  gbm.dim = 1;
  gbm.horizon = 0.25;
  gbm.c_star = 1.0;
  gbm.clock = ClockKind::kStandard;
  gbm.sigma_scalar = [](const CoeffState&, const Vec& x, double) { return 0.2 * x(0); };
  gbm.terminal_cost = [&call](const OccupationMeasure&, const Vec& x) {
    return call.on_price(x(0));
  };
  const SimInit init{OccupationMeasure::empty(1), v1(1.0)};
  BatchOptions opts;
  opts.dt = 1.0 / 128.0;
  opts.n_paths = 2000;
  opts.seed = 31;
  opts.phase = 1;
  const double xi_mean = batch(gbm, ControlPolicy::constant(0.0), init, opts).cost.mean;
  opts.phase = 0;
  const BatchResult main_run = batch(gbm, ControlPolicy::constant(0.0), init, opts);
  std::vector<double> sq;
  sq.reserve(main_run.summaries.size());
  for (const auto& s : main_run.summaries) {
    const double d = s.terminal_cost - xi_mean;
    sq.push_back(d * d);
  }
  const double oracle = mc_estimate(sq, 31).mean;
  CHECK(cost == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("hedging: a constant claim with no trading costs nothing") {
  // A put struck far below any reachable spot pays a constant 0 on every path, so the
  // pilot mean funds the book exactly and the quadratic error is identically zero.
  const PayoffSpec never_pays = PayoffSpec::vanilla_put(1e-12);
  const McEstimate e = hedging_cost_mc(0.2, never_pays, 0.0, ControlPolicy::constant(0.0),
                                       0.25, 1.0, 1.0 / 128.0, 256, 32, 256);
  CHECK(e.mean == 0.0);
  CHECK(e.stderr_ == 0.0);
}

TEST_CASE("hedging: tracking the Black-Scholes delta faster only helps") {
  const PayoffSpec call = PayoffSpec::vanilla_call(1.0);
  std::vector<double> costs;
  std::vector<double> errs;
  for (double kappa : {0.0, 4.0, 8.0}) {
    const auto policy = ControlPolicy::feedback([kappa](double t, const Vec& x, const CoeffState&) {
      const double target = black_scholes_delta(x(0), 1.0, 0.2, 0.25 - t);
      return kappa * (target - x(1));
    });
    const McEstimate e =
        hedging_cost_mc(0.2, call, 0.0, policy, 0.25, 1.0, 1.0 / 128.0, 2000, 33, 2000);
    costs.push_back(e.mean);
    errs.push_back(e.stderr_);
  }
  CHECK(costs[1] <= costs[0] + 3.0 * std::sqrt(errs[0] * errs[0] + errs[1] * errs[1]));
  CHECK(costs[2] <= costs[1] + 3.0 * std::sqrt(errs[1] * errs[1] + errs[2] * errs[2]));
  // Tracking at kappa = 8 should beat not hedging at all by a wide, significant margin.
  CHECK(costs[2] < costs[0] - 3.0 * errs[0]);
}

TEST_CASE("friction is charged: positive eta raises the cost of an active policy") {
  const PayoffSpec call = PayoffSpec::vanilla_call(1.0);
  const auto policy = ControlPolicy::feedback([](double t, const Vec& x, const CoeffState&) {
    const double target = black_scholes_delta(x(0), 1.0, 0.2, 0.25 - t);
    return 6.0 * (target - x(1));
  });
  const double free_cost =
      hedging_cost_mc(0.2, call, 0.0, policy, 0.25, 1.0, 1.0 / 128.0, 500, 34, 500).mean;
  const double charged =
      hedging_cost_mc(0.2, call, 0.05, policy, 0.25, 1.0, 1.0 / 128.0, 500, 34, 500).mean;
  CHECK(charged > free_cost);
}
