// Euler simulation of the occupied SDE: clock exactness, exit detection, quadratic
// variation clocks, batch determinism across worker counts, coupled drivers, and the
// admissibility guard rails.
#include <cmath>
#include <memory>

#include "doctest.h"
#include "occ/osde.hpp"

using namespace occ;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

OsdeModel brownian(double horizon) {
  OsdeModel m;
  m.dim = 1;
  m.horizon = horizon;
  m.c_star = 1.0;
  m.clock = ClockKind::kStandard;
  return m;
}

SimInit start_at(double x) { return SimInit{OccupationMeasure::empty(1), v1(x)}; }

}  // namespace

TEST_CASE("standard clock with a dyadic budget exits exactly at the budget") {
  const SimPath path = simulate(brownian(0.5), ControlPolicy::constant(0.0), start_at(0.0),
                                1.0 / 64.0, 11, 0);
  CHECK(path.tau == 0.5);
  CHECK(path.steps() == 32);
  CHECK(path.clock(path.steps()) == 0.5);
  CHECK(path.times(path.steps()) == path.tau);
  // Deposited weights are exactly the clock increments (the last one is the exact
  // remaining budget, which here coincides with a full step).
  for (std::int64_t n = 0; n + 1 < path.steps(); ++n) {
    CHECK(path.weights(n) == path.lambdas(n) * path.dts(n));
    CHECK(path.clock(n + 1) == path.clock(n) + path.weights(n));
    CHECK(path.lambdas(n) == 1.0);
  }
  CHECK(path.weights(path.steps() - 1) == 0.5 - path.clock(path.steps() - 1));
  CHECK(path.exit_measure().mass() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("initial occupation mass advances the clock: remaining budget is T - |o0|") {
  SimInit init{OccupationMeasure::atom(v1(0.1), 0.3), v1(0.0)};
  const SimPath path = simulate(brownian(0.5), ControlPolicy::constant(0.0), init,
                                1.0 / 64.0, 12, 0);
  CHECK(path.clock(0) == 0.3);
  CHECK(path.tau == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(path.clock(path.steps()) == 0.5);
  // The exit measure keeps the initial atom and reaches total mass T.
  const OccupationMeasure ex = path.exit_measure();
  CHECK(ex.mass() == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(ex.weight(0) == 0.3);
}

TEST_CASE("a final fractional step lands the clock on the budget bitwise") {
  // dt = 1/3 of the budget plus a remainder forces a shrunk last step.
  const SimPath path = simulate(brownian(0.1), ControlPolicy::constant(0.0), start_at(0.0),
                                0.03, 13, 0);
  CHECK(path.clock(path.steps()) == 0.1);
  CHECK(path.dts(path.steps() - 1) < 0.03);
}

TEST_CASE("quadratic-variation clock deposits sigma^2 dt and still exits on budget") {
  OsdeModel m;
  m.dim = 1;
  m.horizon = 0.02;
  m.c_star = 100.0;
  m.clock = ClockKind::kQuadraticVariation;
  m.sigma_scalar = [](const CoeffState&, const Vec& x, double) {
    return 0.2 + 0.1 * std::sin(x(0));
  };
  const SimPath path = simulate(m, ControlPolicy::constant(0.0), start_at(0.3), 1.0 / 128.0, 14, 2);
  REQUIRE(path.steps() > 2);
  for (std::int64_t n = 0; n + 1 < path.steps(); ++n) {
    const double s = 0.2 + 0.1 * std::sin(path.states(0, n));
    CHECK(path.lambdas(n) == s * s);
    CHECK(path.weights(n) == path.lambdas(n) * path.dts(n));
    CHECK(path.clock(n + 1) == path.clock(n) + path.weights(n));
  }
  CHECK(path.clock(path.steps()) == 0.02);
  // Exit happens strictly before the elapsed-time horizon c* T.
  CHECK(path.tau <= m.c_star * m.horizon + 1e-12);
}

TEST_CASE("single-path simulation is reproducible and paths decorrelate") {
  const OsdeModel m = brownian(0.25);
  const SimPath a = simulate(m, ControlPolicy::constant(0.0), start_at(0.0), 1.0 / 64.0, 5, 3);
  const SimPath b = simulate(m, ControlPolicy::constant(0.0), start_at(0.0), 1.0 / 64.0, 5, 3);
  CHECK(a.states(0, a.steps()) == b.states(0, b.steps()));
  const SimPath c = simulate(m, ControlPolicy::constant(0.0), start_at(0.0), 1.0 / 64.0, 5, 4);
  CHECK(a.states(0, a.steps()) != c.states(0, c.steps()));
}

TEST_CASE("batches are bitwise identical for any worker count") {
  OsdeModel m = brownian(0.25);
  m.terminal_cost = [](const OccupationMeasure& o, const Vec& x) {
    return x(0) * x(0) + o.mass();
  };
  BatchOptions opts;
  opts.dt = 1.0 / 64.0;
  opts.n_paths = 64;
  opts.seed = 2024;
  opts.threads = 1;
  const BatchResult one = batch(m, ControlPolicy::constant(0.0), start_at(0.2), opts);
  opts.threads = 3;
  const BatchResult three = batch(m, ControlPolicy::constant(0.0), start_at(0.2), opts);
  REQUIRE(one.summaries.size() == three.summaries.size());
  for (std::size_t i = 0; i < one.summaries.size(); ++i) {
    CHECK(one.summaries[i].path_index == three.summaries[i].path_index);
    CHECK(one.summaries[i].total_cost == three.summaries[i].total_cost);
    CHECK(one.summaries[i].tau == three.summaries[i].tau);
  }
  CHECK(one.cost.mean == three.cost.mean);
  CHECK(one.cost.stderr_ == three.cost.stderr_);
}

TEST_CASE("distinct RNG phases give distinct ensembles") {
  OsdeModel m = brownian(0.25);
  m.terminal_cost = [](const OccupationMeasure&, const Vec& x) { return x(0); };
  BatchOptions opts;
  opts.dt = 1.0 / 64.0;
  opts.n_paths = 16;
  opts.seed = 7;
  const double mean0 = batch(m, ControlPolicy::constant(0.0), start_at(0.0), opts).cost.mean;
  opts.phase = 1;
  const double mean1 = batch(m, ControlPolicy::constant(0.0), start_at(0.0), opts).cost.mean;
  CHECK(mean0 != mean1);
}

TEST_CASE("coupled paths share the Brownian driver and the control stream") {
  const OsdeModel m = brownian(0.25);
  const auto [p, q] = simulate_coupled(m, m, ControlPolicy::constant(0.0), start_at(0.0),
                                       start_at(0.5), 1.0 / 64.0, 21, 0);
  REQUIRE(p.dw.cols() == q.dw.cols());
  CHECK((p.dw - q.dw).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.controls - q.controls).cwiseAbs().maxCoeff() == 0.0);
  // Same clock rate on both: identical exit times.
  CHECK(p.tau == q.tau);
  CHECK(p.exit_interpolated);
}

TEST_CASE("policies: constant, feedback and right-open piecewise schedules") {
  const CoeffState cs;
  CHECK(ControlPolicy::constant(0.7).at(0.0, v1(1.0), cs) == 0.7);
  const auto fb = ControlPolicy::feedback(
      [](double t, const Vec& x, const CoeffState& c) { return t + x(0) + c.mass; });
  CHECK(fb.at(0.5, v1(2.0), cs) == 2.5);
  const auto pw = ControlPolicy::piecewise_constant({0.0, 0.5}, {1.0, 2.0});
  CHECK(pw.at(0.49, v1(0.0), cs) == 1.0);
  CHECK(pw.at(0.5, v1(0.0), cs) == 2.0);
  CHECK(pw.at(9.0, v1(0.0), cs) == 2.0);
}

TEST_CASE("a control outside the admissible hull aborts the path") {
  OsdeModel m = brownian(0.25);
  m.control_lo = -0.5;
  m.control_hi = 0.5;
  CHECK_THROWS_AS(
      (void)simulate(m, ControlPolicy::constant(2.0), start_at(0.0), 1.0 / 64.0, 1, 0),
      SimulationError);
}

TEST_CASE("a clock rate below the ellipticity floor aborts the path") {
  OsdeModel m;
  m.dim = 1;
  m.horizon = 0.01;
  m.c_star = 1.0;  // requires lambda >= 1
  m.clock = ClockKind::kQuadraticVariation;
  m.sigma_scalar = [](const CoeffState&, const Vec&, double) { return 0.01; };
  CHECK_THROWS_AS(
      (void)simulate(m, ControlPolicy::constant(0.0), start_at(0.0), 1.0 / 64.0, 1, 0),
      SimulationError);
}

TEST_CASE("initial mass at or above the budget is rejected by the simulator") {
  SimInit init{OccupationMeasure::atom(v1(0.0), 0.5), v1(1.0)};
  CHECK_THROWS_AS(
      (void)simulate(brownian(0.5), ControlPolicy::constant(0.0), init, 1.0 / 64.0, 3, 0),
      PreconditionError);
}

TEST_CASE("coefficients see the declared cylindrical coordinates") {
  auto fam = std::make_shared<SeparatingFamily>(1, 8);
  OsdeModel m = brownian(0.25);
  m.family = fam;
  m.cyl_indices = {1, 3};
  const OccupationMeasure o = OccupationMeasure::atom(v1(0.4), 0.2);
  const CoeffState cs = m.coeff_state(o);
  CHECK(cs.mass == doctest::Approx(0.2).epsilon(1e-15));
  REQUIRE(cs.cyl.size() == 2);
  CHECK(cs.cyl(0) == doctest::Approx(fam->pair(o, 1)).epsilon(1e-15));
  CHECK(cs.cyl(1) == doctest::Approx(fam->pair(o, 3)).epsilon(1e-15));
}
