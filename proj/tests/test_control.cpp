// Cost estimation, policy sweeps under common random numbers, the Hamiltonian, and the
// quantitative stability diagnostics at small ensemble sizes.
#include <cmath>
#include <memory>

#include "doctest.h"
#include "occ/control.hpp"

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

}  // namespace

TEST_CASE("on the boundary |o| = T the cost is the terminal cost, no simulation") {
  OsdeModel m = brownian(0.5);
  m.terminal_cost = [](const OccupationMeasure& o, const Vec& x) { return o.mass() + x(0); };
  SimInit init{OccupationMeasure::atom(v1(0.0), 0.5), v1(1.0)};
  const McEstimate e = estimate_cost(m, ControlPolicy::constant(0.0), init, 1.0 / 64.0, 100, 9);
  CHECK(e.mean == 1.5);
  CHECK(e.stderr_ == 0.0);
  CHECK(e.n_paths == 0);

  SimInit over{OccupationMeasure::atom(v1(0.0), 0.6), v1(1.0)};
  CHECK_THROWS_AS(
      (void)estimate_cost(m, ControlPolicy::constant(0.0), over, 1.0 / 64.0, 100, 9),
      PreconditionError);
}

TEST_CASE("hamiltonian evaluates the exact finite-grid infimum") {
  OsdeModel m = brownian(1.0);
  m.control_grid = {-1.0, 1.0};
  m.drift = [](const CoeffState&, const Vec&, double a) { return Vec::Constant(1, a); };
  m.sigma_scalar = [](const CoeffState&, const Vec&, double) { return 1.0; };
  m.running_cost = [](const CoeffState&, const Vec&, double a) { return a * a; };

  ParabolicPoint p{OccupationMeasure::empty(1), v1(0.0)};
  JetPoint jet;
  jet.theta = 2.0;
  jet.delta = v1(3.0);
  jet.gamma = Mat::Constant(1, 1, 4.0);
  // inner(a) = lambda*theta + a*delta + sigma^2 Gamma/2 + a^2 = a^2 + 3a + 4; min at a=-1 is 2.
  CHECK(hamiltonian(m, p, jet) == -2.0);

  // Degenerate ellipticity: a larger Gamma can only lower the Hamiltonian.
  JetPoint smaller = jet;
  smaller.gamma = Mat::Constant(1, 1, 2.0);
  CHECK(hamiltonian(m, p, jet) < hamiltonian(m, p, smaller));

  JetPoint bad = jet;
  bad.delta = Vec::Zero(2);
  CHECK_THROWS_AS((void)hamiltonian(m, p, bad), PreconditionError);
}

TEST_CASE("policy sweeps use common random numbers and pick the right extremum") {
  OsdeModel m = brownian(0.25);
  m.control_lo = -1.0;
  m.control_hi = 1.0;
  m.drift = [](const CoeffState&, const Vec&, double a) { return Vec::Constant(1, a); };
  m.terminal_cost = [](const OccupationMeasure&, const Vec& x) { return x(0); };
  const SimInit init{OccupationMeasure::empty(1), v1(0.0)};
  const std::vector<ControlPolicy> policies{ControlPolicy::constant(-1.0),
                                            ControlPolicy::constant(1.0)};
  const PolicySweep sweep =
      value_over_policies(m, policies, init, 1.0 / 64.0, 64, 321, Sense::kMin);
  REQUIRE(sweep.estimates.size() == 2);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const McEstimate direct = estimate_cost(m, policies[i], init, 1.0 / 64.0, 64, 321);
    CHECK(sweep.estimates[i].mean == direct.mean);
    CHECK(sweep.estimates[i].stderr_ == direct.stderr_);
  }
  CHECK(sweep.best_index == 0);  // drift -1 minimizes E[X_tau]
  const PolicySweep max_sweep =
      value_over_policies(m, policies, init, 1.0 / 64.0, 64, 321, Sense::kMax);
  CHECK(max_sweep.best_index == 1);
}

TEST_CASE("state stability bound holds on a coupled ensemble with its exact constants") {
  auto fam = std::make_shared<SeparatingFamily>(1, 64);
  OsdeModel m = brownian(0.25);
  m.c_star = 2.0;
  m.family = fam;
  m.cyl_indices = {1};
  m.drift = [](const CoeffState& cs, const Vec&, double) {
    return Vec::Constant(1, -0.25 * std::tanh(cs.cyl(0)));
  };
  SimInit a{OccupationMeasure::atom(v1(0.2), 0.05), v1(0.3)};
  SimInit b{OccupationMeasure::atom(v1(0.2), 0.05), v1(0.4)};
  const GronwallReport rep =
      gronwall_diagnostic(m, ControlPolicy::constant(0.0), a, b, 1.0 / 256.0, 200, 77, 32);
  CHECK(rep.t_star == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.c_const == doctest::Approx(58.5).epsilon(1e-12));
  CHECK(rep.c1_const == doctest::Approx(3.0 * std::exp(29.25)).epsilon(1e-12));
  CHECK(rep.rho0 > 0.0);
  CHECK(rep.pass);
  CHECK(rep.lhs.mean + 3.0 * rep.lhs.stderr_ <= rep.rhs);
}

TEST_CASE("exit-time stability: pathwise and L2 bounds on a coupled ensemble") {
  OsdeModel m;
  m.dim = 1;
  m.horizon = 0.1;
  m.c_star = 4.0;
  m.clock = ClockKind::kQuadraticVariation;
  m.sigma_scalar = [](const CoeffState&, const Vec& x, double) {
    return 0.75 + 0.25 * std::sin(x(0));
  };
  SimInit a{OccupationMeasure::empty(1), v1(0.2)};
  SimInit b{OccupationMeasure::empty(1), v1(0.45)};
  const ExitTimeReport rep =
      exit_time_diagnostic(m, ControlPolicy::constant(0.0), a, b, 1.0 / 512.0, 300, 78, 32);
  CHECK(rep.pathwise_pass);
  CHECK(rep.max_pathwise_slack <= 0.0);
  CHECK(rep.l2_pass);
  CHECK(rep.l2_diff <= rep.rhs);
  CHECK(rep.rho0 > 0.0);
}

TEST_CASE("cost continuity probe fits a slope once two usable gaps exist") {
  OsdeModel m = brownian(0.25);
  m.terminal_cost = [](const OccupationMeasure&, const Vec& x) { return x(0) * x(0); };
  const SimInit base{OccupationMeasure::empty(1), v1(0.0)};
  const std::vector<SimInit> perturbed{{OccupationMeasure::empty(1), v1(0.25)},
                                       {OccupationMeasure::empty(1), v1(0.5)}};
  const HolderReport rep =
      holder_probe(m, {ControlPolicy::constant(0.0)}, base, perturbed, 1.0 / 128.0, 200, 79,
                   Sense::kMin);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].rho > 0.0);
  CHECK(rep.rows[1].rho > rep.rows[0].rho);
  CHECK(rep.slope_fitted);
}

TEST_CASE("two-point trace inequality holds for every sampled admissible jet pair") {
  const auto pairs = sample_admissible_gamma_pairs(1, 0.5, 25, 99);
  CHECK(pairs.size() == 25);
  OsdeModel m = brownian(0.25);
  m.control_grid = {0.1, 0.2, 0.3};
  m.sigma_scalar = [](const CoeffState&, const Vec& x, double a) { return a * x(0); };
  const ParabolicPoint p{OccupationMeasure::atom(v1(0.4), 0.12), v1(1.0)};
  const ParabolicPoint q{OccupationMeasure::atom(v1(-0.3), 0.2), v1(1.3)};
  const CilReport rep = cil_trace_check(m, p, q, 0.5, pairs);
  CHECK(rep.n_supplied == 25);
  CHECK(rep.n_admissible == 25);
  CHECK(rep.n_rejected == 0);
  CHECK(rep.all_pass);
  CHECK(rep.max_violation <= 0.0);
  CHECK(rep.rho > 0.0);
}

TEST_CASE("the admissibility sampler also works in higher dimension") {
  const auto pairs = sample_admissible_gamma_pairs(2, 0.75, 10, 5);
  CHECK(pairs.size() == 10);
  for (const auto& [g, gp] : pairs) {
    CHECK(g.rows() == 2);
    CHECK(gp.rows() == 2);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((gp - gp.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
