// Particle measures, the trigonometric separating family, cylindrical/parabolic norms,
// finite-dimensional projections and the coercivity jet.
#include <cmath>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "occ/measure.hpp"

using namespace occ;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

OccupationMeasure three_atoms() {
  OccupationMeasure o = OccupationMeasure::atom(v1(0.2), 0.5);
  o.append(v1(-1.3), 0.25);
  o.append(v1(0.9), 0.1);
  return o;
}

}  // namespace

TEST_CASE("particle measure bookkeeping: mass, pairing, balls, moments, marginals") {
  OccupationMeasure o = three_atoms();
  CHECK(o.size() == 3);
  CHECK(o.mass() == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(o.pair([](Eigen::Map<const Vec> x) { return x(0) * x(0); }) ==
        doctest::Approx(0.5 * 0.04 + 0.25 * 1.69 + 0.1 * 0.81).epsilon(1e-15));
  CHECK(o.ball_mass(v1(0.0), 1.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(o.coordinate_moment(0) ==
        doctest::Approx(0.5 * 0.2 - 0.25 * 1.3 + 0.1 * 0.9).epsilon(1e-14));

  Vec x2(2);
  x2 << 1.0, -2.0;
  OccupationMeasure m2 = OccupationMeasure::atom(x2, 0.7);
  const OccupationMeasure first = m2.marginal({0});
  CHECK(first.dim() == 1);
  CHECK(first.position(0)(0) == 1.0);
  CHECK(first.weight(0) == 0.7);

  CHECK_THROWS_AS(o.append(x2, 0.1), PreconditionError);   // dimension mismatch
  CHECK_THROWS_AS(o.append(v1(0.0), -0.1), PreconditionError);  // negative weight
  CHECK_THROWS_AS(OccupationMeasure(0), PreconditionError);
}

TEST_CASE("compacted merges bitwise-identical positions only") {
  OccupationMeasure o = OccupationMeasure::atom(v1(0.3), 0.25);
  o.append(v1(0.3), 0.5);
  o.append(v1(0.30000000001), 0.1);
  const OccupationMeasure c = o.compacted();
  CHECK(c.size() == 2);
  CHECK(c.mass() == doctest::Approx(0.85).epsilon(1e-15));
}

TEST_CASE("separating family: closed-form norms and the summability budget") {
  SeparatingFamily fam(1, 64);
  CHECK(fam.c0() == 0.25);
  CHECK(fam.sup_norm(0) == 0.25);
  CHECK(fam.c1_norm(0) == 0.25);
  // Oscillator j has C1 norm exactly 2^-(j+2); members 1,2 belong to j = 1.
  CHECK(fam.c1_norm(1) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(fam.c1_norm(2) == doctest::Approx(0.125).epsilon(1e-15));
  double sum_c1_sq = fam.c1_norm(0) * fam.c1_norm(0);
  for (int k = 1; k <= fam.k_max(); ++k) sum_c1_sq += fam.c1_norm(k) * fam.c1_norm(k);
  CHECK(sum_c1_sq <= 1.0);
  // The tail bound is positive even past the last stored member (infinite family).
  CHECK(fam.tail_sup_sq(fam.k_max()) > 0.0);
  for (int k : {0, 1, 8, 32}) CHECK(fam.tail_sup_sq(k) >= fam.tail_sup_sq(k + 1));
}

TEST_CASE("family values and gradients agree with finite differences") {
  SeparatingFamily fam(2, 32);
  Vec x(2);
  x << 0.4, -0.7;
  const double h = 1e-6;
  for (int k : {0, 1, 2, 7, 15, 32}) {
    const Vec g = fam.gradient(k, x);
    for (int c = 0; c < 2; ++c) {
      Vec xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      const double fd = (fam.value(k, xp) - fam.value(k, xm)) / (2 * h);
      CHECK(g(c) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(std::abs(fam.value(k, x)) <= fam.sup_norm(k) + 1e-15);
  }
}

TEST_CASE("pairing against the family is the exact particle sum") {
  SeparatingFamily fam(1, 16);
  const OccupationMeasure o = three_atoms();
  for (int k : {0, 3, 9}) {
    double manual = 0.0;
    for (std::int64_t i = 0; i < o.size(); ++i)
      manual += o.weight(i) * fam.value(k, o.position(i));
    CHECK(fam.pair(o, k) == doctest::Approx(manual).epsilon(1e-14));
  }
}

TEST_CASE("cylindrical and parabolic norms: explicit sums and tail bounds") {
  auto fam = std::make_shared<SeparatingFamily>(1, 32);
  const OccupationMeasure op = three_atoms();
  const OccupationMeasure om = OccupationMeasure::atom(v1(-0.4), 0.3);
  const int K = 12;
  const CylNormResult r = cyl_norm(op, om, *fam, K);
  double explicit_sq = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double d = fam->pair(op, k) - fam->pair(om, k);
    explicit_sq += d * d;
  }
  CHECK(r.value == doctest::Approx(std::sqrt(explicit_sq)).epsilon(1e-14));
  CHECK(r.tail_bound ==
        doctest::Approx(std::sqrt(fam->tail_sup_sq(K)) * (op.mass() + om.mass()))
            .epsilon(1e-14));

  Vec dx(1);
  dx << 3.0;
  CHECK(parabolic_norm(op, om, dx, *fam, K) ==
        doctest::Approx(std::sqrt(explicit_sq + 9.0)).epsilon(1e-14));
}

TEST_CASE("projection drops the constant member and matches pairings") {
  SeparatingFamily fam(1, 16);
  const OccupationMeasure o = three_atoms();
  const Vec p = project(o, fam, 5);
  CHECK(p.size() == 5);
  for (int k = 1; k <= 5; ++k) CHECK(p(k - 1) == doctest::Approx(fam.pair(o, k)).epsilon(1e-15));
}

TEST_CASE("projection gap: explicit sum, monotonicity, zero at k_max, closed-form bound") {
  SeparatingFamily fam(1, 24);
  const OccupationMeasure o = three_atoms();
  const OccupationMeasure op = OccupationMeasure::atom(v1(0.6), 0.55);
  double prev = -1.0;
  for (int K : {0, 2, 6, 12, 24}) {
    const double gap = projection_gap(o, op, fam, K);
    double explicit_sum = 0.0;
    for (int k = K + 1; k <= fam.k_max(); ++k) {
      const double d = fam.pair(o, k) - fam.pair(op, k);
      explicit_sum += d * d;
    }
    CHECK(gap == doctest::Approx(explicit_sum).epsilon(1e-12));
    CHECK(gap >= 0.0);
    if (prev >= 0.0) CHECK(gap <= prev + 1e-15);
    prev = gap;
    CHECK(gap <= projection_gap_bound(fam, K, o.mass() + op.mass()) + 1e-15);
  }
  CHECK(projection_gap(o, op, fam, fam.k_max()) == 0.0);
}

TEST_CASE("coercivity jet has the advertised closed form") {
  const OccupationMeasure o = three_atoms();
  Vec x(1);
  x << 0.8;
  const ThetaJet jet = theta_coercive(o, x);
  const auto q = [](double t) { return std::sqrt(1.0 + t * t); };
  const double oq = 0.5 * q(0.2) + 0.25 * q(-1.3) + 0.1 * q(0.9);
  CHECK(jet.value == doctest::Approx(oq + q(0.8)).epsilon(1e-14));
  CHECK(jet.d_occ == doctest::Approx(q(0.8)).epsilon(1e-15));
  CHECK(jet.grad(0) == doctest::Approx(0.8 / q(0.8)).epsilon(1e-15));
  const double qx = q(0.8);
  CHECK(jet.hess(0, 0) ==
        doctest::Approx((1.0 - 0.64 / (qx * qx)) / qx).epsilon(1e-14));
}

TEST_CASE("measure CSV round-trips bitwise") {
  Vec x2(2);
  x2 << 0.1, -0.333333333333333314829616256247;
  OccupationMeasure o(2);
  o.append(x2, 0.25);
  x2 << 1e-17, 3.0;
  o.append(x2, 1.0 / 3.0);
  std::stringstream ss;
  write_measure_csv(ss, o);
  const OccupationMeasure back = read_measure_csv(ss);
  REQUIRE(back.size() == o.size());
  REQUIRE(back.dim() == o.dim());
  for (std::int64_t i = 0; i < o.size(); ++i) {
    CHECK(back.weight(i) == o.weight(i));
    for (int c = 0; c < o.dim(); ++c) CHECK(back.position(i)(c) == o.position(i)(c));
  }
}
