// End-to-end pricing scenarios on occupied processes, each paired with an independent
// oracle: occupation-time value in closed form, timer (variance-budget) options priced by
// exit-time Monte Carlo, uncertain-volatility bounds (PDE and policy-search), and
// quadratic hedging with transaction costs.
#ifndef OCC_PRICING_HPP
#define OCC_PRICING_HPP

#include <functional>
#include <memory>
#include <string>

#include "occ/control.hpp"
#include "occ/osde.hpp"
#include "occ/pde.hpp"

namespace occ {

// Terminal payoff g(O_tau, X_tau) evaluated on the exit state of an occupied process.
class PayoffSpec {
 public:
  enum class Kind { kOccupationTime, kCylTerminal, kAsianPut, kVanillaCall, kVanillaPut, kCustom };

  // g = O(B(0, radius)), the occupation mass of the centered ball.
  static PayoffSpec occupation_time(double radius);
  // g = psi(O(phi)).
  static PayoffSpec cyl_terminal(std::function<double(double)> phi_scalar,
                                 std::function<double(double)> psi);
  // g = (strike - O(id)/|O|)^+, the fixed-strike put on the occupation average (d = 1).
  static PayoffSpec asian_put(double strike);
  // g = (x_0 - strike)^+ / (strike - x_0)^+ on the first state coordinate as the price.
  static PayoffSpec vanilla_call(double strike);
  static PayoffSpec vanilla_put(double strike);
  static PayoffSpec custom(std::function<double(const OccupationMeasure&, const Vec&)> g);

  double evaluate(const OccupationMeasure& o, const Vec& x) const;
  // Price-space evaluation for the vanilla kinds ((s-K)^+ / (K-s)^+).
  double on_price(double s) const;

  Kind kind() const { return kind_; }
  double strike() const { return strike_; }
  double radius() const { return radius_; }

 private:
  Kind kind_ = Kind::kCustom;
  double strike_ = 0.0;
  double radius_ = 0.0;
  std::function<double(double)> phi_;
  std::function<double(double)> psi_;
  std::function<double(const OccupationMeasure&, const Vec&)> custom_;
};

// Zero-rate Black-Scholes value and delta (shared oracle for the pricing scenarios).
double black_scholes(double spot, double strike, double vol, double maturity, bool call);
double black_scholes_delta(double spot, double strike, double vol, double remaining);

// Closed-form value of the occupation-time claim for d = 1 Brownian motion:
//   v = o_B + integral_0^remaining [ Phi((r - x)/sqrt(s)) - Phi((-r - x)/sqrt(s)) ] ds,
// the ball-occupancy already collected plus the expected future occupancy. Adaptive
// Simpson quadrature to tolerance 1e-8.
double heat_value_closed_form(double o_b, const Vec& x, double remaining, double radius);

// Timer claim: the budget is realized variance. Simulates the log-price
//   dX = -sigma^2/2 dt + sigma dW   under the quadratic-variation clock (lambda = sigma^2)
// and evaluates the payoff at the exit time |O| = budget. Vanilla payoffs read the spot
// as exp(X_tau) and admit an exact oracle: X_tau ~ Normal(x0 - budget/2, budget) for any
// admissible sigma (time-change argument), i.e. the Black-Scholes price with total
// variance = budget. c_star certifies admissibility: sigma^2 >= 1/c_star must hold
// everywhere; a path that cannot reach the budget within the 10 c_star T hard cap aborts
// with its path index rather than biasing the estimate.
McEstimate price_timer_mc(const std::function<double(const CoeffState&, const Vec&)>& sigma,
                          const PayoffSpec& payoff, double budget, double x0, double dt,
                          std::int64_t n_paths, std::uint64_t seed, double c_star,
                          int threads = 1);

enum class UvmMethod { kPde, kMcBound };

struct UvmParams {
  double maturity = 0.25;
  double spot = 1.0;
  Grid2D grid;                 // PDE method
  BsbSense sense = BsbSense::kSeller;
  double dt = 1.0 / 1024.0;    // MC bound method
  std::int64_t n_paths = 1000;
  std::uint64_t seed = 1;
  int n_controls = 2;          // constant-volatility policies spanning the band
  int threads = 1;
};

struct UvmReport {
  std::string method;
  double price = 0.0;          // PDE value at spot / best policy mean
  McEstimate mc;               // MC bound only
  double best_control = 0.0;   // MC bound only
  std::string caveat;          // bound direction, stated explicitly
  PdeSolution2D solution;      // PDE only
};

// Uncertain-volatility price bounds for a payoff on the spot. The PDE method solves the
// band equation on the supplied grid (the x_max margin of exp(4 a_high sqrt(T)) over the
// strike-scale reference is enforced against params.spot); the MC method maximizes (or
// minimizes, for the buyer) over constant-volatility policies and is therefore a bound
// in the direction stated in the caveat.
UvmReport price_uvm(const PayoffSpec& payoff, double a_low, double a_high, UvmMethod method,
                    const UvmParams& params);

// Quadratic hedging with proportional transaction costs. State (S, Delta, Y):
//   dS = sigma_bs S dW,  dDelta = alpha dt,  dY = Delta dS,  Y_0 = E[xi] (pilot run on a
// separate random substream), and cost = E[(xi - Y_T)^2 + eta integral |alpha| S dt].
// The trading policy emits the speed alpha from (t, (S, Delta, Y)).
McEstimate hedging_cost_mc(double sigma_bs, const PayoffSpec& option, double eta,
                           const ControlPolicy& trading_policy, double maturity, double spot,
                           double dt, std::int64_t n_paths, std::uint64_t seed,
                           std::int64_t pilot_paths = 0, int threads = 1);

}  // namespace occ

#endif  // OCC_PRICING_HPP
