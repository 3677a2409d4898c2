#include "occ/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>

#include "occ/calculus.hpp"
#include "occ/control.hpp"
#include "occ/pricing.hpp"
#include "occ/verify.hpp"

namespace occ {
namespace {

// ---- Strict parameter access -----------------------------------------------------------

[[noreturn]] void fail(const std::string& msg) { throw PreconditionError("config: " + msg); }

void require_keys(const Json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) fail(where + ": unknown key '" + item.key() + "'");
  }
}

double get_num(const Json& p, const std::string& key, double fallback,
               bool require_positive = true) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number()) fail("'" + key + "' must be a number");
  const double v = p.at(key).get<double>();
  if (require_positive && !(v > 0.0)) fail("'" + key + "' must be positive");
  return v;
}

std::int64_t get_int(const Json& p, const std::string& key, std::int64_t fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number_integer()) fail("'" + key + "' must be an integer");
  const std::int64_t v = p.at(key).get<std::int64_t>();
  if (v <= 0) fail("'" + key + "' must be positive");
  return v;
}

std::string get_str(const Json& p, const std::string& key, const std::string& fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_string()) fail("'" + key + "' must be a string");
  return p.at(key).get<std::string>();
}

// ---- Named coefficients (the model registry) -------------------------------------------

std::function<double(const CoeffState&, const Vec&)> sigma_by_name(const Json& spec) {
  require_keys(spec, {"name", "value", "base", "amp", "slope"}, "sigma");
  const std::string name = get_str(spec, "name", "");
  if (name == "const") {
    const double v = get_num(spec, "value", 0.2);
    return [v](const CoeffState&, const Vec&) { return v; };
  }
  if (name == "sin") {
    const double base = get_num(spec, "base", 0.2);
    const double amp = get_num(spec, "amp", 0.1);
    if (!(base - amp > 0.0)) fail("sigma 'sin': base - amp must stay positive");
    return [base, amp](const CoeffState&, const Vec& x) { return base + amp * std::sin(x(0)); };
  }
  if (name == "step") {
    const double base = get_num(spec, "base", 0.15);
    const double amp = get_num(spec, "amp", 0.1);
    return [base, amp](const CoeffState&, const Vec& x) { return x(0) > 0.0 ? base + amp : base; };
  }
  if (name == "affine") {
    const double slope = get_num(spec, "slope", 0.2);
    return [slope](const CoeffState&, const Vec& x) { return slope * x(0); };
  }
  fail("unknown sigma coefficient '" + name + "' (known: const, sin, step, affine)");
}

struct ModelSpec {
  OsdeModel model;
  SimInit init;
};

ModelSpec model_by_spec(const Json& spec) {
  require_keys(spec,
               {"dim", "horizon", "c_star", "clock", "x0", "o0", "drift", "sigma", "cyl_member"},
               "model");
  const int dim = static_cast<int>(get_int(spec, "dim", 1));
  ModelSpec ms{OsdeModel{}, SimInit{OccupationMeasure::empty(dim), Vec::Zero(dim)}};
  ms.model.dim = dim;
  ms.model.horizon = get_num(spec, "horizon", 1.0);
  ms.model.c_star = get_num(spec, "c_star", 1.0);
  const std::string clock = get_str(spec, "clock", "standard");
  if (clock == "standard") {
    ms.model.clock = ClockKind::kStandard;
  } else if (clock == "quadratic-variation") {
    ms.model.clock = ClockKind::kQuadraticVariation;
  } else {
    fail("unknown clock '" + clock + "' (known: standard, quadratic-variation)");
  }

  if (spec.contains("drift")) {
    const Json& d = spec.at("drift");
    require_keys(d, {"name", "value", "rate", "scale"}, "drift");
    const std::string name = get_str(d, "name", "zero");
    if (name == "zero") {
      // null drift
    } else if (name == "constant") {
      const double v = get_num(d, "value", 0.0, false);
      ms.model.drift = [v, dim](const CoeffState&, const Vec&, double) {
        return Vec::Constant(dim, v);
      };
    } else if (name == "linear") {
      const double rate = get_num(d, "rate", -1.0, false);
      ms.model.drift = [rate](const CoeffState&, const Vec& x, double) { return Vec(rate * x); };
    } else if (name == "tanh-cyl") {
      const double scale = get_num(d, "scale", 0.25);
      const int member = static_cast<int>(get_int(spec, "cyl_member", 1));
      ms.model.family = std::make_shared<SeparatingFamily>(dim);
      ms.model.cyl_indices = {member};
      ms.model.drift = [scale, dim](const CoeffState& cs, const Vec&, double) {
        return Vec::Constant(dim, -scale * std::tanh(cs.cyl(0)));
      };
    } else {
      fail("unknown drift coefficient '" + name +
           "' (known: zero, constant, linear, tanh-cyl)");
    }
  }

  if (spec.contains("sigma")) {
    const std::string name = get_str(spec.at("sigma"), "name", "unit");
    if (name != "unit") {
      if (dim != 1) fail("named sigma coefficients require dim = 1");
      auto s = sigma_by_name(spec.at("sigma"));
      ms.model.sigma_scalar = [s](const CoeffState& cs, const Vec& x, double) { return s(cs, x); };
    }
  }

  ms.init.x = Vec::Zero(dim);
  if (spec.contains("x0")) {
    const Json& x0 = spec.at("x0");
    if (!x0.is_array() || static_cast<int>(x0.size()) != dim) fail("'x0' must be an array of dim numbers");
    for (int i = 0; i < dim; ++i) ms.init.x(i) = x0.at(i).get<double>();
  }
  ms.init.measure = OccupationMeasure::empty(dim);
  if (spec.contains("o0")) {
    const Json& o0 = spec.at("o0");
    if (!o0.is_array()) fail("'o0' must be an array of [weight, x...] atoms");
    for (const Json& atom : o0) {
      if (!atom.is_array() || static_cast<int>(atom.size()) != dim + 1) {
        fail("each 'o0' atom must be [weight, x...] with dim coordinates");
      }
      Vec x(dim);
      for (int i = 0; i < dim; ++i) x(i) = atom.at(i + 1).get<double>();
      const double w = atom.at(0).get<double>();
      if (!(w >= 0.0)) fail("'o0' weights must be nonnegative");
      ms.init.measure.append(x, w);
    }
  }
  if (!(ms.init.measure.mass() < ms.model.horizon)) {
    fail("initial occupation mass must stay strictly below the horizon");
  }
  return ms;
}

PayoffSpec payoff_by_spec(const Json& spec) {
  require_keys(spec, {"kind", "strike", "strikes", "radius"}, "payoff");
  const std::string kind = get_str(spec, "kind", "");
  if (kind == "call") return PayoffSpec::vanilla_call(get_num(spec, "strike", 1.0));
  if (kind == "put") return PayoffSpec::vanilla_put(get_num(spec, "strike", 1.0));
  if (kind == "occupation-time") return PayoffSpec::occupation_time(get_num(spec, "radius", 1.0));
  if (kind == "asian-put") return PayoffSpec::asian_put(get_num(spec, "strike", 1.0));
  if (kind == "butterfly") {
    if (!spec.contains("strikes") || !spec.at("strikes").is_array() ||
        spec.at("strikes").size() != 3) {
      fail("butterfly payoff needs 'strikes': [low, mid, high]");
    }
    const double k1 = spec.at("strikes").at(0).get<double>();
    const double k2 = spec.at("strikes").at(1).get<double>();
    const double k3 = spec.at("strikes").at(2).get<double>();
    if (!(0.0 < k1 && k1 < k2 && k2 < k3)) fail("butterfly strikes must be increasing and positive");
    return PayoffSpec::custom([k1, k2, k3](const OccupationMeasure&, const Vec& x) {
      const double s = x(0);
      return std::max(s - k1, 0.0) - 2.0 * std::max(s - k2, 0.0) + std::max(s - k3, 0.0);
    });
  }
  fail("unknown payoff kind '" + kind +
       "' (known: call, put, occupation-time, asian-put, butterfly)");
}

ControlPolicy hedging_policy_by_spec(const Json& spec, double strike, double sigma_bs,
                                     double maturity) {
  require_keys(spec, {"name", "kappa"}, "policy");
  const std::string name = get_str(spec, "name", "zero");
  if (name == "zero") return ControlPolicy::constant(0.0);
  if (name == "delta-tracking") {
    const double kappa = get_num(spec, "kappa", 8.0);
    return ControlPolicy::feedback([kappa, strike, sigma_bs, maturity](double t, const Vec& x,
                                                                       const CoeffState&) {
      const double target = black_scholes_delta(x(0), strike, sigma_bs, maturity - t);
      return kappa * (target - x(1));
    });
  }
  fail("unknown trading policy '" + name + "' (known: zero, delta-tracking)");
}

// ---- Family parameter validation (parse time) -------------------------------------------

const std::set<std::string> kDiagNames = {
    "heat-oracle",   "timer-agreement",   "uvm-pde",  "ito-convergence",
    "derivative-orders", "exit-time",     "gronwall", "projection-tail",
    "cil-trace",     "determinism",       "holder-probe"};

std::vector<std::string> suite_from_params(const Json& params) {
  std::vector<std::string> names;
  if (!params.contains("suite") || (params.at("suite").is_string() &&
                                    params.at("suite").get<std::string>() == "all")) {
    return {"heat-oracle",       "timer-agreement", "uvm-pde",  "ito-convergence",
            "derivative-orders", "exit-time",       "gronwall", "projection-tail",
            "cil-trace",         "determinism",     "holder-probe"};
  }
  const Json& s = params.at("suite");
  if (s.is_string()) {
    if (!kDiagNames.count(s.get<std::string>())) fail("unknown diagnostic '" + s.get<std::string>() + "'");
    names.push_back(s.get<std::string>());
    return names;
  }
  if (!s.is_array() || s.empty()) fail("'suite' must be \"all\", a name, or a nonempty array");
  for (const Json& item : s) {
    if (!item.is_string() || !kDiagNames.count(item.get<std::string>())) {
      fail("unknown diagnostic in 'suite': " + item.dump());
    }
    names.push_back(item.get<std::string>());
  }
  return names;
}

void validate_family_params(const std::string& scenario, const std::string& job,
                            const Json& params) {
  if (job == "simulate") {
    require_keys(params, {"model", "n_paths", "dt", "sigma", "budget", "x0", "c_star",
                          "radius", "horizon", "o_ball", "a_low", "a_high", "maturity", "spot"},
                 "simulate params");
    if (params.contains("model")) (void)model_by_spec(params.at("model"));
    if (params.contains("sigma")) (void)sigma_by_name(params.at("sigma"));
    return;
  }
  if (scenario == "heat-occupation") {
    require_keys(params, {"n_paths", "dt", "radius", "horizon", "points"}, "heat params");
    if (params.contains("points")) {
      const Json& pts = params.at("points");
      if (!pts.is_array() || pts.empty()) fail("'points' must be a nonempty array of [o_ball, x]");
      const double horizon = get_num(params, "horizon", 1.0);
      for (const Json& pt : pts) {
        if (!pt.is_array() || pt.size() != 2) fail("each point must be [o_ball, x]");
        const double ob = pt.at(0).get<double>();
        if (!(ob >= 0.0 && ob < horizon)) fail("point o_ball must lie in [0, horizon)");
      }
    }
  } else if (scenario == "timer") {
    require_keys(params, {"n_paths", "dt", "budget", "x0", "strike", "c_star", "sigma"},
                 "timer params");
    if (params.contains("sigma")) (void)sigma_by_name(params.at("sigma"));
  } else if (scenario == "uvm-bsb") {
    require_keys(params, {"method", "a_low", "a_high", "payoff", "spot", "maturity", "grid",
                          "sense", "dt", "n_paths", "n_controls"},
                 "uvm params");
    const std::string method = get_str(params, "method", "pde");
    if (method != "pde" && method != "mc-bound") fail("'method' must be pde or mc-bound");
    const std::string sense = get_str(params, "sense", "seller");
    if (sense != "seller" && sense != "buyer") fail("'sense' must be seller or buyer");
    if (params.contains("payoff")) (void)payoff_by_spec(params.at("payoff"));
    if (params.contains("grid")) {
      require_keys(params.at("grid"), {"x_min", "x_max", "n_x", "n_t"}, "grid");
    }
    const double a_low = get_num(params, "a_low", 0.1);
    const double a_high = get_num(params, "a_high", 0.3);
    if (!(a_low <= a_high)) fail("'a_low' must not exceed 'a_high'");
  } else if (scenario == "hedging") {
    require_keys(params, {"n_paths", "pilot_paths", "dt", "sigma_bs", "strike", "spot",
                          "maturity", "eta", "policy"},
                 "hedging params");
    (void)get_num(params, "eta", 0.01, false);
    if (params.contains("policy")) {
      (void)hedging_policy_by_spec(params.at("policy"), get_num(params, "strike", 1.0),
                                   get_num(params, "sigma_bs", 0.3),
                                   get_num(params, "maturity", 0.25));
    }
  } else if (scenario == "diagnostics") {
    require_keys(params, {"suite", "scale", "n_paths", "dt"}, "diagnostics params");
    (void)suite_from_params(params);
    const std::string scale = get_str(params, "scale", "quick");
    if (scale != "quick" && scale != "acceptance") fail("'scale' must be quick or acceptance");
  }
}

// ---- Shared report plumbing -------------------------------------------------------------

Json estimate_json(const McEstimate& e) {
  Json j;
  j["mean"] = e.mean;
  j["stderr"] = e.stderr_;
  j["n_paths"] = e.n_paths;
  j["seed"] = e.seed;
  return j;
}

Json report_shell(const ScenarioConfig& cfg, const std::string& canonical) {
  Json j;
  j["meta"] = meta_json(canonical, cfg.seed);
  j["job"] = cfg.job;
  j["scenario"] = cfg.scenario;
  return j;
}

// ---- Family renderers --------------------------------------------------------------------

Rendered render_heat(const ScenarioConfig& cfg, const std::string& canonical) {
  const Json& p = cfg.params;
  const double radius = get_num(p, "radius", 1.0);
  const double horizon = get_num(p, "horizon", 1.0);
  const double dt = get_num(p, "dt", 1.0 / 512.0);
  const std::int64_t n_paths = get_int(p, "n_paths", 20000);
  std::vector<std::pair<double, double>> points = {{0.0, 0.0}};
  if (p.contains("points")) {
    points.clear();
    for (const Json& pt : p.at("points")) {
      points.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    }
  }
  OsdeModel model;
  model.dim = 1;
  model.horizon = horizon;
  model.c_star = 1.0;
  model.clock = ClockKind::kStandard;
  const PayoffSpec payoff = PayoffSpec::occupation_time(radius);
  model.terminal_cost = [&payoff](const OccupationMeasure& o, const Vec& x) {
    return payoff.evaluate(o, x);
  };

  Rendered out;
  Json rows = Json::array();
  CsvBuilder csv(canonical, cfg.seed);
  csv.header({"o_ball", "x", "mc_value", "mc_stderr", "oracle", "z"});
  std::uint64_t phase = 0;
  for (const auto& [ob, x0] : points) {
    const SimInit init{ob > 0.0 ? OccupationMeasure::atom(Vec::Zero(1), ob)
                                : OccupationMeasure::empty(1),
                       Vec::Constant(1, x0)};
    BatchOptions opts;
    opts.dt = dt;
    opts.n_paths = n_paths;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    opts.phase = ++phase;
    const McEstimate mc = batch(model, ControlPolicy::constant(0.0), init, opts).cost;
    const double oracle = heat_value_closed_form(ob, Vec::Constant(1, x0), horizon - ob, radius);
    const double z = std::abs(mc.mean - oracle) / mc.stderr_;
    Json row;
    row["o_ball"] = ob;
    row["x"] = x0;
    row["mc"] = estimate_json(mc);
    row["oracle"] = oracle;
    row["z"] = z;
    rows.push_back(row);
    csv.row({ob, x0, mc.mean, mc.stderr_, oracle, z});
    out.summary.push_back(("heat-occupation (o_B=" + format_double(ob) + ", x=" +
                               format_double(x0) + "): mc=" + format_double(mc.mean) +
                               " oracle=" + format_double(oracle)));
  }
  Json j = report_shell(cfg, canonical);
  j["radius"] = radius;
  j["horizon"] = horizon;
  j["dt"] = dt;
  j["n_paths"] = n_paths;
  j["points"] = rows;
  out.files["heat-occupation.json"] = j.dump(2) + "\n";
  out.files["heat-occupation.csv"] = csv.str();
  return out;
}

Rendered render_timer(const ScenarioConfig& cfg, const std::string& canonical) {
  const Json& p = cfg.params;
  const double budget = get_num(p, "budget", 0.04);
  const double x0 = get_num(p, "x0", 0.0, false);
  const double strike = get_num(p, "strike", 1.0);
  const double c_star = get_num(p, "c_star", 400.0);
  const double dt = get_num(p, "dt", 1.0 / 1024.0);
  const std::int64_t n_paths = get_int(p, "n_paths", 20000);
  const Json sigma_spec = p.contains("sigma") ? p.at("sigma")
                                              : Json{{"name", "const"}, {"value", 0.2}};
  const auto sigma = sigma_by_name(sigma_spec);
  const PayoffSpec payoff = PayoffSpec::vanilla_call(strike);
  const McEstimate mc =
      price_timer_mc(sigma, payoff, budget, x0, dt, n_paths, cfg.seed, c_star, cfg.threads);
  const double oracle = black_scholes(std::exp(x0), strike, std::sqrt(budget), 1.0, true);
  const double z = std::abs(mc.mean - oracle) / mc.stderr_;

  Rendered out;
  Json j = report_shell(cfg, canonical);
  j["budget"] = budget;
  j["x0"] = x0;
  j["strike"] = strike;
  j["sigma"] = sigma_spec;
  j["dt"] = dt;
  j["price"] = estimate_json(mc);
  j["oracle_total_variance_bs"] = oracle;
  j["z"] = z;
  out.files["timer.json"] = j.dump(2) + "\n";
  out.summary.push_back(("timer price=" + format_double(mc.mean) + " +- " +
                             format_double(mc.stderr_) + " oracle=" + format_double(oracle) +
                             " z=" + format_double(z)));
  return out;
}

Rendered render_uvm(const ScenarioConfig& cfg, const std::string& canonical) {
  const Json& p = cfg.params;
  const double a_low = get_num(p, "a_low", 0.1);
  const double a_high = get_num(p, "a_high", 0.3);
  const std::string method_s = get_str(p, "method", "pde");
  UvmParams params;
  params.maturity = get_num(p, "maturity", 0.25);
  params.spot = get_num(p, "spot", 1.0);
  params.sense = get_str(p, "sense", "seller") == "seller" ? BsbSense::kSeller : BsbSense::kBuyer;
  params.dt = get_num(p, "dt", 1.0 / 1024.0);
  params.n_paths = get_int(p, "n_paths", 20000);
  params.n_controls = static_cast<int>(get_int(p, "n_controls", 5));
  params.seed = cfg.seed;
  params.threads = cfg.threads;
  Json grid_spec = p.contains("grid") ? p.at("grid") : Json::object();
  params.grid.x_min = get_num(grid_spec, "x_min", 0.0, false);
  params.grid.x_max = get_num(grid_spec, "x_max", 4.0);
  params.grid.n_x = static_cast<int>(get_int(grid_spec, "n_x", 400));
  params.grid.n_t = static_cast<int>(get_int(grid_spec, "n_t", 4000));
  params.grid.horizon = params.maturity;
  const PayoffSpec payoff =
      p.contains("payoff") ? payoff_by_spec(p.at("payoff"))
                           : PayoffSpec::vanilla_call(get_num(p, "strike", 1.0));
  const UvmMethod method = method_s == "pde" ? UvmMethod::kPde : UvmMethod::kMcBound;
  const UvmReport rep = price_uvm(payoff, a_low, a_high, method, params);

  Rendered out;
  Json j = report_shell(cfg, canonical);
  j["method"] = rep.method;
  j["band"] = {a_low, a_high};
  j["spot"] = params.spot;
  j["maturity"] = params.maturity;
  j["price"] = rep.price;
  if (method == UvmMethod::kMcBound) {
    j["mc"] = estimate_json(rep.mc);
    j["best_control"] = rep.best_control;
    j["caveat"] = rep.caveat;
  } else {
    j["grid"] = {{"x_min", params.grid.x_min},
                 {"x_max", params.grid.x_max},
                 {"n_x", params.grid.n_x},
                 {"n_t", params.grid.n_t}};
    CsvBuilder csv(canonical, cfg.seed);
    csv.header({"x", "value"});
    for (int i = 0; i <= params.grid.n_x; ++i) {
      csv.row({rep.solution.x(i), rep.solution.values(0, i)});
    }
    out.files["uvm-slice.csv"] = csv.str();
  }
  out.files["uvm-bsb.json"] = j.dump(2) + "\n";
  out.summary.push_back(("uvm-bsb (" + rep.method + ") price=" + format_double(rep.price) +
                             (rep.caveat.empty() ? "" : " [" + rep.caveat + "]")));
  return out;
}

Rendered render_hedging(const ScenarioConfig& cfg, const std::string& canonical) {
  const Json& p = cfg.params;
  const double sigma_bs = get_num(p, "sigma_bs", 0.3);
  const double strike = get_num(p, "strike", 1.0);
  const double spot = get_num(p, "spot", 1.0);
  const double maturity = get_num(p, "maturity", 0.25);
  const double eta = get_num(p, "eta", 0.01, false);
  const double dt = get_num(p, "dt", 1.0 / 512.0);
  const std::int64_t n_paths = get_int(p, "n_paths", 20000);
  const std::int64_t pilot_paths = get_int(p, "pilot_paths", n_paths);
  const Json policy_spec =
      p.contains("policy") ? p.at("policy") : Json{{"name", "delta-tracking"}, {"kappa", 8.0}};
  const ControlPolicy policy = hedging_policy_by_spec(policy_spec, strike, sigma_bs, maturity);
  const PayoffSpec option = PayoffSpec::vanilla_call(strike);
  const McEstimate cost = hedging_cost_mc(sigma_bs, option, eta, policy, maturity, spot, dt,
                                          n_paths, cfg.seed, pilot_paths, cfg.threads);
  // Reference: the no-trading cost under the same seed (variance of the payoff when eta
  // plays no role in it).
  const McEstimate no_trade = hedging_cost_mc(sigma_bs, option, eta, ControlPolicy::constant(0.0),
                                              maturity, spot, dt, n_paths, cfg.seed, pilot_paths,
                                              cfg.threads);

  Rendered out;
  Json j = report_shell(cfg, canonical);
  j["sigma_bs"] = sigma_bs;
  j["strike"] = strike;
  j["spot"] = spot;
  j["maturity"] = maturity;
  j["eta"] = eta;
  j["policy"] = policy_spec;
  j["dt"] = dt;
  j["cost"] = estimate_json(cost);
  j["no_trade_cost"] = estimate_json(no_trade);
  out.files["hedging.json"] = j.dump(2) + "\n";
  out.summary.push_back(("hedging cost=" + format_double(cost.mean) + " +- " +
                             format_double(cost.stderr_) + " (no-trade " +
                             format_double(no_trade.mean) + ")"));
  return out;
}

// ---- Simulate job -------------------------------------------------------------------------

ModelSpec simulation_model(const ScenarioConfig& cfg) {
  const Json& p = cfg.params;
  if (cfg.scenario == "diagnostics") {
    return model_by_spec(p.contains("model") ? p.at("model") : Json::object());
  }
  if (cfg.scenario == "heat-occupation") {
    const double ob = get_num(p, "o_ball", 0.0, false);
    ModelSpec ms{OsdeModel{},
                 SimInit{ob > 0.0 ? OccupationMeasure::atom(Vec::Zero(1), ob)
                                  : OccupationMeasure::empty(1),
                         Vec::Constant(1, get_num(p, "x0", 0.0, false))}};
    ms.model.dim = 1;
    ms.model.horizon = get_num(p, "horizon", 1.0);
    ms.model.c_star = 1.0;
    ms.model.clock = ClockKind::kStandard;
    return ms;
  }
  if (cfg.scenario == "timer") {
    ModelSpec ms{OsdeModel{}, SimInit{OccupationMeasure::empty(1),
                                      Vec::Constant(1, get_num(p, "x0", 0.0, false))}};
    ms.model.dim = 1;
    ms.model.horizon = get_num(p, "budget", 0.04);
    ms.model.c_star = get_num(p, "c_star", 400.0);
    ms.model.clock = ClockKind::kQuadraticVariation;
    const Json sigma_spec =
        p.contains("sigma") ? p.at("sigma") : Json{{"name", "const"}, {"value", 0.2}};
    auto s = sigma_by_name(sigma_spec);
    ms.model.sigma_scalar = [s](const CoeffState& cs, const Vec& x, double) { return s(cs, x); };
    ms.model.drift = [s](const CoeffState& cs, const Vec& x, double) {
      const double v = s(cs, x);
      return Vec::Constant(1, -0.5 * v * v);
    };
    return ms;
  }
  if (cfg.scenario == "uvm-bsb") {
    ModelSpec ms{OsdeModel{}, SimInit{OccupationMeasure::empty(1),
                                      Vec::Constant(1, get_num(p, "spot", 1.0))}};
    ms.model.dim = 1;
    ms.model.horizon = get_num(p, "maturity", 0.25);
    ms.model.c_star = 1.0;
    ms.model.clock = ClockKind::kStandard;
    const double a_mid = 0.5 * (get_num(p, "a_low", 0.1) + get_num(p, "a_high", 0.3));
    ms.model.sigma_scalar = [a_mid](const CoeffState&, const Vec& x, double) {
      return a_mid * x(0);
    };
    return ms;
  }
  fail("simulate job supports scenarios diagnostics, heat-occupation, timer, uvm-bsb");
}

Rendered render_simulate(const ScenarioConfig& cfg, const std::string& canonical) {
  const Json& p = cfg.params;
  const double dt = get_num(p, "dt", 1.0 / 512.0);
  const std::int64_t n_paths = get_int(p, "n_paths", 100);
  ModelSpec ms = simulation_model(cfg);

  BatchOptions opts;
  opts.dt = dt;
  opts.n_paths = n_paths;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  const BatchResult res = batch(ms.model, ControlPolicy::constant(0.0), ms.init, opts);

  Rendered out;
  CsvBuilder paths_csv(canonical, cfg.seed);
  std::vector<std::string> header = {"path_index", "tau", "n_steps", "exit_mass",
                                     "terminal_cost", "running_cost", "total_cost"};
  for (int i = 0; i < ms.model.dim; ++i) header.push_back("exit_x" + std::to_string(i));
  paths_csv.header(header);
  double tau_min = 1e300;
  double tau_max = 0.0;
  for (const PathSummary& s : res.summaries) {
    std::vector<double> row = {static_cast<double>(s.path_index), s.tau,
                               static_cast<double>(s.n_steps), s.exit_mass, s.terminal_cost,
                               s.running_cost, s.total_cost};
    for (int i = 0; i < ms.model.dim; ++i) row.push_back(s.exit_x(i));
    paths_csv.row(row);
    tau_min = std::min(tau_min, s.tau);
    tau_max = std::max(tau_max, s.tau);
  }

  // Full trace of path 0 for inspection/plotting.
  const SimPath trace = simulate(ms.model, ControlPolicy::constant(0.0), ms.init, dt, cfg.seed, 0);
  CsvBuilder trace_csv(canonical, cfg.seed);
  std::vector<std::string> theader = {"step", "t", "clock"};
  for (int i = 0; i < ms.model.dim; ++i) theader.push_back("x" + std::to_string(i));
  trace_csv.header(theader);
  double t_acc = 0.0;
  for (std::int64_t n = 0; n <= trace.steps(); ++n) {
    std::vector<double> row = {static_cast<double>(n), t_acc, trace.clock(n)};
    for (int i = 0; i < ms.model.dim; ++i) row.push_back(trace.states(i, n));
    trace_csv.row(row);
    if (n < trace.steps()) t_acc += trace.dts(n);
  }

  Json j = report_shell(cfg, canonical);
  j["dt"] = dt;
  j["n_paths"] = n_paths;
  j["horizon"] = ms.model.horizon;
  j["cost"] = estimate_json(res.cost);
  j["tau_min"] = tau_min;
  j["tau_max"] = tau_max;
  out.files["simulate.json"] = j.dump(2) + "\n";
  out.files["paths.csv"] = paths_csv.str();
  out.files["trace.csv"] = trace_csv.str();
  out.summary.push_back(("simulate: " + std::to_string(n_paths) + " paths, cost=" +
                             format_double(res.cost.mean) + " tau in [" + format_double(tau_min) +
                             ", " + format_double(tau_max) + "]"));
  return out;
}

// ---- Verify / diagnose job ------------------------------------------------------------------

std::string determinism_subreport(std::uint64_t seed, int threads) {
  // Small but representative parallel jobs: a plain batch criterion, a coupled-ensemble
  // criterion, and a dt-sweep. Their data payloads cover every parallel reduction path.
  std::string s;
  s += verify_ito_convergence(100, seed + 91, threads).data.dump();
  s += verify_exit_time(500, 1.0 / 512.0, seed + 92, threads).data.dump();
  s += verify_gronwall(200, 1.0 / 512.0, seed + 93, threads).data.dump();
  return s;
}

Rendered render_diagnostics(const ScenarioConfig& cfg, const std::string& canonical) {
  const Json& p = cfg.params;
  const std::vector<std::string> suite = suite_from_params(p);
  const bool acceptance = get_str(p, "scale", "quick") == "acceptance";
  const bool gate = cfg.job == "verify";
  const std::uint64_t seed = cfg.seed;
  const int threads = cfg.threads;

  // Scale knobs: acceptance numbers are the verify_* defaults; quick shrinks paths.
  const std::int64_t heat_n = get_int(p, "n_paths", acceptance ? 100000 : 20000);
  const std::int64_t timer_n = get_int(p, "n_paths", acceptance ? 100000 : 20000);
  const std::int64_t ito_n = get_int(p, "n_paths", acceptance ? 1000 : 200);
  const std::int64_t exit_n = get_int(p, "n_paths", acceptance ? 10000 : 2000);
  const std::int64_t gron_n = get_int(p, "n_paths", acceptance ? 2000 : 500);
  const std::int64_t holder_n = get_int(p, "n_paths", acceptance ? 4000 : 1000);
  const double heat_dt = get_num(p, "dt", acceptance ? 1.0 / 1024.0 : 1.0 / 512.0);
  const double fine_dt = get_num(p, "dt", 1.0 / 1024.0);

  std::vector<CriterionResult> results;
  for (const std::string& name : suite) {
    if (name == "heat-oracle") {
      results.push_back(verify_heat_oracle(heat_n, heat_dt, seed + 10, threads));
    } else if (name == "timer-agreement") {
      results.push_back(verify_timer_agreement(timer_n, fine_dt, seed + 20, threads));
    } else if (name == "uvm-pde") {
      results.push_back(acceptance ? verify_uvm_pde(400, 4000) : verify_uvm_pde(200, 1200));
    } else if (name == "ito-convergence") {
      results.push_back(verify_ito_convergence(ito_n, seed + 30, threads));
    } else if (name == "derivative-orders") {
      results.push_back(verify_derivative_orders(acceptance ? 100 : 40, seed + 40));
    } else if (name == "exit-time") {
      results.push_back(verify_exit_time(exit_n, fine_dt, seed + 50, threads));
    } else if (name == "gronwall") {
      results.push_back(verify_gronwall(gron_n, heat_dt, seed + 60, threads));
    } else if (name == "projection-tail") {
      results.push_back(verify_projection_tail(acceptance ? 50 : 20, seed + 70));
    } else if (name == "cil-trace") {
      results.push_back(verify_cil(acceptance ? 100 : 40, seed + 80));
    } else if (name == "determinism") {
      const std::vector<int> counts = acceptance ? std::vector<int>{1, 2, 3}
                                                 : std::vector<int>{1, 2};
      results.push_back(verify_determinism(
          [seed](int k) { return determinism_subreport(seed, k); }, counts));
    } else if (name == "holder-probe") {
      results.push_back(verify_holder(holder_n, 1.0 / 512.0, seed + 90, threads));
    }
  }

  Rendered out;
  bool all_gating_pass = true;
  Json jres = Json::array();
  for (const CriterionResult& r : results) {
    out.summary.push_back(criterion_line(r));
    if (r.gating && !r.pass) all_gating_pass = false;
    Json jr;
    jr["name"] = r.name;
    jr["pass"] = r.pass;
    jr["gating"] = r.gating;
    jr["measured"] = r.measured;
    jr["tolerance"] = r.tolerance;
    jr["detail"] = r.detail;
    jr["data"] = r.data;
    jres.push_back(jr);

    if (r.name == "ito-convergence") {
      CsvBuilder csv(canonical, cfg.seed);
      csv.header({"dt", "rms_residual", "rms_stderr"});
      const auto& dts = r.data.at("dt");
      const auto& rms = r.data.at("rms");
      const auto& se = r.data.at("rms_stderr");
      for (std::size_t i = 0; i < dts.size(); ++i) {
        csv.row({dts.at(i).get<double>(), rms.at(i).get<double>(), se.at(i).get<double>()});
      }
      out.files["ito-convergence.csv"] = csv.str();
    } else if (r.name == "holder-probe") {
      CsvBuilder csv(canonical, cfg.seed);
      csv.header({"rho", "cost_gap", "gap_stderr"});
      for (const Json& row : r.data.at("rows")) {
        csv.row({row.at("rho").get<double>(), row.at("dj").get<double>(),
                 row.at("stderr").get<double>()});
      }
      out.files["holder.csv"] = csv.str();
    }
  }
  Json j = report_shell(cfg, canonical);
  j["scale"] = acceptance ? "acceptance" : "quick";
  j["gating"] = gate;
  j["all_gating_pass"] = all_gating_pass;
  Json failed = Json::array();
  for (const CriterionResult& r : results) {
    if (r.gating && !r.pass) failed.push_back(r.name);
  }
  j["failed"] = failed;
  j["criteria"] = jres;
  out.files["verify.json"] = j.dump(2) + "\n";
  out.exit_code = (gate && !all_gating_pass) ? 1 : 0;
  out.summary.push_back((std::string(all_gating_pass ? "all gating checks passed"
                                                         : "GATING CHECK FAILED") +
                             (gate ? "" : " (diagnose job: informational)")));
  return out;
}

}  // namespace

// ---- Public API ------------------------------------------------------------------------------

ScenarioConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    fail(std::string("JSON parse error: ") + e.what());
  }
  require_keys(j, {"job", "scenario", "seed", "out", "threads", "params"}, "config");
  ScenarioConfig cfg;
  cfg.job = get_str(j, "job", "");
  if (cfg.job != "simulate" && cfg.job != "price" && cfg.job != "verify" &&
      cfg.job != "diagnose") {
    fail("'job' must be one of simulate, price, verify, diagnose");
  }
  cfg.scenario = get_str(j, "scenario", "");
  bool known = false;
  for (const ScenarioInfo& info : scenario_catalog()) known = known || info.name == cfg.scenario;
  if (!known) fail("unknown scenario '" + cfg.scenario + "'");
  if (!j.contains("seed")) fail("'seed' is mandatory (no wall-clock seeding)");
  if (!j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0) {
    fail("'seed' must be a nonnegative integer");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.out_dir = get_str(j, "out", "out");
  cfg.threads = static_cast<int>(get_int(j, "threads", 1));
  cfg.params = j.contains("params") ? j.at("params") : Json::object();
  if (!cfg.params.is_object()) fail("'params' must be an object");

  if ((cfg.job == "verify" || cfg.job == "diagnose") && cfg.scenario != "diagnostics") {
    fail("verify/diagnose jobs require the diagnostics scenario");
  }
  validate_family_params(cfg.scenario, cfg.job, cfg.params);
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  return parse_config(read_file(path));
}

std::string canonical_config_text(const ScenarioConfig& cfg) {
  // Sorted-key dump via the unordered json type; excludes out/threads by design.
  nlohmann::json c;
  c["job"] = cfg.job;
  c["scenario"] = cfg.scenario;
  c["seed"] = cfg.seed;
  c["params"] = nlohmann::json::parse(cfg.params.dump());
  return c.dump();
}

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog = [] {
    std::vector<ScenarioInfo> v;
    {
      ScenarioInfo s;
      s.name = "heat-occupation";
      s.description = "Occupation time of Brownian motion in a centered ball, Monte Carlo "
                      "against the closed-form quadrature value.";
      s.default_job = "price";
      s.template_config = Json{
          {"job", "price"},
          {"scenario", "heat-occupation"},
          {"seed", 1},
          {"out", "out/heat-occupation"},
          {"threads", 1},
          {"params",
           Json{{"n_paths", 20000},
                {"dt", 0.001953125},
                {"radius", 1.0},
                {"horizon", 1.0},
                {"points", Json::array({Json::array({0.0, 0.0}), Json::array({0.3, 0.5})})}}}};
      v.push_back(s);
    }
    {
      ScenarioInfo s;
      s.name = "timer";
      s.description = "Variance-budget (timer) vanilla option priced at the exit time of the "
                      "quadratic-variation clock; model-independent total-variance oracle.";
      s.default_job = "price";
      s.template_config = Json{
          {"job", "price"},
          {"scenario", "timer"},
          {"seed", 1},
          {"out", "out/timer"},
          {"threads", 1},
          {"params", Json{{"n_paths", 20000},
                          {"dt", 0.0009765625},
                          {"budget", 0.04},
                          {"x0", 0.0},
                          {"strike", 1.0},
                          {"c_star", 400.0},
                          {"sigma", Json{{"name", "sin"}, {"base", 0.2}, {"amp", 0.1}}}}}};
      v.push_back(s);
    }
    {
      ScenarioInfo s;
      s.name = "uvm-bsb";
      s.description = "Volatility-band price bounds: monotone finite-difference solve of the "
                      "band equation, or a constant-volatility policy-search Monte Carlo bound.";
      s.default_job = "price";
      s.template_config = Json{
          {"job", "price"},
          {"scenario", "uvm-bsb"},
          {"seed", 1},
          {"out", "out/uvm-bsb"},
          {"threads", 1},
          {"params",
           Json{{"method", "pde"},
                {"a_low", 0.1},
                {"a_high", 0.3},
                {"payoff", Json{{"kind", "call"}, {"strike", 1.0}}},
                {"spot", 1.0},
                {"maturity", 0.25},
                {"sense", "seller"},
                {"grid", Json{{"x_min", 0.0}, {"x_max", 4.0}, {"n_x", 400}, {"n_t", 4000}}}}}};
      v.push_back(s);
    }
    {
      ScenarioInfo s;
      s.name = "hedging";
      s.description = "Quadratic hedging with proportional transaction costs: trading-speed "
                      "policy on (spot, delta, book value), pilot-estimated fair value.";
      s.default_job = "price";
      s.template_config = Json{
          {"job", "price"},
          {"scenario", "hedging"},
          {"seed", 1},
          {"out", "out/hedging"},
          {"threads", 1},
          {"params", Json{{"n_paths", 20000},
                          {"pilot_paths", 20000},
                          {"dt", 0.001953125},
                          {"sigma_bs", 0.3},
                          {"strike", 1.0},
                          {"spot", 1.0},
                          {"maturity", 0.25},
                          {"eta", 0.01},
                          {"policy", Json{{"name", "delta-tracking"}, {"kappa", 8.0}}}}}};
      v.push_back(s);
    }
    {
      ScenarioInfo s;
      s.name = "diagnostics";
      s.description = "Verification suite: every desk-scale estimate (oracle matches, "
                      "convergence orders, stability bounds, determinism) as gated checks.";
      s.default_job = "verify";
      s.template_config = Json{{"job", "verify"},
                               {"scenario", "diagnostics"},
                               {"seed", 1},
                               {"out", "out/diagnostics"},
                               {"threads", 1},
                               {"params", Json{{"suite", "all"}, {"scale", "quick"}}}};
      v.push_back(s);
    }
    return v;
  }();
  return catalog;
}

Rendered render_scenario(const ScenarioConfig& cfg) {
  const std::string canonical = canonical_config_text(cfg);
  if (cfg.job == "simulate") return render_simulate(cfg, canonical);
  if (cfg.job == "verify" || cfg.job == "diagnose") return render_diagnostics(cfg, canonical);
  if (cfg.scenario == "heat-occupation") return render_heat(cfg, canonical);
  if (cfg.scenario == "timer") return render_timer(cfg, canonical);
  if (cfg.scenario == "uvm-bsb") return render_uvm(cfg, canonical);
  if (cfg.scenario == "hedging") return render_hedging(cfg, canonical);
  fail("price job supports scenarios heat-occupation, timer, uvm-bsb, hedging");
}

int run_scenario(const ScenarioConfig& cfg) {
  const Rendered r = render_scenario(cfg);
  for (const auto& [name, content] : r.files) {
    write_file(cfg.out_dir + "/" + name, content);
  }
  for (const std::string& s : r.summary) std::printf("%s\n", s.c_str());
  std::printf("wrote %zu report file(s) to %s\n", r.files.size(), cfg.out_dir.c_str());
  return r.exit_code;
}

}  // namespace occ
