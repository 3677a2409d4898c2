#include "occ/control.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "occ/rng.hpp"

namespace occ {

namespace {

// Per-control pieces the Hamiltonian and the trace check both need.
struct SigmaEval {
  Mat ss_t;        // sigma sigma^T
  double frob_sq;  // ||sigma||_F^2 = tr(sigma sigma^T)
  Mat sigma;       // the diffusion matrix itself
};

SigmaEval eval_sigma(const OsdeModel& model, const CoeffState& cs, const Vec& x, double a) {
  SigmaEval e;
  if (model.sigma_scalar) {
    const double s = model.sigma_scalar(cs, x, a);
    e.sigma = Mat::Constant(1, 1, s);
    e.ss_t = Mat::Constant(1, 1, s * s);
    e.frob_sq = s * s;
  } else if (model.sigma_matrix) {
    e.sigma = model.sigma_matrix(cs, x, a);
    e.ss_t = e.sigma * e.sigma.transpose();
    e.frob_sq = e.ss_t.trace();
  } else {
    e.sigma = Mat::Identity(model.dim, model.dim);
    e.ss_t = e.sigma;
    e.frob_sq = static_cast<double>(model.dim);
  }
  return e;
}

double eval_lambda(const OsdeModel& model, const CoeffState& cs, const Vec& x, double a,
                   double frob_sq) {
  switch (model.clock) {
    case ClockKind::kStandard:
      return 1.0;
    case ClockKind::kQuadraticVariation:
      return frob_sq;
    case ClockKind::kCustom:
      return model.lambda(cs, x, a);
  }
  return 1.0;
}

// The family the diagnostics measure gaps with: the model's own if declared, otherwise a
// local one just large enough for the requested truncation.
std::shared_ptr<const SeparatingFamily> diagnostic_family(const OsdeModel& model, int K) {
  if (model.family) {
    if (K > model.family->k_max())
      throw PreconditionError("diagnostic: K exceeds the model family's k_max");
    return model.family;
  }
  return std::make_shared<SeparatingFamily>(model.dim, K);
}

Vec member_coordinates(const SeparatingFamily& fam, int K, const OccupationMeasure& o) {
  Vec z = Vec::Zero(K + 1);
  for (int k = 0; k <= K; ++k) z(k) = fam.pair(o, k);
  return z;
}

}  // namespace

McEstimate estimate_cost(const OsdeModel& model, const ControlPolicy& policy,
                         const SimInit& init, double dt, std::int64_t n_paths,
                         std::uint64_t seed, int threads) {
  const double mass = init.measure.mass();
  if (mass > model.horizon)
    throw PreconditionError("estimate_cost: initial mass exceeds the budget T");
  if (mass == model.horizon) {
    // Boundary of the domain: the exit time is 0, so the cost is the terminal cost of the
    // initial point itself, with no Monte Carlo error.
    McEstimate e;
    e.mean = model.terminal_cost ? model.terminal_cost(init.measure, init.x) : 0.0;
    e.stderr_ = 0.0;
    e.n_paths = 0;
    e.seed = seed;
    return e;
  }
  BatchOptions opts;
  opts.dt = dt;
  opts.n_paths = n_paths;
  opts.seed = seed;
  opts.threads = threads;
  return batch(model, policy, init, opts).cost;
}

PolicySweep value_over_policies(const OsdeModel& model,
                                const std::vector<ControlPolicy>& policies,
                                const SimInit& init, double dt, std::int64_t n_paths,
                                std::uint64_t seed, Sense sense, int threads) {
  if (policies.empty()) throw PreconditionError("value_over_policies: empty policy list");
  PolicySweep sweep;
  sweep.sense = sense;
  sweep.estimates.reserve(policies.size());
  for (const auto& policy : policies)
    sweep.estimates.push_back(estimate_cost(model, policy, init, dt, n_paths, seed, threads));
  sweep.best_index = 0;
  for (std::size_t j = 1; j < policies.size(); ++j) {
    const double best = sweep.estimates[sweep.best_index].mean;
    const double cand = sweep.estimates[j].mean;
    if (sense == Sense::kMin ? cand < best : cand > best) sweep.best_index = j;
  }
  return sweep;
}

double hamiltonian(const OsdeModel& model, const ParabolicPoint& p, const JetPoint& jet) {
  if (model.control_grid.empty())
    throw PreconditionError("hamiltonian: the model's control grid is empty");
  if (jet.delta.size() != model.dim || jet.gamma.rows() != model.dim ||
      jet.gamma.cols() != model.dim)
    throw PreconditionError("hamiltonian: jet dimension mismatch");
  const double gamma_scale = std::max(1.0, jet.gamma.cwiseAbs().maxCoeff());
  if ((jet.gamma - jet.gamma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * gamma_scale)
    throw PreconditionError("hamiltonian: gamma must be symmetric");

  const CoeffState cs = model.coeff_state(p.measure);
  double best = std::numeric_limits<double>::infinity();
  for (const double a : model.control_grid) {
    const SigmaEval se = eval_sigma(model, cs, p.x, a);
    const double lam = eval_lambda(model, cs, p.x, a, se.frob_sq);
    const double b_term = model.drift ? model.drift(cs, p.x, a).dot(jet.delta) : 0.0;
    const double ell = model.running_cost ? model.running_cost(cs, p.x, a) : 0.0;
    const double obj =
        lam * jet.theta + b_term + 0.5 * se.ss_t.cwiseProduct(jet.gamma).sum() + ell;
    best = std::min(best, obj);
  }
  return -best;
}

// ---- Coupled-ensemble diagnostics -------------------------------------------------------

namespace {

// Everything the two stability diagnostics extract from one coupled pair.
struct CoupledSample {
  double sup_rho_sq = 0.0;    // sup over nodes t_n <= tau' of rho_K^2(gap)
  double sup_clock_gap = 0.0; // sup over all shared nodes of |Lambda_n - Lambda'_n|
  double dtau = 0.0;          // |tau - tau'|
  double max_mass_sum = 0.0;  // max over counted nodes of |O_n| + |O'_n|
};

CoupledSample couple_and_measure(const OsdeModel& model, const ControlPolicy& policy,
                                 const SimInit& init, const SimInit& init_prime,
                                 const SeparatingFamily& fam, int K, const Vec& z0,
                                 const Vec& z0_prime, double dt, std::uint64_t seed,
                                 std::uint64_t path_index) {
  const auto [p1, p2] = simulate_coupled(model, model, policy, init, init_prime, dt, seed,
                                         path_index);
  CoupledSample out;
  out.dtau = std::abs(p1.tau - p2.tau);

  Vec dz = z0 - z0_prime;
  const double tau_prime = p2.tau;
  out.sup_rho_sq = dz.squaredNorm() + (p1.states.col(0) - p2.states.col(0)).squaredNorm();
  out.sup_clock_gap = std::abs(p1.clock(0) - p2.clock(0));
  out.max_mass_sum = p1.clock(0) + p2.clock(0);

  const Eigen::Index n_steps = p1.steps();
  for (Eigen::Index n = 0; n < n_steps; ++n) {
    const Vec x1 = p1.states.col(n);
    const Vec x2 = p2.states.col(n);
    const double w1 = p1.weights(n);
    const double w2 = p2.weights(n);
    for (int k = 0; k <= K; ++k) dz(k) += w1 * fam.value(k, x1) - w2 * fam.value(k, x2);

    out.sup_clock_gap = std::max(out.sup_clock_gap, std::abs(p1.clock(n + 1) - p2.clock(n + 1)));
    if (p1.times(n + 1) <= tau_prime) {
      const double rho_sq =
          dz.squaredNorm() + (p1.states.col(n + 1) - p2.states.col(n + 1)).squaredNorm();
      out.sup_rho_sq = std::max(out.sup_rho_sq, rho_sq);
      out.max_mass_sum = std::max(out.max_mass_sum, p1.clock(n + 1) + p2.clock(n + 1));
    }
  }
  return out;
}

struct StabilityConstants {
  double t_star, c_const, c1_const, c2_const;
};

StabilityConstants stability_constants(const OsdeModel& model, double c0) {
  StabilityConstants k;
  const double cs = model.c_star, T = model.horizon;
  k.t_star = cs * T;
  k.c_const = cs * cs * (3.0 * (k.t_star + 4.0) + 2.0 * (T + k.t_star) * (T + k.t_star));
  k.c1_const = 3.0 * std::exp(k.c_const * k.t_star);
  k.c2_const = cs * std::sqrt(2.0 * (1.0 / (c0 * c0) +
                                     cs * cs * k.t_star * k.t_star * k.c1_const));
  return k;
}

}  // namespace

GronwallReport gronwall_diagnostic(const OsdeModel& model, const ControlPolicy& policy,
                                   const SimInit& init, const SimInit& init_prime, double dt,
                                   std::int64_t n_paths, std::uint64_t seed, int K,
                                   int threads) {
  const auto fam = diagnostic_family(model, K);
  const Vec z0 = member_coordinates(*fam, K, init.measure);
  const Vec z0p = member_coordinates(*fam, K, init_prime.measure);

  GronwallReport report;
  report.K = K;
  const StabilityConstants k = stability_constants(model, fam->c0());
  report.t_star = k.t_star;
  report.c_const = k.c_const;
  report.c1_const = k.c1_const;
  report.rho0 = std::sqrt((z0 - z0p).squaredNorm() + (init.x - init_prime.x).squaredNorm());
  report.rhs = report.c1_const * report.rho0 * report.rho0;

  std::vector<double> sup_samples(static_cast<std::size_t>(n_paths));
  std::vector<double> mass_samples(static_cast<std::size_t>(n_paths));
  parallel_for(n_paths, threads, [&](std::int64_t i) {
    const CoupledSample s = couple_and_measure(model, policy, init, init_prime, *fam, K, z0,
                                               z0p, dt, seed, static_cast<std::uint64_t>(i));
    sup_samples[static_cast<std::size_t>(i)] = s.sup_rho_sq;
    mass_samples[static_cast<std::size_t>(i)] = s.max_mass_sum;
  });

  report.lhs = mc_estimate(sup_samples, seed);
  const double worst_mass = *std::max_element(mass_samples.begin(), mass_samples.end());
  report.lhs_tail_bound = fam->tail_sup_sq(K) * worst_mass * worst_mass;
  report.pass = report.lhs.mean + 3.0 * report.lhs.stderr_ <= report.rhs;
  return report;
}

ExitTimeReport exit_time_diagnostic(const OsdeModel& model, const ControlPolicy& policy,
                                    const SimInit& init, const SimInit& init_prime, double dt,
                                    std::int64_t n_paths, std::uint64_t seed, int K,
                                    int threads) {
  const auto fam = diagnostic_family(model, K);
  const Vec z0 = member_coordinates(*fam, K, init.measure);
  const Vec z0p = member_coordinates(*fam, K, init_prime.measure);

  ExitTimeReport report;
  const StabilityConstants k = stability_constants(model, fam->c0());
  report.t_star = k.t_star;
  report.c2_const = k.c2_const;
  report.rho0 = std::sqrt((z0 - z0p).squaredNorm() + (init.x - init_prime.x).squaredNorm());
  report.rhs = report.c2_const * report.rho0;

  std::vector<double> sq(static_cast<std::size_t>(n_paths));
  std::vector<double> slack(static_cast<std::size_t>(n_paths));
  parallel_for(n_paths, threads, [&](std::int64_t i) {
    const CoupledSample s = couple_and_measure(model, policy, init, init_prime, *fam, K, z0,
                                               z0p, dt, seed, static_cast<std::uint64_t>(i));
    sq[static_cast<std::size_t>(i)] = s.dtau * s.dtau;
    slack[static_cast<std::size_t>(i)] =
        s.dtau - (model.c_star * s.sup_clock_gap + 2.0 * dt);
  });

  report.sq_diff = mc_estimate(sq, seed);
  report.l2_diff = std::sqrt(report.sq_diff.mean);
  report.l2_stderr =
      report.l2_diff > 0.0 ? report.sq_diff.stderr_ / (2.0 * report.l2_diff) : 0.0;
  report.max_pathwise_slack = *std::max_element(slack.begin(), slack.end());
  report.pathwise_pass = report.max_pathwise_slack <= 1e-12;
  report.l2_pass = report.l2_diff <= report.rhs;
  return report;
}

HolderReport holder_probe(const OsdeModel& model, const std::vector<ControlPolicy>& policies,
                          const SimInit& base, const std::vector<SimInit>& perturbations,
                          double dt, std::int64_t n_paths, std::uint64_t seed, Sense sense,
                          int threads) {
  if (policies.empty()) throw PreconditionError("holder_probe: empty policy list");
  const auto fam =
      model.family ? model.family : std::make_shared<const SeparatingFamily>(model.dim, 256);

  BatchOptions opts;
  opts.dt = dt;
  opts.n_paths = n_paths;
  opts.seed = seed;
  opts.threads = threads;

  // Per-policy per-path costs at the base point, reused against every perturbation
  // (common random numbers throughout: same seed, same path indices).
  auto costs_at = [&](const SimInit& init) {
    std::vector<std::vector<double>> per_policy;
    per_policy.reserve(policies.size());
    for (const auto& policy : policies) {
      const BatchResult r = batch(model, policy, init, opts);
      std::vector<double> c(r.summaries.size());
      for (std::size_t i = 0; i < r.summaries.size(); ++i) c[i] = r.summaries[i].total_cost;
      per_policy.push_back(std::move(c));
    }
    return per_policy;
  };
  auto best_of = [&](const std::vector<std::vector<double>>& per_policy) {
    std::size_t best = 0;
    double best_mean = mc_estimate(per_policy[0], seed).mean;
    for (std::size_t j = 1; j < per_policy.size(); ++j) {
      const double m = mc_estimate(per_policy[j], seed).mean;
      if (sense == Sense::kMin ? m < best_mean : m > best_mean) {
        best = j;
        best_mean = m;
      }
    }
    return std::make_pair(best, best_mean);
  };

  const auto base_costs = costs_at(base);
  const auto [base_best, base_value] = best_of(base_costs);

  HolderReport report;
  report.rows.reserve(perturbations.size());
  for (const auto& pert : perturbations) {
    HolderRow row;
    row.rho = parabolic_norm(base.measure, pert.measure, base.x - pert.x, *fam, fam->k_max());
    const auto pert_costs = costs_at(pert);
    const auto [pert_best, pert_value] = best_of(pert_costs);
    row.dj = std::abs(base_value - pert_value);
    std::vector<double> diff(static_cast<std::size_t>(n_paths));
    for (std::size_t i = 0; i < diff.size(); ++i)
      diff[i] = base_costs[base_best][i] - pert_costs[pert_best][i];
    row.stderr_ = mc_estimate(diff, seed).stderr_;
    report.rows.push_back(row);
  }

  std::vector<double> lx, ly;
  for (const auto& row : report.rows)
    if (row.rho > 0.0 && row.dj > 0.0) {
      lx.push_back(std::log(row.rho));
      ly.push_back(std::log(row.dj));
    }
  if (lx.size() >= 2) {
    report.slope = fit_slope(lx, ly);
    report.slope_fitted = true;
  }
  return report;
}

// ---- Two-point trace inequality ---------------------------------------------------------

namespace {

bool is_admissible_pair(const Mat& gamma, const Mat& gamma_prime, double epsilon) {
  const Eigen::Index d = gamma.rows();
  const double c = 3.0 / epsilon;
  Mat m = Mat::Zero(2 * d, 2 * d);
  m.topLeftCorner(d, d) = gamma;
  m.bottomRightCorner(d, d) = -gamma_prime;

  Mat big_g(2 * d, 2 * d);
  big_g.topLeftCorner(d, d) = Mat::Identity(d, d);
  big_g.topRightCorner(d, d) = -Mat::Identity(d, d);
  big_g.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
  big_g.bottomRightCorner(d, d) = Mat::Identity(d, d);

  const double tol = -1e-9 * c;
  Eigen::SelfAdjointEigenSolver<Mat> lower(m + c * Mat::Identity(2 * d, 2 * d),
                                           Eigen::EigenvaluesOnly);
  if (lower.eigenvalues().minCoeff() < tol) return false;
  Eigen::SelfAdjointEigenSolver<Mat> upper(c * big_g - m, Eigen::EigenvaluesOnly);
  return upper.eigenvalues().minCoeff() >= tol;
}

}  // namespace

CilReport cil_trace_check(const OsdeModel& model, const ParabolicPoint& p,
                          const ParabolicPoint& p_prime, double epsilon,
                          const std::vector<std::pair<Mat, Mat>>& gamma_pairs) {
  if (!(epsilon > 0.0)) throw PreconditionError("cil_trace_check: epsilon must be positive");
  if (model.control_grid.empty())
    throw PreconditionError("cil_trace_check: the model's control grid is empty");
  const auto fam =
      model.family ? model.family : std::make_shared<const SeparatingFamily>(model.dim, 512);

  CilReport report;
  report.n_supplied = static_cast<std::int64_t>(gamma_pairs.size());
  report.rho =
      parabolic_norm(p.measure, p_prime.measure, p.x - p_prime.x, *fam, fam->k_max());
  report.lipschitz_rhs =
      3.0 * model.c_star * model.c_star / epsilon * report.rho * report.rho;

  const CoeffState cs = model.coeff_state(p.measure);
  const CoeffState cs_prime = model.coeff_state(p_prime.measure);

  report.max_violation = -std::numeric_limits<double>::infinity();
  bool all_pass = true;
  for (const auto& [gamma, gamma_prime] : gamma_pairs) {
    if (!is_admissible_pair(gamma, gamma_prime, epsilon)) {
      ++report.n_rejected;
      continue;
    }
    ++report.n_admissible;
    for (const double a : model.control_grid) {
      const SigmaEval s1 = eval_sigma(model, cs, p.x, a);
      const SigmaEval s2 = eval_sigma(model, cs_prime, p_prime.x, a);
      const double lhs =
          s1.ss_t.cwiseProduct(gamma).sum() - s2.ss_t.cwiseProduct(gamma_prime).sum();
      const double rhs = (3.0 / epsilon) * (s1.sigma - s2.sigma).squaredNorm();
      const double violation = lhs - rhs;
      report.max_violation = std::max(report.max_violation, violation);
      if (violation > 1e-9 * (1.0 + std::abs(rhs))) all_pass = false;
    }
  }
  report.all_pass = all_pass && report.n_admissible > 0;
  if (report.n_admissible == 0) report.max_violation = 0.0;
  return report;
}

std::vector<std::pair<Mat, Mat>> sample_admissible_gamma_pairs(int dim, double epsilon,
                                                               int count,
                                                               std::uint64_t seed) {
  if (dim < 1) throw PreconditionError("sample_admissible_gamma_pairs: dim must be >= 1");
  if (!(epsilon > 0.0))
    throw PreconditionError("sample_admissible_gamma_pairs: epsilon must be positive");
  const double c = 3.0 / epsilon;
  const double d = static_cast<double>(dim);
  // Entry scales keeping eigenvalues well inside the admissible box so the rejection
  // rate stays low; the eigenvalue test remains the sole arbiter of admissibility.
  const double s_prime = 0.4 * c / d;
  const double s_q = std::sqrt(0.3 * c) / d;

  std::vector<std::pair<Mat, Mat>> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  const std::int64_t max_attempts = 1000LL * count + 1000;
  for (std::int64_t attempt = 0; attempt < max_attempts && pairs.size() < static_cast<std::size_t>(count); ++attempt) {
    RandomStream rng(seed, static_cast<std::uint64_t>(attempt), /*phase=*/0xC11);
    std::uint32_t slot = 0;
    auto draw = [&](double scale) {
      return scale * (2.0 * rng.uniform(0, slot++) - 1.0);
    };
    Mat gamma_prime(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) gamma_prime(i, j) = gamma_prime(j, i) = draw(s_prime);
    Mat a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = draw(s_q);
    const Mat gamma = gamma_prime - a * a.transpose();
    if (is_admissible_pair(gamma, gamma_prime, epsilon)) pairs.emplace_back(gamma, gamma_prime);
  }
  if (pairs.size() < static_cast<std::size_t>(count))
    throw PreconditionError("sample_admissible_gamma_pairs: rejection rate too high");
  return pairs;
}

}  // namespace occ
