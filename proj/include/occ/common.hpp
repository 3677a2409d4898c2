// Shared aliases, error types and small numeric utilities used across the library.
#ifndef OCC_COMMON_HPP
#define OCC_COMMON_HPP

#include <Eigen/Core>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace occ {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Raised when a caller violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a simulation aborts (non-finite state, clock-rate violation, step cap).
// Carries enough context to reproduce the failing path.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::uint64_t path_index, std::int64_t step)
      : std::runtime_error(what + " [path " + std::to_string(path_index) + ", step " +
                           std::to_string(step) + "]"),
        path_index(path_index),
        step(step) {}
  std::uint64_t path_index = 0;
  std::int64_t step = -1;
};

// Monte Carlo estimate: mean, standard error, path count and the seed that produced it.
struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(n_paths)
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
};

// Deterministic pairwise (tree) summation over a fixed index order. The result depends
// only on the values and their order, never on how the values were produced in parallel;
// this is what makes multi-threaded ensembles byte-reproducible.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// Mean / standard error with deterministic reduction order.
inline McEstimate mc_estimate(const std::vector<double>& samples, std::uint64_t seed) {
  McEstimate e;
  e.n_paths = static_cast<std::int64_t>(samples.size());
  e.seed = seed;
  if (samples.empty()) return e;
  const double n = static_cast<double>(samples.size());
  e.mean = pairwise_sum(samples) / n;
  if (samples.size() > 1) {
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double d = samples[i] - e.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / (n - 1.0);
    e.stderr_ = std::sqrt(var / n);
  }
  return e;
}

// Round-trip-exact decimal rendering of a double ("%.17g"), used by every report writer so
// that identical numbers always serialize to identical bytes.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

// Runs body(i) for i in [0, n) on `threads` workers pulling from a shared counter.
// Callers index results by i, so the outcome is independent of the worker count. The
// first exception thrown by any body aborts the sweep and is rethrown here.
inline void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& body) {
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        break;
      }
    }
  };
  const int n_threads = threads < 1 ? 1 : threads;
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

// Least-squares slope of y against x (used for log-log order fits).
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw PreconditionError("fit_slope: need >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw PreconditionError("fit_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace occ

#endif  // OCC_COMMON_HPP
