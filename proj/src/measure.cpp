#include "occ/measure.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace occ {

OccupationMeasure OccupationMeasure::compacted() const {
  std::map<std::vector<double>, double> merged;
  std::vector<double> key(static_cast<std::size_t>(dim_));
  for (std::int64_t i = 0; i < size(); ++i) {
    const auto x = position(i);
    for (int c = 0; c < dim_; ++c) key[static_cast<std::size_t>(c)] = x(c);
    merged[key] += weight(i);
  }
  OccupationMeasure out(dim_);
  out.reserve(static_cast<std::int64_t>(merged.size()));
  Vec x(dim_);
  for (const auto& [pos, w] : merged) {
    for (int c = 0; c < dim_; ++c) x(c) = pos[static_cast<std::size_t>(c)];
    out.append(x, w);
  }
  return out;
}

namespace {

// Enumerates dyadic frequency vectors, densely filling R^d as `count` grows. Round r
// contributes the mesh-2^{-r} grid points inside the ball of radius r+1 that were not seen
// in coarser rounds, canonicalized to the half-space whose first nonzero component is
// positive, sorted by (|xi|^2, lexicographic) in exact integer arithmetic. Interleaving
// mesh refinement with radius growth puts both sub-integer and moderate frequencies early
// in the sequence, which is what gives finite truncations their separating power.
std::vector<Vec> enumerate_dyadic_frequencies(int dim, int count) {
  constexpr int kScale = 30;  // common denominator 2^30 for exact dedupe keys
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  std::set<std::vector<std::int64_t>> seen;

  for (int r = 0; out.size() < static_cast<std::size_t>(count); ++r) {
    if (r > 24) throw std::logic_error("enumerate_dyadic_frequencies: round overflow");
    const std::int64_t m_bound = static_cast<std::int64_t>(r + 1) << r;  // |m| <= (r+1) 2^r
    const double step = std::ldexp(1.0, -r);
    // candidate = (m_0, ..., m_{d-1}) in units of 2^{-r}
    std::vector<std::int64_t> m(static_cast<std::size_t>(dim), -m_bound);
    struct Cand {
      std::int64_t norm2;
      std::vector<std::int64_t> m;
    };
    std::vector<Cand> fresh;
    bool done_enum = false;
    while (!done_enum) {
      std::int64_t norm2 = 0;
      for (int c = 0; c < dim; ++c) norm2 += m[static_cast<std::size_t>(c)] * m[static_cast<std::size_t>(c)];
      if (norm2 > 0 && norm2 <= m_bound * m_bound) {
        // canonical representative: first nonzero component positive
        bool canonical = false;
        for (int c = 0; c < dim; ++c) {
          const std::int64_t v = m[static_cast<std::size_t>(c)];
          if (v != 0) {
            canonical = v > 0;
            break;
          }
        }
        if (canonical) {
          std::vector<std::int64_t> key(static_cast<std::size_t>(dim));
          for (int c = 0; c < dim; ++c)
            key[static_cast<std::size_t>(c)] = m[static_cast<std::size_t>(c)] << (kScale - r);
          if (seen.insert(key).second) fresh.push_back({norm2, m});
        }
      }
      // odometer increment
      int c = 0;
      for (; c < dim; ++c) {
        auto& v = m[static_cast<std::size_t>(c)];
        if (++v <= m_bound) break;
        v = -m_bound;
      }
      done_enum = (c == dim);
    }
    std::sort(fresh.begin(), fresh.end(), [](const Cand& a, const Cand& b) {
      if (a.norm2 != b.norm2) return a.norm2 < b.norm2;
      return a.m < b.m;
    });
    for (const auto& cand : fresh) {
      if (out.size() == static_cast<std::size_t>(count)) break;
      Vec xi(dim);
      for (int c = 0; c < dim; ++c) xi(c) = static_cast<double>(cand.m[static_cast<std::size_t>(c)]) * step;
      out.push_back(std::move(xi));
    }
  }
  return out;
}

}  // namespace

SeparatingFamily::SeparatingFamily(int dim, int k_max, double c0)
    : dim_(dim), k_max_(k_max), c0_(c0) {
  if (dim <= 0) throw PreconditionError("SeparatingFamily: dim must be positive");
  if (k_max < 1) throw PreconditionError("SeparatingFamily: k_max must be >= 1");
  if (!(c0 > 0.0 && c0 < 1.0)) throw PreconditionError("SeparatingFamily: c0 must lie in (0,1)");

  const int n_osc = (k_max + 1) / 2;  // member 2j-1 = cos_j, member 2j = sin_j
  const auto freqs = enumerate_dyadic_frequencies(dim, n_osc);

  members_.reserve(static_cast<std::size_t>(k_max) + 1);
  members_.push_back(Member{Member::kConstant, Vec(), c0, c0});
  for (int j = 1; j <= n_osc; ++j) {
    const Vec& xi = freqs[static_cast<std::size_t>(j - 1)];
    const double amp = std::ldexp(1.0, -(j + 2)) / (1.0 + xi.norm());
    const double c1 = amp * (1.0 + xi.norm());
    members_.push_back(Member{Member::kCos, xi, amp, c1});
    if (static_cast<int>(members_.size()) <= k_max)
      members_.push_back(Member{Member::kSin, xi, amp, c1});
  }
  // sum over unstored oscillators j > n_osc of 2 * 4^{-(j+2)} = (8/3) 4^{-(n_osc+3)}
  tail_beyond_stored_ = (8.0 / 3.0) * std::pow(4.0, -(n_osc + 3.0));
}

void SeparatingFamily::check_index(int k) const {
  if (k < 0 || k > k_max_) throw PreconditionError("SeparatingFamily: member index out of range");
}

double SeparatingFamily::value(int k, const Vec& x) const {
  check_index(k);
  if (x.size() != dim_) throw PreconditionError("SeparatingFamily::value: dimension mismatch");
  const Member& m = members_[static_cast<std::size_t>(k)];
  switch (m.kind) {
    case Member::kConstant:
      return c0_;
    case Member::kCos:
      return m.amp * std::cos(m.xi.dot(x));
    case Member::kSin:
    default:
      return m.amp * std::sin(m.xi.dot(x));
  }
}

Vec SeparatingFamily::gradient(int k, const Vec& x) const {
  check_index(k);
  if (x.size() != dim_) throw PreconditionError("SeparatingFamily::gradient: dimension mismatch");
  const Member& m = members_[static_cast<std::size_t>(k)];
  switch (m.kind) {
    case Member::kConstant:
      return Vec::Zero(dim_);
    case Member::kCos:
      return (-m.amp * std::sin(m.xi.dot(x))) * m.xi;
    case Member::kSin:
    default:
      return (m.amp * std::cos(m.xi.dot(x))) * m.xi;
  }
}

double SeparatingFamily::sup_norm(int k) const {
  check_index(k);
  return members_[static_cast<std::size_t>(k)].amp;
}

double SeparatingFamily::c1_norm(int k) const {
  check_index(k);
  return members_[static_cast<std::size_t>(k)].c1;
}

const Vec& SeparatingFamily::frequency(int k) const {
  check_index(k);
  if (k == 0) throw PreconditionError("SeparatingFamily::frequency: member 0 is constant");
  return members_[static_cast<std::size_t>(k)].xi;
}

double SeparatingFamily::pair(const OccupationMeasure& o, int k) const {
  check_index(k);
  if (o.dim() != dim_) throw PreconditionError("SeparatingFamily::pair: dimension mismatch");
  const Member& m = members_[static_cast<std::size_t>(k)];
  std::vector<double> terms(static_cast<std::size_t>(o.size()));
  for (std::int64_t i = 0; i < o.size(); ++i) {
    const auto x = o.position(i);
    double f;
    switch (m.kind) {
      case Member::kConstant:
        f = c0_;
        break;
      case Member::kCos:
        f = m.amp * std::cos(m.xi.dot(x));
        break;
      case Member::kSin:
      default:
        f = m.amp * std::sin(m.xi.dot(x));
        break;
    }
    terms[static_cast<std::size_t>(i)] = o.weight(i) * f;
  }
  return pairwise_sum(terms);
}

double SeparatingFamily::tail_sup_sq(int k) const {
  check_index(k);
  double s = tail_beyond_stored_;
  for (int j = k + 1; j <= k_max_; ++j) {
    const double a = members_[static_cast<std::size_t>(j)].amp;
    s += a * a;
  }
  return s;
}

CylNormResult cyl_norm(const OccupationMeasure& o_plus, const OccupationMeasure& o_minus,
                       const SeparatingFamily& family, int K) {
  if (o_plus.dim() != family.dim() || o_minus.dim() != family.dim())
    throw PreconditionError("cyl_norm: dimension mismatch");
  if (K < 0 || K > family.k_max()) throw PreconditionError("cyl_norm: K out of range");
  double sq = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double d = family.pair(o_plus, k) - family.pair(o_minus, k);
    sq += d * d;
  }
  CylNormResult r;
  r.value = std::sqrt(sq);
  r.tail_bound = std::sqrt(family.tail_sup_sq(K)) * (o_plus.mass() + o_minus.mass());
  return r;
}

double parabolic_norm(const OccupationMeasure& o_plus, const OccupationMeasure& o_minus,
                      const Vec& dx, const SeparatingFamily& family, int K) {
  const double c = cyl_norm(o_plus, o_minus, family, K).value;
  return std::sqrt(c * c + dx.squaredNorm());
}

Vec project(const OccupationMeasure& o, const SeparatingFamily& family, int K) {
  if (o.dim() != family.dim()) throw PreconditionError("project: dimension mismatch");
  if (K < 1 || K > family.k_max()) throw PreconditionError("project: K out of range");
  Vec z(K);
  for (int k = 1; k <= K; ++k) z(k - 1) = family.pair(o, k);
  return z;
}

double projection_gap(const OccupationMeasure& o, const OccupationMeasure& o_prime,
                      const SeparatingFamily& family, int K) {
  if (o.dim() != family.dim() || o_prime.dim() != family.dim())
    throw PreconditionError("projection_gap: dimension mismatch");
  if (K < 0 || K > family.k_max()) throw PreconditionError("projection_gap: K out of range");
  double gap = 0.0;
  for (int k = K + 1; k <= family.k_max(); ++k) {
    const double d = family.pair(o, k) - family.pair(o_prime, k);
    gap += d * d;
  }
  return gap;
}

double projection_gap_bound(const SeparatingFamily& family, int K, double mass_sum) {
  return family.tail_sup_sq(K) * mass_sum * mass_sum;
}

ThetaJet theta_coercive(const OccupationMeasure& o, const Vec& x) {
  if (o.dim() != static_cast<int>(x.size()))
    throw PreconditionError("theta_coercive: dimension mismatch");
  const double q = std::sqrt(1.0 + x.squaredNorm());
  ThetaJet jet;
  jet.value = o.pair([](Eigen::Map<const Vec> y) { return std::sqrt(1.0 + y.squaredNorm()); }) + q;
  jet.d_occ = q;
  jet.grad = x / q;
  jet.hess = (Mat::Identity(x.size(), x.size()) - (x * x.transpose()) / (q * q)) / q;
  return jet;
}

void write_measure_csv(std::ostream& out, const OccupationMeasure& o) {
  for (int c = 0; c < o.dim(); ++c) out << "x" << c << ",";
  out << "w\n";
  for (std::int64_t i = 0; i < o.size(); ++i) {
    const auto x = o.position(i);
    for (int c = 0; c < o.dim(); ++c) out << format_double(x(c)) << ",";
    out << format_double(o.weight(i)) << "\n";
  }
}

OccupationMeasure read_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw PreconditionError("read_measure_csv: empty input");
  int dim = 0;
  {
    std::stringstream header(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(header, col, ',')) cols.push_back(col);
    if (cols.empty() || cols.back() != "w")
      throw PreconditionError("read_measure_csv: malformed header, expected x0,..,w");
    dim = static_cast<int>(cols.size()) - 1;
  }
  OccupationMeasure o(dim);
  Vec x(dim);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    for (int c = 0; c < dim; ++c) {
      if (!std::getline(row, cell, ',')) throw PreconditionError("read_measure_csv: short row");
      x(c) = std::stod(cell);
    }
    if (!std::getline(row, cell, ',')) throw PreconditionError("read_measure_csv: missing weight");
    o.append(x, std::stod(cell));
  }
  return o;
}

}  // namespace occ
