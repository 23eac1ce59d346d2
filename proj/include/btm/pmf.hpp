#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "btm/errors.hpp"
#include "btm/logreal.hpp"

// Exact-pmf oracle for the trap walk on a finite window, by uniformization:
//   p(t) = sum_k Poisson(Lambda t; k) * p0 P^k,  P = I + Q/Lambda.
// Site z exits at total rate 1/sigma_z (half to each neighbour), so Lambda
// is bounded by 1/e for every landscape the tail families produce. The
// outer boundary is either absorbing (escaped mass tracked exactly through
// the same Poisson mixture) or periodic (ring).

namespace btm {

enum class Boundary { Absorbing, Periodic };

/// Finite window of traps, stored through log-depths so depths beyond
/// double range keep exact (underflowing) exit rates.
struct Window {
  std::int64_t lo = 0;
  std::vector<double> log_sigma;

  std::size_t size() const { return log_sigma.size(); }
  std::int64_t hi() const { return lo + static_cast<std::int64_t>(size()) - 1; }
  std::size_t index_of(std::int64_t z) const {
    if (z < lo || z > hi()) throw std::out_of_range("Window: site outside window");
    return static_cast<std::size_t>(z - lo);
  }
  double rate(std::size_t i) const { return std::exp(-log_sigma[i]); }

  static Window from_sigma(std::int64_t lo, const std::vector<double>& sigma) {
    Window w;
    w.lo = lo;
    w.log_sigma.reserve(sigma.size());
    for (double s : sigma) {
      if (!(s > 0.0)) throw std::invalid_argument("Window: need sigma > 0");
      w.log_sigma.push_back(std::log(s));
    }
    return w;
  }

  template <class TrapField>
  static Window from_field(const TrapField& field, std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("Window: empty interval");
    Window w;
    w.lo = lo;
    w.log_sigma.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t z = lo; z <= hi; ++z) w.log_sigma.push_back(field.sigma(z).log());
    return w;
  }
};

struct PmfVector {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  Boundary boundary = Boundary::Absorbing;
  std::int64_t start = 0;
  std::vector<double> mass;
  double escaped_mass_bound = 0.0;
  double poisson_truncation_error = 0.0;
  double lambda = 0.0;
  std::int64_t k_lo = 0;
  std::int64_t k_hi = 0;
  double tol = 0.0;

  double p(std::int64_t z) const {
    if (z < lo || z > hi) return 0.0;
    return mass[static_cast<std::size_t>(z - lo)];
  }
  double sum_mass() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }

  void export_csv(std::ostream& os) const {
    os << "z,p\n";
    os.precision(17);
    for (std::size_t i = 0; i < mass.size(); ++i)
      os << lo + static_cast<std::int64_t>(i) << "," << mass[i] << "\n";
  }

  std::string metadata_json() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"window\": [%lld, %lld], \"boundary\": \"%s\", \"start\": %lld, "
                  "\"lambda\": %.17g, \"k_truncation\": [%lld, %lld], \"tol\": %.17g, "
                  "\"escaped_mass_bound\": %.17g, \"poisson_truncation_error\": %.17g}",
                  static_cast<long long>(lo), static_cast<long long>(hi),
                  boundary == Boundary::Absorbing ? "absorbing" : "periodic",
                  static_cast<long long>(start), lambda, static_cast<long long>(k_lo),
                  static_cast<long long>(k_hi), tol, escaped_mass_bound,
                  poisson_truncation_error);
    return std::string(buf);
  }
};

namespace detail {

/// One uniformized step q = p P in place (double buffer), returning newly
/// absorbed mass for absorbing boundaries.
inline double unif_step(const std::vector<double>& half_jump, Boundary boundary,
                        std::vector<double>& p, std::vector<double>& scratch) {
  const std::size_t n = p.size();
  double absorbed = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    scratch[i] = p[i] * (1.0 - 2.0 * half_jump[i]);
  if (boundary == Boundary::Periodic) {
    for (std::size_t i = 0; i < n; ++i) {
      const double out = p[i] * half_jump[i];
      scratch[i == 0 ? n - 1 : i - 1] += out;
      scratch[i + 1 == n ? 0 : i + 1] += out;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double out = p[i] * half_jump[i];
      if (i == 0)
        absorbed += out;
      else
        scratch[i - 1] += out;
      if (i + 1 == n)
        absorbed += out;
      else
        scratch[i + 1] += out;
    }
  }
  p.swap(scratch);
  return absorbed;
}

}  // namespace detail

inline PmfVector pmf_at_time(const Window& w, std::int64_t start, double t,
                             Boundary boundary, double tol = 1e-10,
                             std::int64_t step_budget = 4000000) {
  if (w.size() == 0) throw std::invalid_argument("pmf_at_time: empty window");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("pmf_at_time: bad t");
  if (!(tol > 0.0) || tol > 1e-2)
    throw std::invalid_argument("pmf_at_time: tol must lie in (0, 1e-2]");

  const std::size_t n = w.size();
  const std::size_t i0 = w.index_of(start);

  PmfVector out;
  out.lo = w.lo;
  out.hi = w.hi();
  out.boundary = boundary;
  out.start = start;
  out.tol = tol;

  double lambda = 0.0;
  std::vector<double> half_jump(n);
  for (std::size_t i = 0; i < n; ++i) lambda = std::max(lambda, w.rate(i));
  out.lambda = lambda;
  const double m = lambda * t;

  if (m == 0.0) {  // no jump can occur: point mass at the start
    out.mass.assign(n, 0.0);
    out.mass[i0] = 1.0;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) half_jump[i] = 0.5 * w.rate(i) / lambda;

  const double k_needed = m + 12.0 * std::sqrt(m) + 50.0;
  if (k_needed > static_cast<double>(step_budget))
    throw BudgetError("pmf_at_time: Poisson truncation needs more steps than budgeted",
                      static_cast<std::int64_t>(k_needed));

  // Poisson(m) weights over [k_lo, k_hi] holding >= 1 - tol of the mass,
  // expanded outward from the mode in log space.
  const auto log_w = [&](std::int64_t k) {
    return static_cast<double>(k) * std::log(m) - m - std::lgamma(static_cast<double>(k) + 1.0);
  };
  std::int64_t k_mode = static_cast<std::int64_t>(m);
  std::int64_t k_lo = k_mode, k_hi = k_mode;
  double included = std::exp(log_w(k_mode));
  double w_down = k_lo > 0 ? std::exp(log_w(k_lo - 1)) : 0.0;
  double w_up = std::exp(log_w(k_hi + 1));
  while (included < 1.0 - tol) {
    if (w_down >= w_up && k_lo > 0) {
      included += w_down;
      --k_lo;
      w_down = k_lo > 0 ? std::exp(log_w(k_lo - 1)) : 0.0;
    } else {
      included += w_up;
      ++k_hi;
      w_up = std::exp(log_w(k_hi + 1));
      if (k_hi > step_budget)
        throw BudgetError("pmf_at_time: Poisson truncation exceeded the step budget", k_hi);
    }
  }
  out.k_lo = k_lo;
  out.k_hi = k_hi;
  out.poisson_truncation_error = std::max(0.0, 1.0 - included);

  std::vector<double> p(n, 0.0), scratch(n, 0.0), acc(n, 0.0);
  p[i0] = 1.0;
  double escaped = 0.0, escaped_acc = 0.0;
  for (std::int64_t k = 0;; ++k) {
    if (k >= k_lo) {
      const double wk = std::exp(log_w(k));
      for (std::size_t i = 0; i < n; ++i) acc[i] += wk * p[i];
      escaped_acc += wk * escaped;
    }
    if (k == k_hi) break;
    escaped += detail::unif_step(half_jump, boundary, p, scratch);
  }
  out.mass = std::move(acc);
  out.escaped_mass_bound = boundary == Boundary::Absorbing ? escaped_acc : 0.0;
  return out;
}

/// Stationary law of the periodic chain: pi proportional to sigma,
/// normalized through log-sum-exp so extreme depths stay finite.
inline std::vector<double> equilibrium_periodic(const Window& w) {
  if (w.size() < 2) throw std::invalid_argument("equilibrium_periodic: need >= 2 sites");
  double lmax = w.log_sigma[0];
  for (double ls : w.log_sigma) lmax = std::max(lmax, ls);
  double z = 0.0;
  for (double ls : w.log_sigma) z += std::exp(ls - lmax);
  std::vector<double> pi(w.size());
  const double log_z = lmax + std::log(z);
  for (std::size_t i = 0; i < w.size(); ++i) pi[i] = std::exp(w.log_sigma[i] - log_z);
  return pi;
}

struct DetailedBalanceReport {
  bool ok = true;
  double max_violation = 0.0;
  std::size_t arg_edge = 0;  // left site index of the worst edge
};

/// pi(x) w_{x->y} = pi(y) w_{y->x} over every edge, evaluated in log space
/// against un-normalized pi = sigma; each side is identically 1/2 when the
/// rates come from the depths themselves.
inline DetailedBalanceReport detailed_balance_check(
    const Window& w, Boundary boundary, const std::vector<double>& rate_right,
    const std::vector<double>& rate_left, double threshold = 1e-12) {
  const std::size_t n = w.size();
  if (rate_right.size() != n || rate_left.size() != n)
    throw std::invalid_argument("detailed_balance_check: rate size mismatch");
  auto flow = [&](std::size_t i, double rate) {
    return rate > 0.0 ? std::exp(w.log_sigma[i] + std::log(rate)) : 0.0;
  };
  DetailedBalanceReport rep;
  const std::size_t edges = boundary == Boundary::Periodic ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const std::size_t j = (i + 1) % n;
    const double v = std::abs(flow(i, rate_right[i]) - flow(j, rate_left[j]));
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.arg_edge = i;
    }
  }
  rep.ok = rep.max_violation <= threshold;
  return rep;
}

/// Depth-derived rates: w_{x->y} = 1/(2 sigma_x), so each side of the
/// balance identity is sigma * (1 / (2 sigma)). The logs are cancelled
/// before exponentiating, otherwise depths beyond double range would
/// underflow the rate and fake a violation.
inline DetailedBalanceReport detailed_balance_check(const Window& w, Boundary boundary,
                                                    double threshold = 1e-12) {
  auto flow = [&](std::size_t i) {
    return 0.5 * std::exp(w.log_sigma[i] - w.log_sigma[i]);
  };
  DetailedBalanceReport rep;
  const std::size_t n = w.size();
  const std::size_t edges = boundary == Boundary::Periodic ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const std::size_t j = (i + 1) % n;
    const double v = std::abs(flow(i) - flow(j));
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.arg_edge = i;
    }
  }
  rep.ok = rep.max_violation <= threshold;
  return rep;
}

/// Return probability p_start(t) on an increasing grid for the periodic
/// chain. Throws if the sequence rises by more than step_tol anywhere, or
/// if the final value is not within limit_tol of the equilibrium mass.
inline std::vector<double> monotone_return_probability(const Window& w, std::int64_t start,
                                                       const std::vector<double>& t_grid,
                                                       double step_tol = 1e-9,
                                                       double limit_tol = 1e-6) {
  if (t_grid.empty()) throw std::invalid_argument("monotone_return_probability: empty grid");
  std::vector<double> out;
  out.reserve(t_grid.size());
  double prev_t = -1.0;
  for (double t : t_grid) {
    if (t <= prev_t)
      throw std::invalid_argument("monotone_return_probability: grid must increase");
    prev_t = t;
    out.push_back(pmf_at_time(w, start, t, Boundary::Periodic, 1e-12).p(start));
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] > out[i - 1] + step_tol) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "monotone_return_probability: rise at grid points %zu -> %zu "
                    "(%.17g -> %.17g)",
                    i - 1, i, out[i - 1], out[i]);
      throw std::runtime_error(buf);
    }
  }
  const double pi_start = equilibrium_periodic(w)[w.index_of(start)];
  if (out.back() < pi_start - limit_tol) {
    throw std::runtime_error(
        "monotone_return_probability: final value fell below the equilibrium mass");
  }
  return out;
}

}  // namespace btm
