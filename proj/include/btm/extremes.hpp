#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "btm/errors.hpp"
#include "btm/logreal.hpp"
#include "btm/rng.hpp"
#include "btm/scaling.hpp"
#include "btm/stats.hpp"
#include "btm/tail.hpp"

namespace btm {

/// An i.i.d. sequence Y_1..Y_n with its running maxima and running sums.
/// S stalls once increments fall below the representable resolution at the
/// current magnitude; it is always non-decreasing and >= M.
struct SequencePanel {
  std::vector<LogReal> Y;
  std::vector<LogReal> M;
  std::vector<LogReal> S;

  static SequencePanel from_values(std::vector<LogReal> values) {
    SequencePanel p;
    p.Y = std::move(values);
    p.M.reserve(p.Y.size());
    p.S.reserve(p.Y.size());
    LogReal running_max, running_sum;
    for (const auto& y : p.Y) {
      running_max = std::max(running_max, y);
      running_sum = running_sum + y;
      p.M.push_back(running_max);
      p.S.push_back(running_sum);
    }
    return p;
  }

  static SequencePanel generate(const TailFunction& tail, std::int64_t n,
                                rng::Stream& stream) {
    if (n < 1) throw std::invalid_argument("SequencePanel: need n >= 1");
    std::vector<LogReal> ys;
    ys.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
      ys.push_back(tail.sample(stream.next_open01()));
    return from_values(std::move(ys));
  }
};

/// sup over the grid of (L(S_{floor(nt)}) - L(M_{floor(nt)})) / n.
/// Non-negative because S >= M and L is non-decreasing.
inline double sum_max_gap(const TailFunction& tail, const SequencePanel& panel,
                          std::int64_t n, const std::vector<double>& grid) {
  if (n < 100) throw std::invalid_argument("sum_max_gap: need n >= 100");
  if (grid.empty()) throw std::invalid_argument("sum_max_gap: empty grid");
  double sup = 0.0;
  for (double t : grid) {
    if (!(t > 0.0)) throw std::invalid_argument("sum_max_gap: grid times must be > 0");
    auto k = static_cast<std::size_t>(std::floor(double(n) * t));
    if (k < 1) k = 1;
    if (k > panel.Y.size())
      throw std::invalid_argument("sum_max_gap: grid time beyond the panel");
    const double gap =
        (tail.eval(panel.S[k - 1]) - tail.eval(panel.M[k - 1])) / double(n);
    sup = std::max(sup, gap);
  }
  return sup;
}

inline double sum_max_gap(const TailFunction& tail, std::int64_t n, double T,
                          const std::vector<double>& grid, rng::Stream& stream) {
  if (!(T >= 1.0)) throw std::invalid_argument("sum_max_gap: need T >= 1");
  const auto len = static_cast<std::int64_t>(std::ceil(double(n) * T));
  auto panel = SequencePanel::generate(tail, len, stream);
  return sum_max_gap(tail, panel, n, grid);
}

/// One lazily generated trial of the exceedence statistics at level l.
/// ys holds the generated prefix Y_1..Y_{n_l + radius}; indices are 1-based
/// in the record, 0-based in ys.
struct ExceedenceTrial {
  std::int64_t n_l = 0;
  LogReal s_l;      // sum of Y_i for i < n_l
  LogReal exceed;   // Y_{n_l}
  LogReal sbar;     // two-sided sum, 1 <= |i - n_l| < radius
  std::vector<LogReal> ys;
  std::int64_t cap = 0;
  int redraws = 0;
};

/// Generates Y until the first exceedence of l plus `radius` further terms.
/// A trial whose required prefix n_l + radius exceeds the cap is redrawn from
/// a fresh substream with the cap doubled.
inline ExceedenceTrial exceedence_trial(const TailFunction& tail, double l,
                                        double radius, std::uint64_t seed,
                                        std::uint64_t trial,
                                        std::int64_t cap0 = 0) {
  if (!(l > 0.0) || !std::isfinite(l))
    throw std::invalid_argument("exceedence_trial: need finite l > 0");
  if (!(radius >= 0.0))
    throw std::invalid_argument("exceedence_trial: need radius >= 0");
  const std::int64_t kmax =
      radius > 1.0 ? static_cast<std::int64_t>(std::ceil(radius)) - 1 : 0;
  if (cap0 <= 0)
    cap0 = static_cast<std::int64_t>(std::ceil(4.0 * tail.eval(l) + 2.0 * radius)) + 16;

  ExceedenceTrial rec;
  rec.cap = cap0;
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt > 60) throw BudgetError("exceedence_trial: cap doubling ran away");
    auto stream = rng::Stream::derive(seed, {rng::kPanelSalt, trial, attempt});
    rec.ys.clear();
    std::int64_t n_l = 0;
    for (std::int64_t i = 1; i <= rec.cap; ++i) {
      rec.ys.push_back(tail.sample(stream.next_open01()));
      if (n_l == 0 && rec.ys.back().exceeds(l)) n_l = i;
      if (n_l > 0 && i >= n_l + kmax) break;
    }
    if (n_l == 0 || double(n_l) + radius > double(rec.cap)) {
      rec.cap *= 2;
      rec.redraws += 1;
      continue;
    }
    rec.n_l = n_l;
    break;
  }

  rec.exceed = rec.ys[static_cast<std::size_t>(rec.n_l - 1)];
  for (std::int64_t i = 1; i < rec.n_l; ++i)
    rec.s_l = rec.s_l + rec.ys[static_cast<std::size_t>(i - 1)];
  for (std::int64_t off = 1; off <= kmax; ++off) {
    if (rec.n_l - off >= 1)
      rec.sbar = rec.sbar + rec.ys[static_cast<std::size_t>(rec.n_l - off - 1)];
    rec.sbar = rec.sbar + rec.ys[static_cast<std::size_t>(rec.n_l + off - 1)];
  }
  return rec;
}

struct ExceedenceLaw {
  double level = 0.0;
  double L_level = 0.0;
  std::vector<std::int64_t> n_l;
  std::vector<double> ratios;  // n_l / L(level)
  double ks_exp1 = 0.0;
};

/// Samples n_l over independent trials; n_l is exactly Geometric(1/L(l)).
inline ExceedenceLaw first_exceedence_law(const TailFunction& tail, double l,
                                          std::int64_t trials,
                                          std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("first_exceedence_law: need trials >= 1");
  const double Ll = tail.eval(l);
  if (!(1.0 / Ll < 0.1))
    throw std::invalid_argument("first_exceedence_law: need 1/L(l) < 0.1");

  ExceedenceLaw law;
  law.level = l;
  law.L_level = Ll;
  law.n_l.reserve(static_cast<std::size_t>(trials));
  law.ratios.reserve(static_cast<std::size_t>(trials));
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    auto stream = rng::Stream::derive(seed, {rng::kPanelSalt, std::uint64_t(trial)});
    std::int64_t i = 0;
    while (true) {
      ++i;
      if (i > 1000000000)
        throw BudgetError("first_exceedence_law: no exceedence within budget", i);
      if (tail.sample(stream.next_open01()).exceeds(l)) break;
    }
    law.n_l.push_back(i);
    law.ratios.push_back(double(i) / Ll);
  }
  law.ks_exp1 = stats::ks_statistic(
      law.ratios, [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); });
  return law;
}

struct ExceedenceBounds {
  double t = 0.0;
  double ell = 0.0;
  double r = 0.0;
  double h = 0.0;
  std::int64_t trials = 0;
  std::int64_t n_sum_half = 0;   // s_l < t / (2 r h^2)
  std::int64_t n_sum_full = 0;   // s_l < t / (r h^2)
  std::int64_t n_ex = 0;         // Y_{n_l} > t h^2 / r
  std::int64_t n_sbar = 0;       // sbar < ell / h^3
  std::int64_t n_joint = 0;      // sum_half and ex and sbar
  std::int64_t n_dominated = 0;  // s_l < Y_{n_l}
  std::int64_t redraws = 0;
};

/// Empirical frequencies of the three exceedence inequalities at level ell_t.
/// Both sum thresholds (with and without the 1/2) are reported.
inline ExceedenceBounds exceedence_bounds(const TailFunction& tail, double t,
                                          double h, std::int64_t trials,
                                          std::uint64_t seed) {
  if (!(h > 0.0)) throw std::invalid_argument("exceedence_bounds: need h > 0");
  if (trials < 1) throw std::invalid_argument("exceedence_bounds: need trials >= 1");

  ExceedenceBounds out;
  out.t = t;
  out.ell = tail.level(t).value;
  out.r = tail.eval(out.ell);
  out.h = h;
  out.trials = trials;
  const double radius = out.r / h;
  const double thr_sum_half = t / (2.0 * out.r * h * h);
  const double thr_sum_full = t / (out.r * h * h);
  const double thr_ex = t * h * h / out.r;
  const double thr_sbar = out.ell / (h * h * h);

  for (std::int64_t trial = 0; trial < trials; ++trial) {
    auto rec = exceedence_trial(tail, out.ell, radius, seed, std::uint64_t(trial));
    out.redraws += rec.redraws;
    if (rec.s_l < LogReal::from_value(thr_sum_half)) out.n_sum_half += 1;
    if (rec.s_l < LogReal::from_value(thr_sum_full)) out.n_sum_full += 1;
    if (rec.exceed.exceeds(thr_ex)) out.n_ex += 1;
    if (rec.sbar < LogReal::from_value(thr_sbar)) out.n_sbar += 1;
    if (rec.s_l < LogReal::from_value(thr_sum_half) && rec.exceed.exceeds(thr_ex) &&
        rec.sbar < LogReal::from_value(thr_sbar))
      out.n_joint += 1;
    if (rec.s_l < rec.exceed) out.n_dominated += 1;
  }
  return out;
}

inline ExceedenceBounds exceedence_bounds(const TailFunction& tail, double t,
                                          std::int64_t trials, std::uint64_t seed) {
  const auto scl = scaling_function(tail, t);
  return exceedence_bounds(tail, t, scl.h, trials, seed);
}

/// Ratios ell_t * r_t / t along a grid spanning at least four decades.
/// Checks the sandwich ell L(ell-) <= t <= ell L(ell) at the bisection
/// bracket and that the last ratio is within eps of 1.
inline std::vector<double> ell_asymptotic_check(const TailFunction& tail,
                                                const std::vector<double>& t_grid,
                                                double eps = 0.05) {
  if (t_grid.size() < 2)
    throw std::invalid_argument("ell_asymptotic_check: need at least two t");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("ell_asymptotic_check: t grid must increase");
  if (!(t_grid.back() >= 1e4 * t_grid.front()))
    throw std::invalid_argument("ell_asymptotic_check: grid must span >= 4 decades");

  std::vector<double> ratios;
  ratios.reserve(t_grid.size());
  for (double t : t_grid) {
    const auto lvl = tail.level(t);
    if (lvl.lower * tail.left_limit(lvl.lower) > t ||
        lvl.value * tail.eval(lvl.value) < t)
      throw std::runtime_error("ell_asymptotic_check: level sandwich violated");
    ratios.push_back(lvl.value * tail.eval(lvl.value) / t);
  }
  if (!(std::abs(ratios.back() - 1.0) <= eps))
    throw std::runtime_error("ell_asymptotic_check: final ratio away from 1");
  return ratios;
}

}  // namespace btm
