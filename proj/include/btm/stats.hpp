#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

// Self-contained test statistics: Kolmogorov-Smirnov against a callable
// CDF, chi-square tails via the regularized incomplete gamma function,
// goodness-of-fit and independence tests, Wilson score intervals, and a
// couple of small helpers used by the experiment suite.

namespace btm::stats {

/// Two-sided KS statistic of a sample against a CDF with explicit left
/// limits, so shared atoms (ties in the sample matching jumps in the
/// reference) are compared correctly.
template <class Cdf, class CdfLeft>
double ks_statistic(std::vector<double> xs, Cdf cdf, CdfLeft cdf_left) {
  if (xs.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j + 1 < xs.size() && xs[j + 1] == xs[i]) ++j;
    d = std::max(d, std::abs(cdf_left(xs[i]) - double(i) / n));
    d = std::max(d, std::abs(cdf(xs[i]) - double(j + 1) / n));
    i = j + 1;
  }
  return d;
}

/// Continuous-CDF convenience overload.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  return ks_statistic(std::move(xs), cdf, cdf);
}

/// Large-sample KS critical value c(alpha)/sqrt(n) for alpha in {1%, 5%}.
inline double ks_critical(double alpha, std::size_t n) {
  double c;
  if (alpha == 0.01)
    c = 1.628;
  else if (alpha == 0.05)
    c = 1.358;
  else
    throw std::invalid_argument("ks_critical: alpha must be 0.01 or 0.05");
  return c / std::sqrt(static_cast<double>(n));
}

namespace detail {

inline double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
  const double fpmin = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Lower regularized incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

/// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x), computed on
/// whichever side avoids cancellation.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

/// Upper tail of chi-square with dof degrees of freedom.
inline double chi2_sf(double x, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi2_sf: need dof >= 1");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int cells = 0;
};

/// Goodness of fit of positive-integer samples against Geometric(p) on
/// {1, 2, ...}. Cells with expected count below 5 are pooled into the tail.
inline Chi2Result chi2_gof_geometric(const std::vector<std::int64_t>& sample, double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("chi2_gof_geometric: need p in (0,1)");
  const double n = static_cast<double>(sample.size());
  if (n == 0) throw std::invalid_argument("chi2_gof_geometric: empty sample");

  // cells {1}, {2}, ..., {K}, {> K}; K chosen so every cell expects >= 5
  std::int64_t K = 1;
  while (true) {
    const double cell = n * p * std::pow(1.0 - p, double(K));      // P(k = K+1)
    const double tail = n * std::pow(1.0 - p, double(K + 1));      // P(k > K+1)
    if (cell < 5.0 || tail < 5.0) break;
    ++K;
  }

  std::vector<double> observed(static_cast<std::size_t>(K) + 1, 0.0);
  for (std::int64_t k : sample) {
    if (k < 1) throw std::invalid_argument("chi2_gof_geometric: sample values must be >= 1");
    const std::size_t cell = k > K ? static_cast<std::size_t>(K) : static_cast<std::size_t>(k - 1);
    observed[cell] += 1.0;
  }

  Chi2Result res;
  res.cells = static_cast<int>(K) + 1;
  for (std::int64_t k = 1; k <= K; ++k) {
    const double e = n * p * std::pow(1.0 - p, double(k - 1));
    const double o = observed[static_cast<std::size_t>(k - 1)];
    res.statistic += (o - e) * (o - e) / e;
  }
  const double etail = n * std::pow(1.0 - p, double(K));
  const double otail = observed.back();
  res.statistic += (otail - etail) * (otail - etail) / etail;
  res.dof = res.cells - 1;
  res.p_value = chi2_sf(res.statistic, res.dof);
  return res;
}

/// Chi-square independence test on a bins x bins empirical-quantile grid.
inline Chi2Result chi2_independence(const std::vector<double>& xs,
                                    const std::vector<double>& ys, int bins = 4) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("chi2_independence: need equal nonempty samples");
  if (bins < 2) throw std::invalid_argument("chi2_independence: need bins >= 2");
  const std::size_t n = xs.size();

  auto edges = [&](const std::vector<double>& v) {
    std::vector<double> s(v);
    std::sort(s.begin(), s.end());
    std::vector<double> e;
    for (int b = 1; b < bins; ++b) e.push_back(s[n * std::size_t(b) / std::size_t(bins)]);
    return e;
  };
  auto bin_of = [&](double x, const std::vector<double>& e) {
    int b = 0;
    while (b < bins - 1 && x >= e[std::size_t(b)]) ++b;
    return b;
  };

  const auto ex = edges(xs), ey = edges(ys);
  std::vector<double> table(std::size_t(bins) * std::size_t(bins), 0.0);
  std::vector<double> row(std::size_t(bins), 0.0), col(std::size_t(bins), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int bx = bin_of(xs[i], ex), by = bin_of(ys[i], ey);
    table[std::size_t(bx) * std::size_t(bins) + std::size_t(by)] += 1.0;
    row[std::size_t(bx)] += 1.0;
    col[std::size_t(by)] += 1.0;
  }

  Chi2Result res;
  res.cells = bins * bins;
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) {
      const double e = row[std::size_t(i)] * col[std::size_t(j)] / double(n);
      if (e <= 0.0) continue;
      const double o = table[std::size_t(i) * std::size_t(bins) + std::size_t(j)];
      res.statistic += (o - e) * (o - e) / e;
    }
  res.dof = (bins - 1) * (bins - 1);
  res.p_value = chi2_sf(res.statistic, res.dof);
  return res;
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
};

/// Wilson score interval for a binomial proportion (default 95%).
inline Interval wilson(std::int64_t successes, std::int64_t n,
                       double z = 1.959963984540054) {
  if (n <= 0 || successes < 0 || successes > n)
    throw std::invalid_argument("wilson: need 0 <= successes <= n, n > 0");
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {center - half, center + half};
}

/// Least-squares slope of log y against log x.
inline double log_log_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("log_log_slope: need >= 2 paired points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Total variation distance between two finite distributions on the same
/// support (need not be normalized identically; treats them literally).
inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

/// sup_x |P(N/L > x) - exp(-x)| for N geometric on {1,2,...} with success
/// probability 1/L. The sup over each constancy interval of the geometric
/// survival is attained at an endpoint.
inline double geom_exp_ks_bound(double L) {
  if (!(L > 1.0)) throw std::invalid_argument("geom_exp_ks_bound: need L > 1");
  const double q = 1.0 - 1.0 / L;
  double bound = 0.0;
  double geo = 1.0;  // (1 - 1/L)^k at k = 0
  for (std::int64_t k = 0;; ++k) {
    const double lo = double(k) / L, hi = double(k + 1) / L;
    bound = std::max(bound, std::abs(geo - std::exp(-lo)));
    bound = std::max(bound, std::abs(geo - std::exp(-hi)));
    if (geo < 1e-14 && std::exp(-lo) < 1e-14) break;
    geo *= q;
  }
  return bound;
}

/// Empirical median (sorts a copy; average of middle pair for even sizes).
inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace btm::stats
