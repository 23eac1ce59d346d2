#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "btm/pmf.hpp"

// Independent cross-check for the uniformization oracle: classical RK4 on
// the forward equation p' = p Q over the same window, fixed step chosen as
// a small fraction of the fastest exit rate. Deliberately shares no code
// with pmf_at_time beyond the Window type.

namespace btm {

inline PmfVector pmf_by_ode(const Window& w, std::int64_t start, double t,
                            Boundary boundary, double lambda_dt = 0.002) {
  if (w.size() == 0) throw std::invalid_argument("pmf_by_ode: empty window");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("pmf_by_ode: bad t");
  if (!(lambda_dt > 0.0) || lambda_dt > 0.1)
    throw std::invalid_argument("pmf_by_ode: lambda_dt must lie in (0, 0.1]");

  const std::size_t n = w.size();
  std::vector<double> u(n);
  double lambda = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = w.rate(i);
    lambda = std::max(lambda, u[i]);
  }

  // state = (p_0 .. p_{n-1}, escaped)
  std::vector<double> y(n + 1, 0.0);
  y[w.index_of(start)] = 1.0;

  auto deriv = [&](const std::vector<double>& s, std::vector<double>& ds) {
    for (std::size_t i = 0; i < n; ++i) ds[i] = -u[i] * s[i];
    ds[n] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double half = 0.5 * u[i] * s[i];
      if (boundary == Boundary::Periodic) {
        ds[i == 0 ? n - 1 : i - 1] += half;
        ds[i + 1 == n ? 0 : i + 1] += half;
      } else {
        if (i == 0)
          ds[n] += half;
        else
          ds[i - 1] += half;
        if (i + 1 == n)
          ds[n] += half;
        else
          ds[i + 1] += half;
      }
    }
  };

  PmfVector out;
  out.lo = w.lo;
  out.hi = w.hi();
  out.boundary = boundary;
  out.start = start;
  out.lambda = lambda;

  if (lambda * t == 0.0) {
    out.mass.assign(n, 0.0);
    out.mass[w.index_of(start)] = 1.0;
    return out;
  }

  const double h_target = lambda_dt / lambda;
  const auto steps = static_cast<std::int64_t>(std::ceil(t / h_target));
  const double h = t / static_cast<double>(steps);

  std::vector<double> k1(n + 1), k2(n + 1), k3(n + 1), k4(n + 1), tmp(n + 1);
  for (std::int64_t s = 0; s < steps; ++s) {
    deriv(y, k1);
    for (std::size_t i = 0; i <= n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    deriv(tmp, k2);
    for (std::size_t i = 0; i <= n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    deriv(tmp, k3);
    for (std::size_t i = 0; i <= n; ++i) tmp[i] = y[i] + h * k3[i];
    deriv(tmp, k4);
    for (std::size_t i = 0; i <= n; ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  out.mass.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
  out.escaped_mass_bound = boundary == Boundary::Absorbing ? y[n] : 0.0;
  return out;
}

}  // namespace btm
