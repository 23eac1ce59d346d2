#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "btm/errors.hpp"
#include "btm/landscape.hpp"
#include "btm/logreal.hpp"
#include "btm/scaling.hpp"
#include "btm/tail.hpp"

// Localisation data at time t: the first site on each half-line whose depth
// exceeds the level ell_t, plus the derived sums and event flags. Site 0
// belongs to the negative scan, so z1 >= 1 and z2 <= 0; this makes z1
// geometric on {1, 2, ...} with success probability 1/r_t.
//
// The h-dependent fields (Sbar, events) are only filled when a scaling
// value is supplied; the frame itself exists at any t > 0.

namespace btm {

struct LocalisationFrame {
  double t = 0.0;
  LevelResult level;
  double r = 0.0;          // L(ell_t)
  std::int64_t z1 = 0;     // >= 1
  std::int64_t z2 = 0;     // <= 0
  LogReal sigma_z1;
  LogReal sigma_z2;
  LogReal S;               // sum of depths strictly between z2 and z1
  std::int64_t d = 0;      // max(|z1|, |z2|)
  LogReal m;               // min(sigma_z1, sigma_z2)
  std::optional<double> h;
  std::optional<LogReal> Sbar;
  std::optional<bool> event_a;  // S * d < t / h
  std::optional<bool> event_b;  // m > t h^2 / r
  std::optional<bool> event_c;  // Sbar < ell / h
};

/// Works for any trap field exposing tail() and sigma(z) -> LogReal; the
/// seeded Landscape is the usual instance, tests may pass explicit maps.
template <class TrapField>
LocalisationFrame localisation_frame(const TrapField& land, double t,
                                     std::optional<Scaling> scaling = {},
                                     std::int64_t site_budget = 1000000000) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("localisation_frame: need finite t > 0");

  LocalisationFrame f;
  f.t = t;
  f.level = land.tail().level(t);
  f.r = land.tail().eval(f.level.value);
  const double ell = f.level.value;

  std::int64_t scanned = 0;
  auto charge = [&](std::int64_t n) {
    scanned += n;
    if (scanned > site_budget)
      throw BudgetError("localisation_frame: site budget exhausted", scanned);
  };

  std::vector<LogReal> between;
  for (std::int64_t z = 1;; ++z) {
    charge(1);
    LogReal s = land.sigma(z);
    if (s.exceeds(ell)) {
      f.z1 = z;
      f.sigma_z1 = s;
      break;
    }
    between.push_back(s);
  }
  for (std::int64_t z = 0;; --z) {
    charge(1);
    LogReal s = land.sigma(z);
    if (s.exceeds(ell)) {
      f.z2 = z;
      f.sigma_z2 = s;
      break;
    }
    between.push_back(s);
  }

  f.S = sum(between);
  f.d = std::max(f.z1, -f.z2);
  f.m = min(f.sigma_z1, f.sigma_z2);

  if (scaling) {
    const double h = scaling->h;
    f.h = h;
    const double w = f.r / h;
    std::vector<LogReal> ring;
    const std::int64_t kmax = w > 1.0 ? static_cast<std::int64_t>(std::ceil(w)) - 1 : 0;
    for (std::int64_t center : {f.z1, f.z2}) {
      for (std::int64_t k = 1; k <= kmax; ++k) {
        charge(2);
        ring.push_back(land.sigma(center - k));
        ring.push_back(land.sigma(center + k));
      }
    }
    f.Sbar = sum(ring);
    const LogReal Sd = f.S.is_zero() ? LogReal() : f.S.scaled(double(f.d));
    f.event_a = Sd < LogReal::from_value(t / h);
    f.event_b = f.m.exceeds(t * h * h / f.r);
    f.event_c = *f.Sbar < LogReal::from_value(ell / h);
  }
  return f;
}

}  // namespace btm
