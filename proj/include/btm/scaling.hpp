#pragma once

#include <cmath>
#include <sstream>

#include "btm/errors.hpp"
#include "btm/tail.hpp"

// Scaling value h_t >= 2. Analytic candidate max(2, ln ln t), clamped down
// by halving (with 2 as the final candidate) until
//   L(ell/h^3) > r (1 - 1/h),   L(ell h^3) < r (1 + 1/h),   h^2 < r/4
// all hold. When no candidate works the time is pre-asymptotic.

namespace btm {

struct Scaling {
  double h = 2.0;
  double ell = 0.0;    // level at t
  double r = 0.0;      // L(ell)
  double candidate = 2.0;
  int halvings = 0;    // clamp count from the candidate down to h
};

namespace detail {

inline bool scaling_admissible(const TailFunction& tail, double ell, double r, double h) {
  if (!(h * h < r / 4.0)) return false;
  const double h3 = h * h * h;
  if (!(tail.eval(ell / h3) > r * (1.0 - 1.0 / h))) return false;
  if (!(tail.eval(ell * h3) < r * (1.0 + 1.0 / h))) return false;
  return true;
}

}  // namespace detail

inline Scaling scaling_function(const TailFunction& tail, double t) {
  const LevelResult lvl = tail.level(t);
  const double ell = lvl.value;
  const double r = tail.eval(ell);
  if (!(r > 16.0)) {
    std::ostringstream os;
    os << "pre-asymptotic: r=" << r << " <= 16 at t=" << t
       << ", no h >= 2 satisfies h^2 < r/4";
    throw PreAsymptoticError(os.str(), t, r);
  }
  Scaling s;
  s.ell = ell;
  s.r = r;
  s.candidate = std::max(2.0, std::log(std::log(t)));
  double h = s.candidate;
  int halvings = 0;
  while (h > 2.0) {
    if (detail::scaling_admissible(tail, ell, r, h)) break;
    h /= 2.0;
    ++halvings;
    if (h < 2.0) h = 2.0;
  }
  if (!detail::scaling_admissible(tail, ell, r, h)) {
    std::ostringstream os;
    os << "pre-asymptotic: no admissible h in [2, " << s.candidate
       << "] at t=" << t << " (r=" << r << ")";
    throw PreAsymptoticError(os.str(), t, r);
  }
  s.h = h;
  s.halvings = halvings;
  return s;
}

}  // namespace btm
