#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "btm/logreal.hpp"

// Slowly varying tail functions L with P(depth > x) = 1/L(x), frozen to
// L = 1 below the floor x0 = e. Three families:
//   log:          L(x) = ln x
//   log_power:    L(x) = (ln x)^beta, beta > 0
//   exp_sqrt_log: L(x) = exp(sqrt(ln x))
// The last jumps at the floor (left limit 1, value e), which produces an
// atom of mass 1 - 1/e at depth e under inverse-CDF sampling.

namespace btm {

enum class TailFamily { Log, LogPower, ExpSqrtLog };

struct LevelResult {
  double value = 0.0;  // smallest s with s * L(s) >= t, up to bracket width
  double lower = 0.0;  // bracket: lower fails the inequality (or equals value)
  double upper = 0.0;
};

class TailFunction {
public:
  static constexpr double kFloor = 2.718281828459045235360287471;  // e

  static TailFunction log() { return TailFunction(TailFamily::Log, 1.0); }
  static TailFunction log_power(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw std::invalid_argument("TailFunction::log_power: need finite beta > 0");
    return TailFunction(TailFamily::LogPower, beta);
  }
  static TailFunction exp_sqrt_log() { return TailFunction(TailFamily::ExpSqrtLog, 1.0); }

  static TailFunction parse(const std::string& name, double beta = 1.0) {
    if (name == "log") return log();
    if (name == "log_power") return log_power(beta);
    if (name == "exp_sqrt_log") return exp_sqrt_log();
    throw std::invalid_argument("TailFunction::parse: unknown family '" + name + "'");
  }

  TailFamily family() const { return family_; }
  double beta() const { return beta_; }

  std::string name() const {
    switch (family_) {
      case TailFamily::Log: return "log";
      case TailFamily::LogPower: return "log_power(" + format_beta() + ")";
      case TailFamily::ExpSqrtLog: return "exp_sqrt_log";
    }
    return "?";
  }

  /// L at a point given by its natural log (works for depths beyond
  /// double range).
  double eval_at_log(double lx) const {
    if (lx < 1.0) return 1.0;
    switch (family_) {
      case TailFamily::Log: return lx;
      case TailFamily::LogPower: return std::pow(lx, beta_);
      case TailFamily::ExpSqrtLog: return std::exp(std::sqrt(lx));
    }
    return 1.0;
  }

  double eval(double x) const {
    if (x < kFloor) return 1.0;
    return eval_at_log(std::log(x));
  }

  double eval(const LogReal& x) const {
    if (x.is_zero()) return 1.0;
    return eval_at_log(x.log());
  }

  /// Left limit L(x-). Differs from eval only at the floor for the
  /// discontinuous family.
  double left_limit(double x) const {
    if (x <= kFloor) return 1.0;
    return eval(x);
  }

  /// Inverse-CDF sample: depth = inf{x : L(x) >= 1/u} for u in (0,1).
  /// Closed forms per family; exact up to floating point.
  LogReal sample(double u) const {
    if (!(u > 0.0) || !(u < 1.0))
      throw std::invalid_argument("TailFunction::sample: need u in (0,1)");
    const double inv = 1.0 / u;
    switch (family_) {
      case TailFamily::Log:
        return LogReal::from_log(inv);
      case TailFamily::LogPower:
        return LogReal::from_log(std::pow(inv, 1.0 / beta_));
      case TailFamily::ExpSqrtLog: {
        if (inv <= kFloor) return LogReal::from_log(1.0);  // atom at e
        const double l = std::log(inv);
        return LogReal::from_log(l * l);
      }
    }
    return LogReal();
  }

  /// Smallest s >= 0 with s * L(s) >= t. Exact (= t) for t <= e; monotone
  /// bisection on [1, t] otherwise, relative bracket width 1e-12.
  LevelResult level(double t) const {
    if (!(t > 0.0) || !std::isfinite(t))
      throw std::invalid_argument("TailFunction::level: need finite t > 0");
    if (t <= kFloor) return {t, t, t};
    double lo = 1.0;   // 1 * L(1) = 1 < t
    double hi = t;     // t * L(t) >= t since L >= 1
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid * eval(mid) >= t)
        hi = mid;
      else
        lo = mid;
    }
    return {hi, lo, hi};
  }

private:
  TailFunction(TailFamily f, double beta) : family_(f), beta_(beta) {}

  std::string format_beta() const {
    std::string s = std::to_string(beta_);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  TailFamily family_;
  double beta_;
};

}  // namespace btm
