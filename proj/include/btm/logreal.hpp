#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

// Non-negative reals carried as (value, natural log) pairs. Trap depths
// under a slowly varying tail routinely exceed the double range (depth
// exp(1/u) for small u), so comparisons and sums must survive overflow.
// Arithmetic stays in linear space while values fit below 1e300 and
// degrades to log space beyond that.

namespace btm {

class LogReal {
public:
  /// Zero.
  constexpr LogReal() = default;

  static LogReal from_value(double v) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("LogReal::from_value: need finite v >= 0");
    LogReal r;
    r.value_ = v;
    r.log_ = v == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(v);
    return r;
  }

  static LogReal from_log(double lg) {
    if (std::isnan(lg)) throw std::invalid_argument("LogReal::from_log: NaN");
    LogReal r;
    r.log_ = lg;
    r.value_ = lg < kMaxExp ? std::exp(lg) : std::numeric_limits<double>::infinity();
    return r;
  }

  double value() const { return value_; }  // +inf when out of double range
  double log() const { return log_; }
  bool is_zero() const { return value_ == 0.0; }
  bool value_representable() const { return std::isfinite(value_); }

  /// Multiply by a positive finite scalar.
  LogReal scaled(double k) const {
    if (!(k > 0.0) || !std::isfinite(k))
      throw std::invalid_argument("LogReal::scaled: need finite k > 0");
    if (is_zero()) return LogReal();
    LogReal r;
    r.log_ = log_ + std::log(k);
    double v = value_ * k;
    r.value_ = std::isfinite(v) && r.log_ < kMaxExp ? v : std::numeric_limits<double>::infinity();
    return r;
  }

  /// Streaming add (log-sum-exp when either side is out of range).
  LogReal operator+(const LogReal& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    double v = value_ + o.value_;
    if (std::isfinite(v) && v < kLinearCeiling) return from_value(v);
    const double hi = std::max(log_, o.log_);
    const double lo = std::min(log_, o.log_);
    return from_log(hi + std::log1p(std::exp(lo - hi)));
  }

  friend bool operator<(const LogReal& a, const LogReal& b) {
    if (a.value_representable() && b.value_representable()) return a.value_ < b.value_;
    return a.log_ < b.log_;
  }
  friend bool operator>(const LogReal& a, const LogReal& b) { return b < a; }
  friend bool operator<=(const LogReal& a, const LogReal& b) { return !(b < a); }
  friend bool operator>=(const LogReal& a, const LogReal& b) { return !(a < b); }

  /// Compare against a plain non-negative threshold.
  bool exceeds(double x) const {
    if (x < 0.0) return true;
    if (value_representable()) return value_ > x;
    return x == std::numeric_limits<double>::infinity() ? false : log_ > std::log(x);
  }

  static constexpr double kLinearCeiling = 1e300;

private:
  static constexpr double kMaxExp = 709.0;  // exp overflows just above this
  double value_ = 0.0;
  double log_ = -std::numeric_limits<double>::infinity();
};

inline LogReal min(const LogReal& a, const LogReal& b) { return a < b ? a : b; }
inline LogReal max(const LogReal& a, const LogReal& b) { return a < b ? b : a; }

namespace detail {

/// Neumaier-compensated sum of an ascending range of plain doubles.
inline double compensated_sum(std::vector<double>& xs) {
  std::sort(xs.begin(), xs.end());
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace detail

/// Sorting-and-compensated sum. Falls back to log-sum-exp as soon as the
/// linear-space total could leave the representable range.
inline LogReal sum(std::span<const LogReal> xs) {
  std::vector<double> vals;
  vals.reserve(xs.size());
  double max_val = 0.0;
  bool linear_ok = true;
  for (const LogReal& x : xs) {
    if (x.is_zero()) continue;
    if (!x.value_representable() || x.value() >= LogReal::kLinearCeiling) {
      linear_ok = false;
      break;
    }
    vals.push_back(x.value());
    max_val = std::max(max_val, x.value());
  }
  if (linear_ok && !vals.empty() &&
      max_val <= (std::numeric_limits<double>::max() / 2) / static_cast<double>(vals.size())) {
    double s = detail::compensated_sum(vals);
    return LogReal::from_value(s);
  }
  if (linear_ok && vals.empty()) return LogReal();

  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(xs.size());
  for (const LogReal& x : xs) {
    if (x.is_zero()) continue;
    logs.push_back(x.log());
    lmax = std::max(lmax, x.log());
  }
  if (logs.empty()) return LogReal();
  std::vector<double> terms;
  terms.reserve(logs.size());
  for (double lg : logs) terms.push_back(std::exp(lg - lmax));
  double s = detail::compensated_sum(terms);
  return LogReal::from_log(lmax + std::log(s));
}

inline LogReal sum(const std::vector<LogReal>& xs) { return sum(std::span<const LogReal>(xs)); }

}  // namespace btm
