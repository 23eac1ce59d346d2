#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "btm/logreal.hpp"
#include "btm/rng.hpp"
#include "btm/tail.hpp"

// An i.i.d. two-sided trap landscape z -> sigma_z. Each depth is a pure
// function of (seed, z) through a counter-based generator, so any site is
// reproducible without realizing its neighbours and concurrent readers
// need no synchronization. The realized range is tracked for export only.

namespace btm {

class Landscape {
public:
  Landscape(TailFunction tail, std::uint64_t seed) : tail_(tail), seed_(seed) {}

  Landscape(const Landscape& o) : tail_(o.tail_), seed_(o.seed_) {
    lo_.store(o.lo_.load(std::memory_order_relaxed), std::memory_order_relaxed);
    hi_.store(o.hi_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  }
  Landscape& operator=(const Landscape&) = delete;

  const TailFunction& tail() const { return tail_; }
  std::uint64_t seed() const { return seed_; }

  LogReal sigma(std::int64_t z) const {
    note_realized(z);
    return tail_.sample(rng::site_uniform(seed_, z));
  }

  double log_sigma(std::int64_t z) const { return sigma(z).log(); }

  std::optional<std::pair<std::int64_t, std::int64_t>> realized_range() const {
    auto lo = lo_.load(std::memory_order_relaxed);
    auto hi = hi_.load(std::memory_order_relaxed);
    if (lo > hi) return std::nullopt;
    return std::make_pair(lo, hi);
  }

  /// Key-value text record describing the landscape law.
  std::string descriptor() const {
    std::ostringstream os;
    os.precision(17);
    switch (tail_.family()) {
      case TailFamily::Log: os << "family=log\n"; break;
      case TailFamily::LogPower:
        os << "family=log_power\n" << "beta=" << tail_.beta() << "\n";
        break;
      case TailFamily::ExpSqrtLog: os << "family=exp_sqrt_log\n"; break;
    }
    os << "seed=" << seed_ << "\n";
    os << "x0=" << TailFunction::kFloor << "\n";
    return os.str();
  }

  /// CSV of the window [lo, hi]: z, sigma, log_sigma. Depths beyond double
  /// range print as inf; log_sigma always carries the value.
  void export_window(std::int64_t lo, std::int64_t hi, std::ostream& os) const {
    os << "z,sigma,log_sigma\n";
    os.precision(17);
    for (std::int64_t z = lo; z <= hi; ++z) {
      LogReal s = sigma(z);
      os << z << ",";
      if (s.value_representable())
        os << s.value();
      else
        os << "inf";
      os << "," << s.log() << "\n";
    }
  }

private:
  void note_realized(std::int64_t z) const {
    auto lo = lo_.load(std::memory_order_relaxed);
    while (z < lo && !lo_.compare_exchange_weak(lo, z, std::memory_order_relaxed)) {
    }
    auto hi = hi_.load(std::memory_order_relaxed);
    while (z > hi && !hi_.compare_exchange_weak(hi, z, std::memory_order_relaxed)) {
    }
  }

  TailFunction tail_;
  std::uint64_t seed_;
  mutable std::atomic<std::int64_t> lo_{std::numeric_limits<std::int64_t>::max()};
  mutable std::atomic<std::int64_t> hi_{std::numeric_limits<std::int64_t>::min()};
};

}  // namespace btm
