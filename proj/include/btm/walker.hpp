#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "btm/errors.hpp"
#include "btm/frame.hpp"
#include "btm/pmf.hpp"
#include "btm/rng.hpp"

// Direct simulation of the trap walk: embedded fair +-1 chain with
// exponential holding times of mean sigma_z. The clock accumulates through
// a compensated sum so tau comparisons stay exact over long paths. The
// chain is cadlag: a jump landing exactly at the horizon counts.

namespace btm {

struct WalkerOptions {
  std::int64_t jump_budget = 1000000000;
  bool record_holds = false;
};

struct PathRecord {
  std::vector<std::int64_t> jump_sites;  // visited sites, starting site first
  std::vector<double> hold_times;  // completed hold at jump_sites[k], when recorded
  double total_time = 0.0;
  std::map<std::int64_t, std::int64_t> local_times;  // embedded visits before tau1
  std::optional<double> tau1;
  std::optional<std::int64_t> first_gamma_site;
  std::optional<double> tau2;
  std::int64_t position_at_t = 0;
};

namespace detail {

struct Clock {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

template <class TrapField>
PathRecord simulate_to_time(const TrapField& land, double t, const LocalisationFrame& frame,
                            rng::Stream& stream, WalkerOptions opts = {}) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("simulate_to_time: need finite t > 0");

  PathRecord rec;
  std::int64_t site = 0;
  rec.jump_sites.push_back(site);

  const bool track_exit = frame.h.has_value();
  const double exit_radius = track_exit ? frame.r / *frame.h : 0.0;

  auto in_gamma = [&](std::int64_t z) { return z == frame.z1 || z == frame.z2; };
  if (in_gamma(site)) {
    rec.tau1 = 0.0;
    rec.first_gamma_site = site;
  }

  detail::Clock clock;
  std::int64_t jumps = 0;
  while (true) {
    const double hold = land.sigma(site).value() * stream.next_exponential();
    if (!(clock.value() + hold <= t)) break;  // still sitting here at the horizon
    clock.add(hold);
    if (opts.record_holds) rec.hold_times.push_back(hold);  // completed holds only

    if (!rec.tau1) rec.local_times[site] += 1;
    if (++jumps > opts.jump_budget)
      throw BudgetError("simulate_to_time: jump budget exhausted", jumps);

    site += stream.next_bool() ? 1 : -1;
    rec.jump_sites.push_back(site);

    if (!rec.tau1 && in_gamma(site)) {
      rec.tau1 = clock.value();
      rec.first_gamma_site = site;
    }
    if (track_exit && rec.tau1 && !rec.tau2 &&
        std::abs(double(site - *rec.first_gamma_site)) >= exit_radius) {
      rec.tau2 = clock.value();
    }
  }
  rec.total_time = t;
  rec.position_at_t = site;
  return rec;
}

/// Probability that the simple random walk from 0 hits x > 0 before y < 0,
/// in the magnitude convention: |y| / (x + |y|).
inline double srw_hitting_probability(std::int64_t x, std::int64_t y) {
  if (x < 1 || y > -1)
    throw std::invalid_argument("srw_hitting_probability: need x >= 1, y <= -1");
  return double(-y) / double(x - y);
}

/// Closed-form law of the first localisation site reached: the walk from 0
/// hits z1 before z2 with probability |z2| / (z1 + |z2|).
inline double first_gamma_site_distribution(const LocalisationFrame& frame) {
  return double(-frame.z2) / double(frame.z1 - frame.z2);
}

struct SrwExcursion {
  std::int64_t level = 0;
  std::int64_t exit_step = 0;
  std::int64_t final_site = 0;
  std::vector<std::int64_t> counts;  // visit counts, index z + level

  std::int64_t local_time(std::int64_t z) const {
    const std::int64_t i = z + level;
    if (i < 0 || i >= static_cast<std::int64_t>(counts.size())) return 0;
    return counts[static_cast<std::size_t>(i)];
  }
  std::int64_t origin_local_time() const { return local_time(0); }
  std::int64_t max_local_time() const {
    std::int64_t m = 0;
    for (auto c : counts) m = std::max(m, c);
    return m;
  }
};

/// Run the embedded simple random walk until |position| reaches l,
/// recording every visit count along the way.
inline SrwExcursion srw_excursion(std::int64_t l, rng::Stream& stream) {
  if (l < 1) throw std::invalid_argument("srw_excursion: need l >= 1");
  SrwExcursion ex;
  ex.level = l;
  ex.counts.assign(static_cast<std::size_t>(2 * l + 1), 0);
  rng::StepStream steps(stream);
  std::int64_t pos = 0;
  while (true) {
    ex.counts[static_cast<std::size_t>(pos + l)] += 1;
    pos += steps.next_step();
    ++ex.exit_step;
    if (pos >= l || pos <= -l) break;
  }
  ex.final_site = pos;
  return ex;
}

struct WindowPathResult {
  bool escaped = false;
  std::int64_t position = 0;   // final site when not escaped
  double escape_time = 0.0;    // set when escaped
};

/// Trap walk on a finite window with absorbing outer boundary, for direct
/// comparison against the absorbing pmf oracle on the same object.
inline WindowPathResult simulate_on_window(const Window& w, std::int64_t start, double t,
                                           rng::Stream& stream,
                                           std::int64_t jump_budget = 1000000000) {
  if (!(t >= 0.0)) throw std::invalid_argument("simulate_on_window: bad t");
  auto i = static_cast<std::int64_t>(w.index_of(start));
  const auto n = static_cast<std::int64_t>(w.size());
  detail::Clock clock;
  std::int64_t jumps = 0;
  while (true) {
    const double hold =
        std::exp(w.log_sigma[static_cast<std::size_t>(i)]) * stream.next_exponential();
    if (!(clock.value() + hold <= t)) {
      return {false, w.lo + i, 0.0};
    }
    clock.add(hold);
    if (++jumps > jump_budget)
      throw BudgetError("simulate_on_window: jump budget exhausted", jumps);
    i += stream.next_bool() ? 1 : -1;
    if (i < 0 || i >= n) return {true, 0, clock.value()};
  }
}

inline void path_csv(const PathRecord& rec, std::ostream& os) {
  os << "step,site,hold_time\n";
  os.precision(17);
  for (std::size_t i = 0; i < rec.jump_sites.size(); ++i) {
    os << i << "," << rec.jump_sites[i] << ",";
    if (i < rec.hold_times.size()) os << rec.hold_times[i];
    os << "\n";
  }
}

inline std::string path_summary_json(const PathRecord& rec) {
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string("null");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return std::string(buf);
  };
  std::string ybar = rec.first_gamma_site
                         ? std::to_string(*rec.first_gamma_site)
                         : std::string("null");
  return "{\"tau1\": " + opt(rec.tau1) + ", \"tau2\": " + opt(rec.tau2) +
         ", \"ybar\": " + ybar + ", \"x_t\": " + std::to_string(rec.position_at_t) + "}";
}

}  // namespace btm
