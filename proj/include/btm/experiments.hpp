#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "btm/errors.hpp"
#include "btm/extremes.hpp"
#include "btm/fixtures.hpp"
#include "btm/frame.hpp"
#include "btm/landscape.hpp"
#include "btm/ode.hpp"
#include "btm/pmf.hpp"
#include "btm/rng.hpp"
#include "btm/scaling.hpp"
#include "btm/stats.hpp"
#include "btm/tail.hpp"
#include "btm/walker.hpp"

namespace btm {

enum class Scenario { Localise, SplitLaw, GammaScaling, Events, Extremes, PmfCrossCheck };

inline std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Localise: return "localise";
    case Scenario::SplitLaw: return "split-law";
    case Scenario::GammaScaling: return "gamma-scaling";
    case Scenario::Events: return "events";
    case Scenario::Extremes: return "extremes";
    case Scenario::PmfCrossCheck: return "pmf-check";
  }
  throw std::logic_error("scenario_name: bad enum");
}

inline Scenario scenario_from_name(const std::string& name) {
  for (auto s : {Scenario::Localise, Scenario::SplitLaw, Scenario::GammaScaling,
                 Scenario::Events, Scenario::Extremes, Scenario::PmfCrossCheck})
    if (scenario_name(s) == name) return s;
  throw std::invalid_argument("unknown scenario: " + name);
}

struct ExperimentConfig {
  Scenario scenario = Scenario::Localise;
  std::string family = "exp_sqrt_log";
  double beta = 1.0;
  std::vector<double> ts;
  std::int64_t landscapes = 200;
  std::int64_t paths = 0;       // Monte Carlo paths per landscape (0 = oracle only)
  std::int64_t trials = 2000;   // exceedence-bound trials per t
  std::int64_t law_trials = 10000;
  double level_L = 50.0;        // target L(l) for the first-exceedence law
  std::int64_t panels = 1000;
  std::int64_t panel_n = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
  double window_tol = 1e-4;     // escaped-mass validation threshold
  double pmf_tol = 1e-10;

  TailFunction tail() const { return TailFunction::parse(family, beta); }

  static ExperimentConfig defaults(Scenario s) {
    ExperimentConfig c;
    c.scenario = s;
    switch (s) {
      case Scenario::Localise:
      case Scenario::SplitLaw:
        c.family = "exp_sqrt_log";
        c.ts = {1e3, 1e4, 1e5, 1e6};
        c.landscapes = 200;
        break;
      case Scenario::GammaScaling:
        c.family = "log";
        c.ts = {1e6};
        c.landscapes = 20000;
        break;
      case Scenario::Events:
        c.family = "exp_sqrt_log";
        c.ts = {1e4, 1e6, 1e8};
        c.landscapes = 1000;
        break;
      case Scenario::Extremes:
        c.family = "log";
        c.ts = {1e3, 1e6, 1e9, 1e12};
        break;
      case Scenario::PmfCrossCheck:
        c.ts = {1.0, 10.0, 50.0};
        break;
    }
    return c;
  }

  void set(const std::string& key, const std::string& value) {
    if (key == "family") family = value;
    else if (key == "beta") beta = std::stod(value);
    else if (key == "t") {
      ts.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) ts.push_back(std::stod(item));
    }
    else if (key == "landscapes") landscapes = std::stoll(value);
    else if (key == "paths") paths = std::stoll(value);
    else if (key == "trials") trials = std::stoll(value);
    else if (key == "law_trials") law_trials = std::stoll(value);
    else if (key == "level_L") level_L = std::stod(value);
    else if (key == "panels") panels = std::stoll(value);
    else if (key == "panel_n") panel_n = std::stoll(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "threads") threads = std::stoi(value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "window_tol") window_tol = std::stod(value);
    else if (key == "pmf_tol") pmf_tol = std::stod(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  void apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      auto notspace = [](unsigned char c) { return !std::isspace(c); };
      line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
      line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                    " is not key = value");
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
      value.erase(value.begin(), std::find_if(value.begin(), value.end(), notspace));
      set(key, value);
    }
  }

  void validate() const {
    tail();  // throws on a bad family/beta pair
    if (ts.empty()) throw std::invalid_argument("config: need at least one t");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!(ts[i] > 0.0)) throw std::invalid_argument("config: t must be > 0");
      if (i > 0 && !(ts[i] > ts[i - 1]))
        throw std::invalid_argument("config: t values must strictly increase");
    }
    if (landscapes < 1 || trials < 1 || law_trials < 1 || panels < 1 || panel_n < 1)
      throw std::invalid_argument("config: counts must be >= 1");
    if (paths < 0) throw std::invalid_argument("config: paths must be >= 0");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (!(window_tol > 0.0 && window_tol < 1.0))
      throw std::invalid_argument("config: window_tol must be in (0,1)");
  }

  nlohmann::json echo() const {
    return {{"scenario", scenario_name(scenario)}, {"family", family},
            {"beta", beta},           {"t", ts},
            {"landscapes", landscapes}, {"paths", paths},
            {"trials", trials},       {"law_trials", law_trials},
            {"level_L", level_L},     {"panels", panels},
            {"panel_n", panel_n},     {"seed", seed},
            {"threads", threads},     {"out_dir", out_dir},
            {"window_tol", window_tol}, {"pmf_tol", pmf_tol}};
  }
};

struct SummaryRow {
  std::string scenario;
  std::string stat;
  double t = std::numeric_limits<double>::quiet_NaN();  // scale of the row
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  std::int64_t n = 0;
  double ks = std::numeric_limits<double>::quiet_NaN();
  double chi2_p = std::numeric_limits<double>::quiet_NaN();
};

inline std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "scenario,stat,t,estimate,lo,hi,n,ks,chi2_p\n";
  for (const auto& r : rows)
    os << r.scenario << ',' << r.stat << ',' << csv_num(r.t) << ','
       << csv_num(r.estimate) << ',' << csv_num(r.lo) << ',' << csv_num(r.hi)
       << ',' << r.n << ',' << csv_num(r.ks) << ',' << csv_num(r.chi2_p) << '\n';
}

struct ScenarioResult {
  std::vector<SummaryRow> summary;
  std::string detail_header;
  std::vector<std::string> detail_rows;
  nlohmann::json diagnostics = nlohmann::json::object();
  std::vector<std::string> notes;
  bool ok = true;

  void fail(const std::string& note) {
    ok = false;
    notes.push_back(note);
  }
};

/// Runs body(i) for i in [0, n); work is claimed through an atomic counter and
/// every result must go to a slot owned by i, so the output is independent of
/// the thread count.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& body) {
  if (threads <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<std::int64_t>(threads, n));
  pool.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct MedianSummary {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Median with a distribution-free order-statistic interval at the Wilson
/// coverage for a proportion of 1/2.
inline MedianSummary median_with_ci(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median_with_ci: empty");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  const auto w = stats::wilson(static_cast<std::int64_t>(n / 2),
                               static_cast<std::int64_t>(n));
  auto at = [&](double q) {
    auto k = static_cast<std::size_t>(q * double(n));
    if (k >= n) k = n - 1;
    return v[k];
  };
  return {v[n / 2], at(w.lo), at(w.hi)};
}

inline std::uint64_t landscape_seed(std::uint64_t master, std::int64_t i) {
  return rng::Stream::derive(master, {rng::kLandscapeSalt, std::uint64_t(i)}).next_u64();
}

inline std::uint64_t subtask_seed(std::uint64_t master, std::uint64_t tag) {
  return rng::Stream::derive(master, {rng::kScenarioSalt, tag}).next_u64();
}

struct GammaOracle {
  bool ok = false;
  double p_z1 = 0.0;
  double p_z2 = 0.0;
  double escaped = 0.0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Absorbing-window occupation probabilities of the two deep sites, on a
/// window grown until the escaped-mass bound clears window_tol.
template <class Field>
GammaOracle gamma_pmf_oracle(const Field& field, const LocalisationFrame& f,
                             double t, double window_tol, double pmf_tol) {
  const auto base = static_cast<std::int64_t>(std::ceil(f.r)) + 1;
  for (std::int64_t pad = 8 * base; pad <= 256 * base; pad *= 2) {
    const auto w = Window::from_field(field, f.z2 - pad, f.z1 + pad);
    const auto pmf = pmf_at_time(w, 0, t, Boundary::Absorbing, pmf_tol);
    if (pmf.escaped_mass_bound < window_tol) {
      GammaOracle out;
      out.ok = true;
      out.p_z1 = pmf.p(f.z1);
      out.p_z2 = pmf.p(f.z2);
      out.escaped = pmf.escaped_mass_bound;
      out.lo = w.lo;
      out.hi = w.hi();
      return out;
    }
  }
  return {};
}

namespace detail {

struct OracleCell {
  bool excluded = true;
  std::int64_t z1 = 0;
  std::int64_t z2 = 0;
  double p_z1 = 0.0;
  double p_z2 = 0.0;
  double escaped = 0.0;
  double mc_freq = std::numeric_limits<double>::quiet_NaN();
  bool mc_within = true;
};

template <class PerCell>
void oracle_landscape_scan(const ExperimentConfig& cfg, const TailFunction& tail,
                           double t, std::size_t t_idx,
                           std::vector<OracleCell>& cells, PerCell&& per_cell) {
  cells.assign(static_cast<std::size_t>(cfg.landscapes), OracleCell{});
  parallel_for(cfg.landscapes, cfg.threads, [&](std::int64_t i) {
    Landscape land(tail, landscape_seed(cfg.seed, i));
    const auto f = localisation_frame(land, t);
    auto& cell = cells[static_cast<std::size_t>(i)];
    cell.z1 = f.z1;
    cell.z2 = f.z2;
    const auto orc = gamma_pmf_oracle(land, f, t, cfg.window_tol, cfg.pmf_tol);
    if (!orc.ok) return;  // stays excluded
    cell.excluded = false;
    cell.p_z1 = orc.p_z1;
    cell.p_z2 = orc.p_z2;
    cell.escaped = orc.escaped;
    per_cell(land, f, cell, i, t_idx);
  });
}

}  // namespace detail

inline ScenarioResult run_localise(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto tail = cfg.tail();
  ScenarioResult res;
  res.detail_header = "t,landscape,z1,z2,p_z1,p_z2,p_gamma,escaped,excluded,mc_freq";
  auto medians = nlohmann::json::array();

  for (std::size_t t_idx = 0; t_idx < cfg.ts.size(); ++t_idx) {
    const double t = cfg.ts[t_idx];
    std::vector<detail::OracleCell> cells;
    detail::oracle_landscape_scan(
        cfg, tail, t, t_idx, cells,
        [&](const Landscape& land, const LocalisationFrame& f,
            detail::OracleCell& cell, std::int64_t i, std::size_t ti) {
          if (cfg.paths <= 0) return;
          std::int64_t hits = 0;
          for (std::int64_t j = 0; j < cfg.paths; ++j) {
            auto s = rng::Stream::derive(
                cfg.seed, {rng::kPathSalt, std::uint64_t(i), std::uint64_t(j),
                           std::uint64_t(ti)});
            const auto rec = simulate_to_time(land, t, f, s);
            if (rec.position_at_t == f.z1 || rec.position_at_t == f.z2) ++hits;
          }
          cell.mc_freq = double(hits) / double(cfg.paths);
          const double p = cell.p_z1 + cell.p_z2;
          const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / double(cfg.paths));
          cell.mc_within = std::abs(cell.mc_freq - p) <= 3.0 * se;
        });

    std::vector<double> ps;
    std::int64_t excluded = 0, above_half = 0, above_ninety = 0, mc_ok = 0, mc_n = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      const double blank = std::numeric_limits<double>::quiet_NaN();
      char line[256];
      std::snprintf(line, sizeof line, "%s,%lld,%lld,%lld,%s,%s,%s,%s,%d,%s",
                    csv_num(t).c_str(), static_cast<long long>(i),
                    static_cast<long long>(c.z1), static_cast<long long>(c.z2),
                    csv_num(c.excluded ? blank : c.p_z1).c_str(),
                    csv_num(c.excluded ? blank : c.p_z2).c_str(),
                    csv_num(c.excluded ? blank : c.p_z1 + c.p_z2).c_str(),
                    csv_num(c.excluded ? blank : c.escaped).c_str(),
                    c.excluded ? 1 : 0, csv_num(c.mc_freq).c_str());
      res.detail_rows.emplace_back(line);
      if (c.excluded) {
        ++excluded;
        continue;
      }
      const double p = c.p_z1 + c.p_z2;
      ps.push_back(p);
      if (p > 0.5) ++above_half;
      if (p > 0.9) ++above_ninety;
      if (!std::isnan(c.mc_freq)) {
        ++mc_n;
        if (c.mc_within) ++mc_ok;
      }
    }
    if (excluded * 20 > cfg.landscapes)
      res.fail("localise: more than 5% of landscapes excluded at t=" + csv_num(t));
    if (ps.empty()) {
      res.fail("localise: no landscape validated at t=" + csv_num(t));
      continue;
    }

    const auto med = median_with_ci(ps);
    medians.push_back({{"t", t}, {"median", med.median}});
    const auto n_inc = static_cast<std::int64_t>(ps.size());
    res.summary.push_back({.scenario = "localise", .stat = "median_p_gamma",
                           .t = t, .estimate = med.median, .lo = med.lo,
                           .hi = med.hi, .n = n_inc});
    const auto w5 = stats::wilson(above_half, n_inc);
    res.summary.push_back({.scenario = "localise", .stat = "frac_p_above_0.5",
                           .t = t, .estimate = double(above_half) / double(n_inc),
                           .lo = w5.lo, .hi = w5.hi, .n = n_inc});
    const auto w9 = stats::wilson(above_ninety, n_inc);
    res.summary.push_back({.scenario = "localise", .stat = "frac_p_above_0.9",
                           .t = t, .estimate = double(above_ninety) / double(n_inc),
                           .lo = w9.lo, .hi = w9.hi, .n = n_inc});
    if (mc_n > 0) {
      const auto wm = stats::wilson(mc_ok, mc_n);
      res.summary.push_back({.scenario = "localise", .stat = "mc_within_3se",
                             .t = t, .estimate = double(mc_ok) / double(mc_n),
                             .lo = wm.lo, .hi = wm.hi, .n = mc_n});
      if (mc_ok * 10 < mc_n * 9)
        res.fail("localise: Monte Carlo disagrees with the oracle at t=" + csv_num(t));
    }
  }
  res.diagnostics["medians"] = medians;
  return res;
}

inline ScenarioResult run_split_law(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto tail = cfg.tail();
  ScenarioResult res;
  res.detail_header = "t,landscape,z1,z2,p_z1,split_term,deviation,excluded";

  for (std::size_t t_idx = 0; t_idx < cfg.ts.size(); ++t_idx) {
    const double t = cfg.ts[t_idx];
    std::vector<detail::OracleCell> cells;
    detail::oracle_landscape_scan(cfg, tail, t, t_idx, cells,
                                  [](const Landscape&, const LocalisationFrame&,
                                     detail::OracleCell&, std::int64_t,
                                     std::size_t) {});

    std::vector<double> deviations, p1s;
    std::int64_t excluded = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      const double split_term = double(c.z1) / double(c.z1 - c.z2);
      const double dev = std::abs(c.p_z1 + split_term - 1.0);
      const double blank = std::numeric_limits<double>::quiet_NaN();
      char line[256];
      std::snprintf(line, sizeof line, "%s,%lld,%lld,%lld,%s,%s,%s,%d",
                    csv_num(t).c_str(), static_cast<long long>(i),
                    static_cast<long long>(c.z1), static_cast<long long>(c.z2),
                    csv_num(c.excluded ? blank : c.p_z1).c_str(),
                    csv_num(split_term).c_str(),
                    csv_num(c.excluded ? blank : dev).c_str(),
                    c.excluded ? 1 : 0);
      res.detail_rows.emplace_back(line);
      if (c.excluded) {
        ++excluded;
        continue;
      }
      deviations.push_back(dev);
      p1s.push_back(c.p_z1);
    }
    if (excluded * 20 > cfg.landscapes)
      res.fail("split-law: more than 5% of landscapes excluded at t=" + csv_num(t));
    if (deviations.empty()) {
      res.fail("split-law: no landscape validated at t=" + csv_num(t));
      continue;
    }

    const auto med = median_with_ci(deviations);
    const auto n_inc = static_cast<std::int64_t>(deviations.size());
    res.summary.push_back({.scenario = "split-law", .stat = "median_abs_dev",
                           .t = t, .estimate = med.median, .lo = med.lo,
                           .hi = med.hi, .n = n_inc});
    const double ks = stats::ks_statistic(
        p1s, [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); });
    res.summary.push_back({.scenario = "split-law", .stat = "ks_uniform_p1",
                           .t = t, .estimate = ks, .lo = ks, .hi = ks,
                           .n = n_inc, .ks = ks});
  }
  return res;
}

inline ScenarioResult run_gamma_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.landscapes < 10000)
    throw std::invalid_argument("gamma-scaling: need landscapes >= 10000");
  const auto tail = cfg.tail();
  ScenarioResult res;
  res.detail_header = "t,landscape,z1,z2";

  for (std::size_t t_idx = 0; t_idx < cfg.ts.size(); ++t_idx) {
    const double t = cfg.ts[t_idx];
    const double r = tail.eval(tail.level(t).value);
    std::vector<std::int64_t> z1(static_cast<std::size_t>(cfg.landscapes));
    std::vector<std::int64_t> z2(static_cast<std::size_t>(cfg.landscapes));
    parallel_for(cfg.landscapes, cfg.threads, [&](std::int64_t i) {
      Landscape land(tail, landscape_seed(cfg.seed, i));
      const auto f = localisation_frame(land, t);
      z1[static_cast<std::size_t>(i)] = f.z1;
      z2[static_cast<std::size_t>(i)] = f.z2;
    });

    std::vector<std::int64_t> z2_shift;
    std::vector<double> x, y;
    z2_shift.reserve(z1.size());
    x.reserve(z1.size());
    y.reserve(z1.size());
    for (std::size_t i = 0; i < z1.size(); ++i) {
      char line[128];
      std::snprintf(line, sizeof line, "%s,%lld,%lld,%lld", csv_num(t).c_str(),
                    static_cast<long long>(i), static_cast<long long>(z1[i]),
                    static_cast<long long>(z2[i]));
      res.detail_rows.emplace_back(line);
      z2_shift.push_back(1 - z2[i]);
      x.push_back(double(z1[i]) / r);
      y.push_back(double(-z2[i]) / r);
    }

    const auto n = static_cast<std::int64_t>(z1.size());
    const auto chi1 = stats::chi2_gof_geometric(z1, 1.0 / r);
    const auto chi2 = stats::chi2_gof_geometric(z2_shift, 1.0 / r);
    auto exp_cdf = [](double v) { return v <= 0.0 ? 0.0 : 1.0 - std::exp(-v); };
    const double ks1 = stats::ks_statistic(x, exp_cdf);
    const double ks2 = stats::ks_statistic(y, exp_cdf);
    const auto indep = stats::chi2_independence(x, y, 4);
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    const double se = std::sqrt((1.0 - 1.0 / r) / double(n));

    res.summary.push_back({.scenario = "gamma-scaling", .stat = "chi2_p_z1",
                           .t = t, .estimate = chi1.p_value, .lo = chi1.p_value,
                           .hi = chi1.p_value, .n = n, .chi2_p = chi1.p_value});
    res.summary.push_back({.scenario = "gamma-scaling", .stat = "chi2_p_z2shift",
                           .t = t, .estimate = chi2.p_value, .lo = chi2.p_value,
                           .hi = chi2.p_value, .n = n, .chi2_p = chi2.p_value});
    res.summary.push_back({.scenario = "gamma-scaling", .stat = "ks_exp_z1",
                           .t = t, .estimate = ks1, .lo = ks1, .hi = ks1, .n = n,
                           .ks = ks1});
    res.summary.push_back({.scenario = "gamma-scaling", .stat = "ks_exp_z2",
                           .t = t, .estimate = ks2, .lo = ks2, .hi = ks2, .n = n,
                           .ks = ks2});
    res.summary.push_back({.scenario = "gamma-scaling", .stat = "indep_chi2_p",
                           .t = t, .estimate = indep.p_value, .lo = indep.p_value,
                           .hi = indep.p_value, .n = n, .chi2_p = indep.p_value});
    res.summary.push_back({.scenario = "gamma-scaling", .stat = "mean_z1_over_r",
                           .t = t, .estimate = mean_x, .lo = mean_x - 3.0 * se,
                           .hi = mean_x + 3.0 * se, .n = n});

    if (!(chi1.p_value > 0.001))
      res.fail("gamma-scaling: z1 geometric fit rejected at t=" + csv_num(t));
    if (!(chi2.p_value > 0.001))
      res.fail("gamma-scaling: z2 geometric fit rejected at t=" + csv_num(t));
    if (!(indep.p_value > 0.001))
      res.fail("gamma-scaling: independence rejected at t=" + csv_num(t));
    if (r >= 30.0 && !(ks1 < 0.05))
      res.fail("gamma-scaling: exponential KS too large at t=" + csv_num(t));
  }
  return res;
}

inline ScenarioResult run_events(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto tail = cfg.tail();
  ScenarioResult res;
  res.detail_header = "t,landscape,z1,z2,event_a,event_b,event_c,origin_excluded";
  auto excluded_t = nlohmann::json::array();
  int included = 0;

  for (std::size_t t_idx = 0; t_idx < cfg.ts.size(); ++t_idx) {
    const double t = cfg.ts[t_idx];
    Scaling scl;
    try {
      scl = scaling_function(tail, t);
    } catch (const PreAsymptoticError& e) {
      excluded_t.push_back({{"t", t}, {"r", e.r()}, {"reason", e.what()}});
      res.notes.push_back("events: t=" + csv_num(t) + " excluded: " + e.what());
      continue;
    }
    ++included;

    struct Flags {
      bool a = false, b = false, c = false, origin = false;
      std::int64_t z1 = 0, z2 = 0;
    };
    std::vector<Flags> flags(static_cast<std::size_t>(cfg.landscapes));
    parallel_for(cfg.landscapes, cfg.threads, [&](std::int64_t i) {
      Landscape land(tail, landscape_seed(cfg.seed, i));
      const auto f = localisation_frame(land, t, scl);
      auto& fl = flags[static_cast<std::size_t>(i)];
      fl.a = *f.event_a;
      fl.b = *f.event_b;
      fl.c = *f.event_c;
      const double radius = f.r / *f.h;
      fl.origin = double(f.z1) >= radius && double(-f.z2) >= radius;
      fl.z1 = f.z1;
      fl.z2 = f.z2;
    });

    std::int64_t na = 0, nb = 0, nc = 0, njoint = 0, norigin = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
      const auto& fl = flags[i];
      char line[160];
      std::snprintf(line, sizeof line, "%s,%lld,%lld,%lld,%d,%d,%d,%d",
                    csv_num(t).c_str(), static_cast<long long>(i),
                    static_cast<long long>(fl.z1), static_cast<long long>(fl.z2),
                    fl.a ? 1 : 0, fl.b ? 1 : 0, fl.c ? 1 : 0, fl.origin ? 1 : 0);
      res.detail_rows.emplace_back(line);
      na += fl.a;
      nb += fl.b;
      nc += fl.c;
      njoint += fl.a && fl.b && fl.c;
      norigin += fl.origin;
    }

    const auto n = cfg.landscapes;
    auto push = [&](const char* stat, std::int64_t c) {
      const auto w = stats::wilson(c, n);
      res.summary.push_back({.scenario = "events", .stat = stat, .t = t,
                             .estimate = double(c) / double(n), .lo = w.lo,
                             .hi = w.hi, .n = n});
    };
    push("p_a", na);
    push("p_b", nb);
    push("p_c", nc);
    push("p_joint", njoint);
    push("origin_excluded", norigin);
  }

  res.diagnostics["excluded_t"] = excluded_t;
  if (included == 0) res.fail("events: every t was pre-asymptotic");
  return res;
}

inline ScenarioResult run_extremes(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto tail = cfg.tail();
  ScenarioResult res;
  res.detail_header = "trial,n_l,s_l,exceedence,sbar";

  // exact first-exceedence law at L(l) = level_L
  const auto level = tail.sample(1.0 / cfg.level_L);
  if (!std::isfinite(level.value()))
    throw std::invalid_argument("extremes: level_L out of range for this family");
  const auto law = first_exceedence_law(tail, level.value(), cfg.law_trials,
                                        subtask_seed(cfg.seed, 1));
  const auto chi = stats::chi2_gof_geometric(law.n_l, 1.0 / law.L_level);
  const double bound = stats::geom_exp_ks_bound(law.L_level);
  const double mean_ratio =
      std::accumulate(law.ratios.begin(), law.ratios.end(), 0.0) /
      double(law.ratios.size());
  const double mean_se = std::sqrt((1.0 - 1.0 / law.L_level) / double(cfg.law_trials));
  res.summary.push_back({.scenario = "extremes", .stat = "law_ks_exp1",
                         .t = law.L_level, .estimate = law.ks_exp1,
                         .lo = law.ks_exp1, .hi = law.ks_exp1,
                         .n = cfg.law_trials, .ks = law.ks_exp1});
  res.summary.push_back({.scenario = "extremes", .stat = "law_ks_bound",
                         .t = law.L_level, .estimate = bound + 0.01,
                         .lo = bound + 0.01, .hi = bound + 0.01,
                         .n = cfg.law_trials});
  res.summary.push_back({.scenario = "extremes", .stat = "law_chi2_p",
                         .t = law.L_level, .estimate = chi.p_value,
                         .lo = chi.p_value, .hi = chi.p_value,
                         .n = cfg.law_trials, .chi2_p = chi.p_value});
  res.summary.push_back({.scenario = "extremes", .stat = "law_mean_ratio",
                         .t = law.L_level, .estimate = mean_ratio,
                         .lo = mean_ratio - 3.0 * mean_se,
                         .hi = mean_ratio + 3.0 * mean_se, .n = cfg.law_trials});
  if (!(law.ks_exp1 <= bound + 0.01))
    res.fail("extremes: exceedence KS exceeds the analytic bound");
  if (!(chi.p_value > 0.01)) res.fail("extremes: geometric law rejected");
  if (!(std::abs(mean_ratio - 1.0) <= 3.0 * mean_se))
    res.fail("extremes: mean exceedence index off");

  // sum/max panels across three decades
  std::vector<double> gap_medians, ratio_medians;
  for (std::int64_t n : {cfg.panel_n / 100, cfg.panel_n / 10, cfg.panel_n}) {
    if (n < 100) throw std::invalid_argument("extremes: panel_n must be >= 10000");
    std::vector<double> gaps(static_cast<std::size_t>(cfg.panels));
    std::vector<double> ratios(static_cast<std::size_t>(cfg.panels));
    const std::vector<double> grid = {0.25, 0.5, 0.75, 1.0};
    parallel_for(cfg.panels, cfg.threads, [&](std::int64_t i) {
      auto s = rng::Stream::derive(cfg.seed, {rng::kPanelSalt, std::uint64_t(n),
                                              std::uint64_t(i)});
      const auto panel = SequencePanel::generate(tail, n, s);
      gaps[static_cast<std::size_t>(i)] = sum_max_gap(tail, panel, n, grid);
      ratios[static_cast<std::size_t>(i)] =
          std::exp(panel.S.back().log() - panel.M.back().log());
    });
    const auto gm = median_with_ci(gaps);
    const auto rm = median_with_ci(ratios);
    gap_medians.push_back(gm.median);
    ratio_medians.push_back(rm.median);
    res.summary.push_back({.scenario = "extremes", .stat = "median_gap",
                           .t = double(n), .estimate = gm.median, .lo = gm.lo,
                           .hi = gm.hi, .n = cfg.panels});
    res.summary.push_back({.scenario = "extremes", .stat = "median_sum_over_max",
                           .t = double(n), .estimate = rm.median, .lo = rm.lo,
                           .hi = rm.hi, .n = cfg.panels});
  }
  for (std::size_t i = 1; i < gap_medians.size(); ++i) {
    if (gap_medians[i] > gap_medians[i - 1])
      res.fail("extremes: gap median grew with the panel length");
    if (ratio_medians[i] > ratio_medians[i - 1])
      res.fail("extremes: sum/max median grew with the panel length");
  }
  if (!(ratio_medians.back() >= 1.0 && ratio_medians.back() <= 1.1))
    res.fail("extremes: sum/max median outside [1, 1.1]");

  // exceedence inequalities at level ell_t
  auto excluded_t = nlohmann::json::array();
  double detail_t = 0.0;
  std::uint64_t detail_seed = 0;
  std::int64_t detail_trials = 0;
  double detail_radius = 0.0;
  double detail_level = 0.0;
  for (std::size_t t_idx = 0; t_idx < cfg.ts.size(); ++t_idx) {
    const double t = cfg.ts[t_idx];
    Scaling scl;
    try {
      scl = scaling_function(tail, t);
    } catch (const PreAsymptoticError& e) {
      excluded_t.push_back({{"t", t}, {"r", e.r()}, {"reason", e.what()}});
      res.notes.push_back("extremes: t=" + csv_num(t) + " excluded: " + e.what());
      continue;
    }
    const auto seed_t = subtask_seed(cfg.seed, 100 + t_idx);
    const auto b = exceedence_bounds(tail, t, scl.h, cfg.trials, seed_t);
    auto push = [&](const char* stat, std::int64_t c) {
      const auto w = stats::wilson(c, b.trials);
      res.summary.push_back({.scenario = "extremes", .stat = stat, .t = t,
                             .estimate = double(c) / double(b.trials),
                             .lo = w.lo, .hi = w.hi, .n = b.trials});
    };
    push("p_sum_half", b.n_sum_half);
    push("p_sum_full", b.n_sum_full);
    push("p_ex", b.n_ex);
    push("p_sbar", b.n_sbar);
    push("p_joint", b.n_joint);
    push("p_dominated", b.n_dominated);
    if (b.redraws * 20 > b.trials)
      res.fail("extremes: more than 5% of trials redrawn at t=" + csv_num(t));
    detail_t = t;
    detail_seed = seed_t;
    detail_trials = cfg.trials;
    detail_radius = b.r / b.h;
    detail_level = b.ell;
  }
  res.diagnostics["excluded_t"] = excluded_t;

  if (detail_trials > 0) {
    res.diagnostics["detail_t"] = detail_t;
    for (std::int64_t trial = 0; trial < detail_trials; ++trial) {
      const auto rec = exceedence_trial(tail, detail_level, detail_radius,
                                        detail_seed, std::uint64_t(trial));
      char line[200];
      std::snprintf(line, sizeof line, "%lld,%lld,%s,%s,%s",
                    static_cast<long long>(trial), static_cast<long long>(rec.n_l),
                    csv_num(rec.s_l.value()).c_str(),
                    csv_num(rec.exceed.value()).c_str(),
                    csv_num(rec.sbar.value()).c_str());
      res.detail_rows.emplace_back(line);
    }
  }

  // level asymptotics
  std::vector<double> grid = cfg.ts;
  if (grid.size() < 2 || !(grid.back() >= 1e4 * grid.front()))
    grid = {1e3, 1e6, 1e9, 1e12};
  try {
    const auto ratios = ell_asymptotic_check(tail, grid);
    for (std::size_t i = 0; i < ratios.size(); ++i)
      res.summary.push_back({.scenario = "extremes", .stat = "ell_ratio",
                             .t = grid[i], .estimate = ratios[i],
                             .lo = ratios[i], .hi = ratios[i], .n = 1});
  } catch (const std::runtime_error& e) {
    res.fail(std::string("extremes: ") + e.what());
  }
  return res;
}

inline ScenarioResult run_pmf_crosscheck(const ExperimentConfig& cfg) {
  cfg.validate();
  ScenarioResult res;
  res.detail_header = "z,p_unif,p_ode,abs_diff,p_mc";
  const auto w = fixtures::line21();
  const double t_mc = 50.0;

  for (double t : {1.0, 10.0, 50.0}) {
    const auto unif = pmf_at_time(w, 0, t, Boundary::Absorbing, 1e-12);
    const auto by_ode = pmf_by_ode(w, 0, t, Boundary::Absorbing);
    double maxdiff = std::abs(unif.escaped_mass_bound - by_ode.escaped_mass_bound);
    for (std::size_t i = 0; i < w.size(); ++i)
      maxdiff = std::max(maxdiff, std::abs(unif.mass[i] - by_ode.mass[i]));
    res.summary.push_back({.scenario = "pmf-check", .stat = "unif_ode_maxdiff",
                           .t = t, .estimate = maxdiff, .lo = maxdiff,
                           .hi = maxdiff,
                           .n = static_cast<std::int64_t>(w.size())});
    if (!(maxdiff < 1e-8))
      res.fail("pmf-check: uniformization and ODE disagree at t=" + csv_num(t));
  }

  // point mass at t = 0 for both the oracle and the walker
  {
    const auto unif = pmf_at_time(w, 0, 0.0, Boundary::Absorbing, 1e-12);
    std::vector<double> mc(w.size() + 1, 0.0);
    auto s = rng::Stream::derive(cfg.seed, {rng::kPathSalt, 999});
    const auto one = simulate_on_window(w, 0, 0.0, s);
    mc[one.escaped ? w.size() : w.index_of(one.position)] = 1.0;
    auto ref = unif.mass;
    ref.push_back(unif.escaped_mass_bound);
    const double tv0 = stats::total_variation(mc, ref);
    res.summary.push_back({.scenario = "pmf-check", .stat = "tv_t0", .t = 0.0,
                           .estimate = tv0, .lo = tv0, .hi = tv0, .n = 1});
    if (tv0 != 0.0) res.fail("pmf-check: t=0 is not a point mass");
  }

  const auto oracle = pmf_at_time(w, 0, t_mc, Boundary::Absorbing, 1e-12);
  std::vector<double> ref = oracle.mass;
  ref.push_back(oracle.escaped_mass_bound);
  const auto ode = pmf_by_ode(w, 0, t_mc, Boundary::Absorbing);

  std::vector<double> sizes, tvs;
  std::vector<double> big_hist;
  for (std::size_t k = 0; k < 3; ++k) {
    std::int64_t paths = 1000;
    for (std::size_t q = 0; q < k; ++q) paths *= 10;
    std::vector<std::int32_t> slot(static_cast<std::size_t>(paths));
    parallel_for(paths, cfg.threads, [&](std::int64_t j) {
      auto s = rng::Stream::derive(cfg.seed,
                                   {rng::kPathSalt, std::uint64_t(k), std::uint64_t(j)});
      const auto r = simulate_on_window(w, 0, t_mc, s);
      slot[static_cast<std::size_t>(j)] =
          r.escaped ? std::int32_t(w.size())
                    : std::int32_t(w.index_of(r.position));
    });
    std::vector<double> hist(w.size() + 1, 0.0);
    for (auto idx : slot) hist[static_cast<std::size_t>(idx)] += 1.0 / double(paths);
    const double tv = stats::total_variation(hist, ref);
    sizes.push_back(double(paths));
    tvs.push_back(tv);
    res.summary.push_back({.scenario = "pmf-check", .stat = "tv_mc", .t = t_mc,
                           .estimate = tv, .lo = tv, .hi = tv, .n = paths});
    if (k == 2) big_hist = hist;
  }
  if (!(tvs.back() < 0.02))
    res.fail("pmf-check: Monte Carlo total variation too large");
  const double slope = stats::log_log_slope(sizes, tvs);
  res.summary.push_back({.scenario = "pmf-check", .stat = "tv_slope", .t = t_mc,
                         .estimate = slope, .lo = slope, .hi = slope,
                         .n = static_cast<std::int64_t>(sizes.size())});
  if (!(slope > -0.65 && slope < -0.35))
    res.fail("pmf-check: total variation does not shrink like root n");

  for (std::size_t i = 0; i < w.size(); ++i) {
    char line[200];
    std::snprintf(line, sizeof line, "%lld,%s,%s,%s,%s",
                  static_cast<long long>(w.lo + std::int64_t(i)),
                  csv_num(oracle.mass[i]).c_str(), csv_num(ode.mass[i]).c_str(),
                  csv_num(std::abs(oracle.mass[i] - ode.mass[i])).c_str(),
                  csv_num(big_hist[i]).c_str());
    res.detail_rows.emplace_back(line);
  }
  char esc[200];
  std::snprintf(esc, sizeof esc, "escaped,%s,%s,%s,%s",
                csv_num(oracle.escaped_mass_bound).c_str(),
                csv_num(ode.escaped_mass_bound).c_str(),
                csv_num(std::abs(oracle.escaped_mass_bound -
                                 ode.escaped_mass_bound)).c_str(),
                csv_num(big_hist.back()).c_str());
  res.detail_rows.emplace_back(esc);
  return res;
}

inline ScenarioResult run_scenario(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::Localise: return run_localise(cfg);
    case Scenario::SplitLaw: return run_split_law(cfg);
    case Scenario::GammaScaling: return run_gamma_scaling(cfg);
    case Scenario::Events: return run_events(cfg);
    case Scenario::Extremes: return run_extremes(cfg);
    case Scenario::PmfCrossCheck: return run_pmf_crosscheck(cfg);
  }
  throw std::logic_error("run_scenario: bad enum");
}

inline void write_outputs(const ExperimentConfig& cfg, const ScenarioResult& res,
                          double wall_seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  std::ofstream summary(fs::path(cfg.out_dir) / "summary.csv");
  write_summary_csv(summary, res.summary);

  std::ofstream detail(fs::path(cfg.out_dir) / "detail.csv");
  detail << res.detail_header << '\n';
  for (const auto& row : res.detail_rows) detail << row << '\n';

  nlohmann::json meta;
  meta["scenario"] = scenario_name(cfg.scenario);
  meta["config"] = cfg.echo();
  meta["versions"] = {{"btm_lab", "0.1.0"}};
  meta["wall_clock_seconds"] = wall_seconds;
  meta["ok"] = res.ok;
  meta["notes"] = res.notes;
  meta["diagnostics"] = res.diagnostics;
  std::ofstream mf(fs::path(cfg.out_dir) / "meta.json");
  mf << meta.dump(2) << '\n';
}

}  // namespace btm
