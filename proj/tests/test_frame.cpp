#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "btm/frame.hpp"
#include "btm/stats.hpp"

using btm::Landscape;
using btm::LogReal;
using btm::TailFunction;
using btm::localisation_frame;
using Catch::Approx;

namespace {

// explicit trap field for handcrafted scenarios
struct MapField {
  TailFunction tail_fn;
  std::map<std::int64_t, double> depths;
  const TailFunction& tail() const { return tail_fn; }
  LogReal sigma(std::int64_t z) const { return LogReal::from_value(depths.at(z)); }
};

}  // namespace

TEST_CASE("first-exceedence picks the nearest deep site per side", "[frame]") {
  auto tail = TailFunction::log();
  const double t = 100.0;
  const double ell = tail.level(t).value;
  MapField field{tail, {{1, ell + 1.0}, {0, ell * 0.5}, {-1, ell + 2.0}}};

  auto f = localisation_frame(field, t);
  CHECK(f.z1 == 1);
  CHECK(f.z2 == -1);
  CHECK(f.d == 1);
  CHECK(f.S.value() == Approx(ell * 0.5));
  CHECK(f.m.value() == Approx(ell + 1.0));
  CHECK(f.sigma_z1.value() == Approx(ell + 1.0));
  CHECK(f.sigma_z2.value() == Approx(ell + 2.0));
}

TEST_CASE("site zero belongs to the negative scan", "[frame]") {
  auto tail = TailFunction::log();
  const double t = 100.0;
  const double ell = tail.level(t).value;
  MapField field{tail, {{1, ell + 1.0}, {0, ell + 3.0}}};

  auto f = localisation_frame(field, t);
  CHECK(f.z1 == 1);
  CHECK(f.z2 == 0);
  CHECK(f.S.is_zero());
  CHECK(f.d == 1);
}

TEST_CASE("frozen regression frame", "[frame]") {
  Landscape land(TailFunction::log(), 42);
  auto f = localisation_frame(land, 1e4);
  CHECK(f.level.value == Approx(1382.7728006559732).epsilon(1e-12));
  CHECK(f.r == Approx(7.2318460380940905).epsilon(1e-12));
  CHECK(f.z1 == 16);
  CHECK(f.z2 == -10);
  CHECK(f.d == 16);
  CHECK(f.S.value() == Approx(844.63528219375996).epsilon(1e-12));
  CHECK(f.m.log() == Approx(10.656328565022619).epsilon(1e-12));
  CHECK_FALSE(f.h.has_value());
  CHECK_FALSE(f.event_a.has_value());
}

TEST_CASE("frame invariants on seeded landscapes", "[frame]") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    Landscape land(TailFunction::exp_sqrt_log(), seed);
    const double t = 1e5;
    auto f = localisation_frame(land, t);
    const double ell = f.level.value;

    CHECK(f.z1 >= 1);
    CHECK(f.z2 <= 0);
    CHECK(f.sigma_z1.exceeds(ell));
    CHECK(f.sigma_z2.exceeds(ell));
    CHECK(f.d == std::max(f.z1, -f.z2));

    std::vector<LogReal> between;
    for (std::int64_t z = f.z2 + 1; z < f.z1; ++z) {
      auto s = land.sigma(z);
      CHECK_FALSE(s.exceeds(ell));
      between.push_back(s);
    }
    CHECK(btm::sum(between).log() == f.S.log());

    CHECK(f.level.lower * land.tail().eval(f.level.lower) < t);
    CHECK(f.level.upper * land.tail().eval(f.level.upper) >= t);
    CHECK(f.level.upper - f.level.lower <= 1e-12 * f.level.upper);
  }
}

TEST_CASE("h-dependent fields match their literal definitions", "[frame]") {
  auto tail = TailFunction::exp_sqrt_log();
  const double t = 1e6;
  auto scl = btm::scaling_function(tail, t);
  for (std::uint64_t seed : {7ull, 17ull, 1ull, 16ull}) {
    Landscape land(tail, seed);
    auto f = localisation_frame(land, t, scl);
    REQUIRE(f.h.has_value());
    const double h = *f.h;

    std::vector<LogReal> ring;
    const auto kmax = static_cast<std::int64_t>(std::ceil(f.r / h)) - 1;
    for (std::int64_t center : {f.z1, f.z2})
      for (std::int64_t k = 1; k <= kmax; ++k) {
        ring.push_back(land.sigma(center - k));
        ring.push_back(land.sigma(center + k));
      }
    REQUIRE(f.Sbar.has_value());
    CHECK(btm::sum(ring).log() == f.Sbar->log());

    const bool a = f.S.is_zero() ? true
                                 : f.S.scaled(double(f.d)) < LogReal::from_value(t / h);
    const bool b = f.m.exceeds(t * h * h / f.r);
    const bool c = *f.Sbar < LogReal::from_value(f.level.value / h);
    CHECK(*f.event_a == a);
    CHECK(*f.event_b == b);
    CHECK(*f.event_c == c);
  }
}

TEST_CASE("known event mix on frozen seeds", "[frame]") {
  auto tail = TailFunction::exp_sqrt_log();
  auto scl = btm::scaling_function(tail, 1e6);
  auto flags = [&](std::uint64_t seed) {
    Landscape land(tail, seed);
    auto f = localisation_frame(land, 1e6, scl);
    return std::array<bool, 3>{*f.event_a, *f.event_b, *f.event_c};
  };
  CHECK(flags(7) == std::array<bool, 3>{false, false, false});
  CHECK(flags(17) == std::array<bool, 3>{true, true, true});
  CHECK(flags(16) == std::array<bool, 3>{true, false, true});
}

TEST_CASE("positive-side distance is exactly geometric", "[frame]") {
  auto tail = TailFunction::exp_sqrt_log();
  const double t = 1e4;
  const double r = tail.eval(tail.level(t).value);
  std::vector<std::int64_t> z1s;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    Landscape land(tail, 1000 + std::uint64_t(i));
    z1s.push_back(localisation_frame(land, t).z1);
  }
  auto res = btm::stats::chi2_gof_geometric(z1s, 1.0 / r);
  CHECK(res.p_value > 0.001);
}

TEST_CASE("scan budget is enforced", "[frame]") {
  Landscape land(TailFunction::log(), 3);
  try {
    localisation_frame(land, 1e6, {}, 4);
    FAIL("expected BudgetError");
  } catch (const btm::BudgetError& e) {
    CHECK(e.required() > 4);
  }
}

TEST_CASE("frames are bit-identical across calls", "[frame]") {
  Landscape a(TailFunction::log(), 11);
  Landscape b(TailFunction::log(), 11);
  auto f1 = localisation_frame(a, 1e5);
  auto f2 = localisation_frame(b, 1e5);
  CHECK(f1.z1 == f2.z1);
  CHECK(f1.z2 == f2.z2);
  CHECK(f1.S.value() == f2.S.value());
  CHECK(f1.S.log() == f2.S.log());
  CHECK(f1.m.log() == f2.m.log());
}
