#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "btm/landscape.hpp"
#include "btm/stats.hpp"

using btm::Landscape;
using btm::TailFunction;
using Catch::Approx;

TEST_CASE("depths are deterministic and order-independent", "[landscape]") {
  Landscape a(TailFunction::log(), 42);
  Landscape b(TailFunction::log(), 42);
  double fwd = a.sigma(5).log() + a.sigma(-3).log();
  double rev = b.sigma(-3).log() + b.sigma(5).log();
  CHECK(fwd == rev);
  CHECK(a.sigma(1000000).log() == b.sigma(1000000).log());

  Landscape c(TailFunction::log(), 43);
  CHECK(a.sigma(5).log() != c.sigma(5).log());
}

TEST_CASE("every depth sits above the floor", "[landscape]") {
  for (auto tail : {TailFunction::log(), TailFunction::log_power(2.0),
                    TailFunction::exp_sqrt_log()}) {
    Landscape land(tail, 7);
    for (std::int64_t z = -500; z <= 500; ++z) {
      auto s = land.sigma(z);
      REQUIRE(s.log() >= 1.0);
    }
  }
}

TEST_CASE("realized range tracks accessed sites", "[landscape]") {
  Landscape land(TailFunction::log(), 1);
  CHECK_FALSE(land.realized_range().has_value());
  land.sigma(3);
  land.sigma(-10);
  auto r = land.realized_range();
  REQUIRE(r.has_value());
  CHECK(r->first == -10);
  CHECK(r->second == 3);
}

TEST_CASE("marginals match the tail law by KS", "[landscape]") {
  const int n = 100000;
  const double crit = btm::stats::ks_critical(0.01, n);

  auto log_depths = [&](TailFunction tail, std::uint64_t seed) {
    Landscape land(tail, seed);
    std::vector<double> ys;
    ys.reserve(n);
    for (int z = 0; z < n; ++z) ys.push_back(land.sigma(z).log());
    return ys;
  };

  SECTION("log family") {
    auto tail = TailFunction::log();
    auto cdf = [](double y) { return y <= 1.0 ? 0.0 : 1.0 - 1.0 / y; };
    CHECK(btm::stats::ks_statistic(log_depths(tail, 2024), cdf) < crit);
  }
  SECTION("log-power family") {
    auto tail = TailFunction::log_power(2.0);
    auto cdf = [](double y) { return y <= 1.0 ? 0.0 : 1.0 - 1.0 / (y * y); };
    CHECK(btm::stats::ks_statistic(log_depths(tail, 2024), cdf) < crit);
  }
  SECTION("jump family, atom handled via left limits") {
    auto tail = TailFunction::exp_sqrt_log();
    auto cdf = [](double y) { return y < 1.0 ? 0.0 : 1.0 - std::exp(-std::sqrt(y)); };
    auto cdf_left = [&](double y) { return y <= 1.0 ? 0.0 : cdf(y); };
    CHECK(btm::stats::ks_statistic(log_depths(tail, 2024), cdf, cdf_left) < crit);
  }
}

TEST_CASE("descriptor is a key-value record", "[landscape]") {
  Landscape a(TailFunction::log_power(2.0), 99);
  std::string d = a.descriptor();
  CHECK(d.find("family=log_power\n") != std::string::npos);
  CHECK(d.find("beta=2\n") != std::string::npos);
  CHECK(d.find("seed=99\n") != std::string::npos);
  CHECK(d.find("x0=2.71828") != std::string::npos);

  Landscape b(TailFunction::log(), 1);
  CHECK(b.descriptor().find("beta=") == std::string::npos);
}

TEST_CASE("window export emits csv", "[landscape]") {
  Landscape land(TailFunction::log(), 5);
  std::ostringstream os;
  land.export_window(-1, 1, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "z,sigma,log_sigma");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.find(',') != std::string::npos);
  }
  CHECK(rows == 3);
  CHECK(os.str().find("-1,") != std::string::npos);
}

TEST_CASE("copies share the law but not the cache", "[landscape]") {
  Landscape a(TailFunction::log(), 8);
  a.sigma(4);
  Landscape b(a);
  CHECK(b.sigma(4).log() == a.sigma(4).log());
  auto r = b.realized_range();
  REQUIRE(r.has_value());
  CHECK(r->second == 4);
}
