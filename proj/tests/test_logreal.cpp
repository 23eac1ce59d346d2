#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "btm/logreal.hpp"

using btm::LogReal;
using Catch::Approx;

TEST_CASE("value/log round trip", "[logreal]") {
  auto x = LogReal::from_value(12.5);
  CHECK(x.value() == 12.5);
  CHECK(x.log() == Approx(std::log(12.5)));

  auto y = LogReal::from_log(3.0);
  CHECK(y.value() == Approx(std::exp(3.0)));
  CHECK(y.log() == 3.0);

  auto z = LogReal();
  CHECK(z.is_zero());
  CHECK(z.value() == 0.0);
}

TEST_CASE("out-of-range values degrade to log space", "[logreal]") {
  auto big = LogReal::from_log(1e6);
  CHECK_FALSE(big.value_representable());
  CHECK(big.log() == 1e6);

  auto near = LogReal::from_log(708.0);
  CHECK(near.value_representable());
}

TEST_CASE("comparisons cross the representability boundary", "[logreal]") {
  auto small = LogReal::from_value(2.0);
  auto large = LogReal::from_value(1e300);
  auto huge = LogReal::from_log(1e6);
  CHECK(small < large);
  CHECK(large < huge);
  CHECK(small < huge);
  CHECK(huge > small);
  CHECK(small <= small);
  CHECK(LogReal() < small);
}

TEST_CASE("exceeds checks against plain thresholds", "[logreal]") {
  CHECK(LogReal::from_log(1e6).exceeds(1e308));
  CHECK_FALSE(LogReal::from_value(5.0).exceeds(6.0));
  CHECK(LogReal::from_value(5.0).exceeds(4.0));
  CHECK_FALSE(LogReal::from_value(0.0).exceeds(0.0));
}

TEST_CASE("scaled multiplies in both regimes", "[logreal]") {
  auto a = LogReal::from_value(3.0).scaled(2.0);
  CHECK(a.value() == Approx(6.0));

  auto b = LogReal::from_log(800.0).scaled(2.0);
  CHECK_FALSE(b.value_representable());
  CHECK(b.log() == Approx(800.0 + std::log(2.0)));
}

TEST_CASE("streaming add falls back near the ceiling", "[logreal]") {
  auto s = LogReal::from_value(9e299) + LogReal::from_value(9e299);
  CHECK(s.log() == Approx(std::log(1.8) + 300.0 * std::log(10.0)));

  auto t = LogReal::from_log(1000.0) + LogReal::from_log(1000.0);
  CHECK(t.log() == Approx(1000.0 + std::log(2.0)));

  auto u = LogReal::from_value(1.0) + LogReal();
  CHECK(u.value() == 1.0);
}

TEST_CASE("sum is compensated in linear space", "[logreal]") {
  std::vector<LogReal> xs;
  xs.push_back(LogReal::from_value(1.0));
  for (int i = 0; i < 100; ++i) xs.push_back(LogReal::from_value(1e-16));
  double got = btm::sum(xs).value();
  CHECK(got == Approx(1.0 + 100e-16).epsilon(1e-15));

  // naive left-to-right accumulation loses the tail entirely
  double naive = 1.0;
  for (int i = 0; i < 100; ++i) naive += 1e-16;
  CHECK(naive == 1.0);
}

TEST_CASE("sum switches to log-sum-exp when terms overflow", "[logreal]") {
  std::vector<LogReal> xs = {LogReal::from_log(1e4), LogReal::from_log(1e4),
                             LogReal::from_log(1e4 - 5.0)};
  auto s = btm::sum(xs);
  CHECK_FALSE(s.value_representable());
  CHECK(s.log() == Approx(1e4 + std::log(2.0 + std::exp(-5.0))));
}

TEST_CASE("sum of empty or zero inputs is zero", "[logreal]") {
  std::vector<LogReal> xs;
  CHECK(btm::sum(xs).is_zero());
  xs.push_back(LogReal());
  CHECK(btm::sum(xs).is_zero());
}

TEST_CASE("min and max order correctly", "[logreal]") {
  auto a = LogReal::from_value(2.0);
  auto b = LogReal::from_log(900.0);
  CHECK(btm::min(a, b).value() == 2.0);
  CHECK(btm::max(a, b).log() == 900.0);
}
