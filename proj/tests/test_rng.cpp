#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "btm/rng.hpp"

using Catch::Approx;
namespace rng = btm::rng;

TEST_CASE("streams are reproducible and tag-sensitive", "[rng]") {
  auto a = rng::Stream::derive(42, {rng::kPathSalt, 7});
  auto b = rng::Stream::derive(42, {rng::kPathSalt, 7});
  auto c = rng::Stream::derive(42, {rng::kPathSalt, 8});
  for (int i = 0; i < 64; ++i) {
    auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
}

TEST_CASE("open01 stays strictly inside the unit interval", "[rng]") {
  CHECK(rng::to_open01(0) > 0.0);
  CHECK(rng::to_open01(~0ull) < 1.0);
  auto s = rng::Stream::derive(1, {rng::kPanelSalt});
  for (int i = 0; i < 10000; ++i) {
    double u = s.next_open01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("exponential draws are positive with mean near 1", "[rng]") {
  auto s = rng::Stream::derive(3, {rng::kPanelSalt, 1});
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double e = s.next_exponential();
    REQUIRE(e > 0.0);
    acc += e;
  }
  CHECK(acc / n == Approx(1.0).margin(0.01));
}

TEST_CASE("zigzag interleaves signs without collisions", "[rng]") {
  std::set<std::uint64_t> seen;
  for (std::int64_t z = -50; z <= 50; ++z) seen.insert(rng::zigzag(z));
  CHECK(seen.size() == 101);
  CHECK(rng::zigzag(0) == 0);
  CHECK(rng::zigzag(-1) == 1);
  CHECK(rng::zigzag(1) == 2);
}

TEST_CASE("site uniforms are pure in (seed, site)", "[rng]") {
  double u = rng::site_uniform(99, -12);
  CHECK(u == rng::site_uniform(99, -12));
  CHECK(u != rng::site_uniform(99, 12));
  CHECK(u != rng::site_uniform(100, -12));
  CHECK(u > 0.0);
  CHECK(u < 1.0);

  double mean = 0.0;
  const int n = 100000;
  for (int z = -n / 2; z < n / 2; ++z) mean += rng::site_uniform(7, z);
  CHECK(mean / n == Approx(0.5).margin(0.005));
}

TEST_CASE("step stream emits balanced fair steps", "[rng]") {
  auto s = rng::StepStream(rng::Stream::derive(5, {rng::kPathSalt}));
  long sum = 0;
  const int n = 1 << 20;
  for (int i = 0; i < n; ++i) {
    int d = s.next_step();
    REQUIRE((d == 1 || d == -1));
    sum += d;
  }
  // 3 sigma for n fair signs
  CHECK(std::abs(double(sum)) < 3.0 * std::sqrt(double(n)));

  auto s2 = rng::StepStream(rng::Stream::derive(5, {rng::kPathSalt}));
  for (int i = 0; i < 100; ++i) {
    auto t = rng::StepStream(rng::Stream::derive(5, {rng::kPathSalt}));
    (void)t;
  }
  auto s3 = rng::StepStream(rng::Stream::derive(5, {rng::kPathSalt}));
  for (int i = 0; i < 1000; ++i) {
    int d = s2.next_step();
    CHECK(d == s3.next_step());
  }
}

TEST_CASE("derive_key differs from plain mixing", "[rng]") {
  CHECK(rng::derive_key(1, 2) != rng::derive_key(2, 1));
  CHECK(rng::derive_key(0, 0) != 0);
}
