#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include "btm/fixtures.hpp"
#include "btm/landscape.hpp"
#include "btm/ode.hpp"
#include "btm/pmf.hpp"
#include "btm/stats.hpp"

using btm::Boundary;
using btm::Window;
using btm::pmf_at_time;
using Catch::Approx;

TEST_CASE("t = 0 is a point mass with zero error", "[pmf]") {
  auto w = btm::fixtures::ring11();
  auto p = pmf_at_time(w, 3, 0.0, Boundary::Periodic);
  CHECK(p.p(3) == 1.0);
  CHECK(p.sum_mass() == 1.0);
  CHECK(p.poisson_truncation_error == 0.0);
  CHECK(p.escaped_mass_bound == 0.0);
}

TEST_CASE("two-site periodic chain matches the closed form", "[pmf]") {
  auto w = Window::from_sigma(0, {1.0, 1.0});
  for (double t : {0.1, 0.5, 1.0, 2.5}) {
    auto p = pmf_at_time(w, 0, t, Boundary::Periodic, 1e-12);
    CHECK(p.p(0) == Approx((1.0 + std::exp(-2.0 * t)) / 2.0).margin(1e-10));
    CHECK(p.p(1) == Approx((1.0 - std::exp(-2.0 * t)) / 2.0).margin(1e-10));
  }
}

TEST_CASE("uniformization agrees with the ode oracle on the frozen line", "[pmf]") {
  auto w = btm::fixtures::line21();
  for (double t : {1.0, 10.0, 50.0}) {
    auto a = pmf_at_time(w, 0, t, Boundary::Absorbing, 1e-12);
    auto b = btm::pmf_by_ode(w, 0, t, Boundary::Absorbing);
    for (std::int64_t z = a.lo; z <= a.hi; ++z)
      CHECK(std::abs(a.p(z) - b.p(z)) < 1e-8);
    CHECK(std::abs(a.escaped_mass_bound - b.escaped_mass_bound) < 1e-8);
  }
}

TEST_CASE("mass is conserved within the truncation error", "[pmf]") {
  auto w = btm::fixtures::line21();
  for (double t : {5.0, 50.0, 500.0}) {
    auto a = pmf_at_time(w, 0, t, Boundary::Absorbing, 1e-10);
    CHECK(a.sum_mass() + a.escaped_mass_bound ==
          Approx(1.0).margin(a.poisson_truncation_error + 1e-13));
    for (double m : a.mass) CHECK(m >= 0.0);

    auto p = pmf_at_time(btm::fixtures::ring11(), 0, t, Boundary::Periodic, 1e-10);
    CHECK(p.sum_mass() == Approx(1.0).margin(p.poisson_truncation_error + 1e-13));
  }
}

TEST_CASE("equilibrium is proportional to the depths", "[pmf]") {
  auto w = Window::from_sigma(0, {1.0, 2.0, 3.0});
  auto pi = btm::equilibrium_periodic(w);
  CHECK(pi[0] == Approx(1.0 / 6.0));
  CHECK(pi[1] == Approx(1.0 / 3.0));
  CHECK(pi[2] == Approx(1.0 / 2.0));

  auto u = btm::equilibrium_periodic(Window::from_sigma(0, {7.0, 7.0, 7.0, 7.0}));
  for (double x : u) CHECK(x == Approx(0.25));
}

TEST_CASE("periodic chain relaxes to equilibrium", "[pmf]") {
  auto w = btm::fixtures::ring11();
  auto pi = btm::equilibrium_periodic(w);

  // double t until the return probability is stationary
  double t = 100.0;
  double prev = pmf_at_time(w, 0, t, Boundary::Periodic, 1e-12).p(0);
  for (int i = 0; i < 12; ++i) {
    t *= 2.0;
    double cur = pmf_at_time(w, 0, t, Boundary::Periodic, 1e-12).p(0);
    if (std::abs(cur - prev) < 1e-9) break;
    prev = cur;
  }
  auto p = pmf_at_time(w, 0, t, Boundary::Periodic, 1e-12);
  double tv = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i)
    tv += std::abs(p.mass[i] - pi[i]);
  CHECK(0.5 * tv < 1e-6);
}

TEST_CASE("detailed balance holds identically for depth-derived rates", "[pmf]") {
  auto rep_line = btm::detailed_balance_check(btm::fixtures::line21(), Boundary::Absorbing);
  CHECK(rep_line.ok);
  CHECK(rep_line.max_violation < 1e-15);

  auto rep_ring = btm::detailed_balance_check(btm::fixtures::ring11(), Boundary::Periodic);
  CHECK(rep_ring.ok);
  CHECK(rep_ring.max_violation < 1e-15);
}

TEST_CASE("detailed balance on randomized windows, extreme depths included", "[pmf]") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    btm::Landscape land(btm::TailFunction::log(), seed);
    auto w = Window::from_field(land, -5, 5);
    auto rep = btm::detailed_balance_check(w, Boundary::Periodic);
    worst = std::max(worst, rep.max_violation);
  }
  CHECK(worst < 1e-15);
}

TEST_CASE("a perturbed rate breaks detailed balance detectably", "[pmf]") {
  auto w = btm::fixtures::ring11();
  std::vector<double> right(w.size()), left(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) right[i] = left[i] = 0.5 * w.rate(i);
  right[4] *= 1.001;
  auto rep = btm::detailed_balance_check(w, Boundary::Periodic, right, left);
  CHECK_FALSE(rep.ok);
  CHECK(rep.max_violation > 1e-4);
  CHECK(rep.arg_edge == 4);
}

TEST_CASE("return probability decreases to the equilibrium mass", "[pmf]") {
  auto w = btm::fixtures::ring11();
  std::vector<double> grid;
  for (int i = 1; i <= 50; ++i) grid.push_back(std::pow(10.0, 0.0 + 3.3 * i / 50.0));
  std::vector<double> seq;
  REQUIRE_NOTHROW(seq = btm::monotone_return_probability(w, 0, grid));
  for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] <= seq[i - 1] + 1e-9);

  auto pi = btm::equilibrium_periodic(w);
  CHECK(std::abs(seq.back() - pi[0]) < 1e-6);
}

TEST_CASE("constant three-ring decreases toward one third", "[pmf]") {
  auto w = Window::from_sigma(0, {4.0, 4.0, 4.0});
  std::vector<double> grid = {1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 300.0};
  auto seq = btm::monotone_return_probability(w, 1, grid);
  CHECK(seq.front() > 0.5);
  CHECK(seq.back() == Approx(1.0 / 3.0).margin(1e-8));
}

TEST_CASE("monotonicity violations are reported with the offending pair", "[pmf]") {
  auto w = btm::fixtures::ring11();
  // a decreasing-then-increasing grid is rejected up front
  CHECK_THROWS_AS(btm::monotone_return_probability(w, 0, {10.0, 5.0}),
                  std::invalid_argument);
}

TEST_CASE("doubling the window leaves the inner half unchanged", "[pmf]") {
  btm::Landscape land(btm::TailFunction::exp_sqrt_log(), 12);
  const double t = 1000.0;
  auto small = pmf_at_time(Window::from_field(land, -40, 40), 0, t, Boundary::Absorbing, 1e-12);
  auto big = pmf_at_time(Window::from_field(land, -80, 80), 0, t, Boundary::Absorbing, 1e-12);
  for (std::int64_t z = -20; z <= 20; ++z)
    CHECK(std::abs(small.p(z) - big.p(z)) < 1e-10);
}

TEST_CASE("step budget violations report the required depth", "[pmf]") {
  auto w = btm::fixtures::ring11();
  try {
    pmf_at_time(w, 0, 1e9, Boundary::Periodic, 1e-10, 1000);
    FAIL("expected BudgetError");
  } catch (const btm::BudgetError& e) {
    CHECK(e.required() > 1000);
  }
}

TEST_CASE("generator spectrum lies in the closed left half-plane", "[pmf]") {
  auto w = btm::fixtures::ring11();
  const auto n = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = w.rate(static_cast<std::size_t>(i));
    Q(i, i) = -u;
    Q(i, (i + 1) % n) += 0.5 * u;
    Q(i, (i + n - 1) % n) += 0.5 * u;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(Q);
  for (Eigen::Index i = 0; i < n; ++i)
    CHECK(es.eigenvalues()[i].real() <= 1e-10);
}

TEST_CASE("pmf export and metadata formats", "[pmf]") {
  auto p = pmf_at_time(btm::fixtures::ring11(), 2, 10.0, Boundary::Periodic, 1e-8);
  std::ostringstream os;
  p.export_csv(os);
  CHECK(os.str().rfind("z,p\n", 0) == 0);

  auto meta = p.metadata_json();
  CHECK(meta.find("\"window\": [0, 10]") != std::string::npos);
  CHECK(meta.find("\"boundary\": \"periodic\"") != std::string::npos);
  CHECK(meta.find("\"start\": 2") != std::string::npos);
  CHECK(meta.find("\"lambda\": ") != std::string::npos);
  CHECK(meta.find("\"tol\": ") != std::string::npos);
}

TEST_CASE("start site is honored off-center", "[pmf]") {
  auto w = btm::fixtures::line21();
  auto p = pmf_at_time(w, 5, 1.0, Boundary::Absorbing, 1e-10);
  CHECK(p.p(5) > 0.5);
  CHECK(p.p(0) < 0.1);
}
