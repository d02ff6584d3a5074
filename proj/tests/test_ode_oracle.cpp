#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "mfgd/analysis.hpp"
#include "mfgd/ode_oracle.hpp"

using namespace mfgd;

TEST_CASE("closed form values") {
  const auto p = closed_form({2.0}, 1.0);
  CHECK(p.x == doctest::Approx(std::pow(9.0, 0.25)));
  CHECK(p.x == doctest::Approx(std::sqrt(3.0)));
  CHECK(p.energy == doctest::Approx(1.0 / 3.0));
  const auto q = closed_form({1.0}, 9.0);
  CHECK(q.x == doctest::Approx(3.036589).epsilon(1e-6));
  CHECK(q.energy == doctest::Approx(0.329317).epsilon(1e-5));
  for (double alpha : {0.5, 1.0, 2.0, 7.0}) {
    const auto o = closed_form({alpha}, 0.0);
    CHECK(o.x == 1.0);
    CHECK(o.energy == 1.0);
  }
  CHECK_THROWS_AS(closed_form({1.0, 2.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(closed_form({1.0}, -1.0), std::invalid_argument);
}

TEST_CASE("closed form solves the ODE") {
  // Central difference of x(t) against -F'(x) = alpha x^-(alpha+1).
  for (double alpha : {0.5, 1.0, 2.0}) {
    const ScalarFlow flow{alpha};
    for (double t : {0.1, 1.0, 50.0}) {
      const double dt = 1e-5 * (1 + t);
      const double dx = (closed_form(flow, t + dt).x - closed_form(flow, t - dt).x) / (2 * dt);
      CHECK(dx == doctest::Approx(-flow.gradient(closed_form(flow, t).x)).epsilon(1e-6));
    }
  }
}

TEST_CASE("Euler converges to the closed form at first order") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    const ScalarFlow flow{alpha};
    const auto path = integrate_scalar(flow, 1e-4, 10000);
    REQUIRE(path.size() == 10001);
    CHECK(path.back().t == doctest::Approx(1.0));
    CHECK(std::abs(path.back().x - closed_form(flow, 1.0).x) <= 1e-3);
    CHECK(terminal_error(flow, 1e-4, 10000) <= 1e-3);
    const double ratio = richardson_ratio(flow, 1e-4, 10000);
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.2);
  }
  const auto start = integrate_scalar({1.0}, 0.1, 0);
  REQUIRE(start.size() == 1);
  CHECK(start[0].x == 1.0);
}

TEST_CASE("Euler path is monotone") {
  const auto path = integrate_scalar({1.0}, 1e-2, 2000);
  for (std::size_t k = 1; k < path.size(); ++k) {
    CHECK(path[k].x > path[k - 1].x);
    CHECK(path[k].energy < path[k - 1].energy);
  }
}

TEST_CASE("fit recovers alpha / (alpha + 2) on the closed-form energy") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    std::vector<double> t;
    std::vector<double> e;
    for (int i = 0; i <= 100; ++i) {
      t.push_back(std::pow(10.0, 2.0 + 2.0 * i / 100.0));
      e.push_back(closed_form({alpha}, t.back()).energy);
    }
    CHECK(std::abs(fit_power_law(t, e, {1e2, 1e4}) - alpha / (alpha + 2)) <= 0.05);
  }
}

TEST_CASE("flow validation and oracle table") {
  CHECK_THROWS_AS(ScalarFlow{0.0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(ScalarFlow({1.0, -1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(integrate_scalar({1.0}, 0.0, 3), std::invalid_argument);

  const auto rows = oracle_table({2.0}, 1e-3, 1005, 100);
  REQUIRE(rows.size() == 12);
  CHECK(rows.front().t == 0.0);
  CHECK(rows.back().t == doctest::Approx(1.005));
  std::stringstream ss;
  write_oracle_csv(ss, rows);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "t,x_euler,x_exact,energy_euler,energy_exact,abs_error");
}
