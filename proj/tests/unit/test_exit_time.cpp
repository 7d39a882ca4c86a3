#include <doctest.h>

#include <cmath>
#include <vector>

#include "loctime/exit_time.hpp"

using namespace loctime;

TEST_CASE("exit time density against high-precision values") {
  CHECK(exit_time_pdf(0.1) == doctest::Approx(0.17000733205040683409).epsilon(1e-12));
  CHECK(exit_time_pdf(0.3) == doctest::Approx(0.91713218141337996072).epsilon(1e-12));
  CHECK(exit_time_pdf(0.64) == doctest::Approx(0.70934103481222106808).epsilon(1e-12));
  CHECK(exit_time_pdf(1.0) == doctest::Approx(0.45736522563391993231).epsilon(1e-12));
  CHECK(exit_time_pdf(2.0) == doctest::Approx(0.1332113381824317599).epsilon(1e-12));
  CHECK(exit_time_pdf(0.0) == 0.0);
}

TEST_CASE("exit time distribution function") {
  CHECK(exit_time_cdf(0.1) == doctest::Approx(0.0031308045160050993502).epsilon(1e-10));
  CHECK(exit_time_cdf(0.25) == doctest::Approx(0.091000523846366249).epsilon(1e-12));
  CHECK(exit_time_cdf(0.5) == doctest::Approx(0.31455423310964801).epsilon(1e-12));
  CHECK(1.0 - exit_time_cdf(0.5) == doctest::Approx(0.68544576689035198998).epsilon(1e-12));
  CHECK(exit_time_cdf(1.0) == doctest::Approx(0.62922257020047609).epsilon(1e-12));
  CHECK(exit_time_cdf(2.0) == doctest::Approx(0.89202295555589099).epsilon(1e-12));
}

TEST_CASE("cdf differences agree with integrated density") {
  const double a = 0.4, b = 0.9;
  const int m = 2000;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    // Simpson on a fine grid.
    const double x0 = a + (b - a) * i / m, x1 = a + (b - a) * (i + 1) / m;
    s += (x1 - x0) / 6.0 * (exit_time_pdf(x0) + 4.0 * exit_time_pdf(0.5 * (x0 + x1)) + exit_time_pdf(x1));
  }
  CHECK(s == doctest::Approx(exit_time_cdf(b) - exit_time_cdf(a)).epsilon(1e-10));
}

TEST_CASE("laplace transform") {
  CHECK(exit_time_laplace(0.5) == doctest::Approx(0.6480542736638854).epsilon(1e-14));
  CHECK(exit_time_laplace(0.25) == doctest::Approx(0.79327818174638691).epsilon(1e-14));
  CHECK(exit_time_laplace(1.0) == doctest::Approx(0.4590981310854255).epsilon(1e-14));
}

TEST_CASE("sampler moments") {
  RngStream rng(11);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_exit_time(rng);
    REQUIRE(t > 0.0);
    s1 += t;
    s2 += t * t;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  // E tau = 1, Var tau = 2/3, Var tau^2 bounded so 4 standard errors is loose.
  CHECK(std::abs(mean - 1.0) < 4.0 * std::sqrt((2.0 / 3.0) / n));
  CHECK(var == doctest::Approx(2.0 / 3.0).epsilon(0.02));
}

TEST_CASE("killed density against high-precision values") {
  CHECK(strip_killed_density(0.1, 0.0) == doctest::Approx(1.2615662558095162865).epsilon(1e-10));
  CHECK(strip_killed_density(0.5, 0.0) == doctest::Approx(0.54352272517601069003).epsilon(1e-10));
  CHECK(strip_killed_density(0.5, 0.5) == doctest::Approx(0.37883970335973187993).epsilon(1e-10));
  CHECK(strip_killed_density(2.0, -0.3) == doctest::Approx(0.075561783790868803956).epsilon(1e-10));
  CHECK(strip_killed_density(0.5, 1.2) == 0.0);
}

TEST_CASE("killed density integrates to the survival probability") {
  const int m = 4000;
  double mass = 0.0;
  for (int i = 0; i < m; ++i) {
    const double y = -1.0 + 2.0 * (i + 0.5) / m;
    mass += strip_killed_density(0.5, y) * 2.0 / m;
  }
  CHECK(mass == doctest::Approx(1.0 - exit_time_cdf(0.5)).epsilon(1e-5));
}

TEST_CASE("strip survivor stays inside and is symmetric") {
  RngStream rng(12);
  const int n = 50000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = sample_strip_survivor(0.5, rng);
    REQUIRE(std::abs(y) < 1.0);
    s += y;
  }
  CHECK(std::abs(s / n) < 0.02);
}
