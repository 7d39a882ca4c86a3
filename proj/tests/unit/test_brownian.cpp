#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "loctime/brownian.hpp"
#include "loctime/stats.hpp"

using namespace loctime;

TEST_CASE("exit sides follow the gambler's ruin law") {
  RngStream rng(21);
  const int n = 60000;
  int top = 0;
  for (int i = 0; i < n; ++i) {
    BrownianMotion bm;
    const double x = bm.exit_interval(-1.0, 2.0, rng);
    REQUIRE((x == -1.0 || x == 2.0));
    top += x == 2.0;
  }
  const double p = 1.0 / 3.0;
  CHECK(std::abs(top / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("exit time from a symmetric interval has mean r squared") {
  RngStream rng(22);
  const int n = 40000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    BrownianMotion bm;
    bm.exit_interval(-2.0, 2.0, rng);
    s += bm.time();
  }
  // E tau = 4, Var tau = (2/3) * 16.
  CHECK(std::abs(s / n - 4.0) < 4.0 * std::sqrt(32.0 / 3.0 / n));
}

TEST_CASE("position must start inside the interval") {
  RngStream rng(1);
  BrownianMotion bm;
  CHECK_THROWS_AS(bm.exit_interval(0.5, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(BrownianMotion({1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("observations taken during exits are Gaussian") {
  RngStream rng(23);
  std::vector<double> a, b;
  for (int i = 0; i < 5000; ++i) {
    BrownianMotion bm({0.3, 2.5});
    while (bm.time() < 1.0) bm.exit_interval(bm.position() - 0.5, bm.position() + 0.5, rng);
    bm.finish(rng);
    REQUIRE(bm.complete());
    a.push_back(bm.observed()[0] / std::sqrt(0.3));
    b.push_back(bm.observed()[1] / std::sqrt(2.5));
  }
  const auto law = TargetLaw::standard_normal();
  CHECK(ks_statistic(EmpiricalDistribution(a), law) < 0.025);
  CHECK(ks_statistic(EmpiricalDistribution(b), law) < 0.025);
}

TEST_CASE("embedded increments follow the centered offspring law") {
  RngStream rng(24);
  EmbeddedSum sum;
  const int n = 100000;
  std::vector<std::int64_t> inc;
  inc.reserve(n);
  std::int64_t total = 0;
  for (int i = 0; i < n; ++i) {
    const auto d = sum.step(rng);
    inc.push_back(d);
    total += d;
    // Embedding: the motion sits exactly on the partial sum.
    REQUIRE(sum.motion().position() == doctest::Approx(static_cast<double>(sum.value())));
  }
  CHECK(sum.value() == total);
  CHECK(sum.count() == static_cast<std::uint64_t>(n));
  const auto pmf = [](std::int64_t j) {
    if (j == -1) return 0.5;
    if (j == 0) return 0.25;
    return std::ldexp(1.0, -static_cast<int>(j) - 2);
  };
  CHECK(chi_square_test(inc, pmf, -1, 12, 1e-3).pass);
  // E sigma_1 = Var(T - 2) = 2; Var sigma_1 is finite, so 4 SE with a generous
  // variance bound of 40 per step.
  CHECK(std::abs(sum.sigma() / n - 2.0) < 4.0 * std::sqrt(40.0 / n));
}
