#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "loctime/rng.hpp"
#include "loctime/stats.hpp"

using namespace loctime;

TEST_CASE("product law distribution function") {
  CHECK(cdf_product_law(0.0) == doctest::Approx(0.5));
  CHECK(cdf_product_law(0.25) == doctest::Approx(0.64831747369096295).epsilon(1e-12));
  CHECK(cdf_product_law(0.5) == doctest::Approx(0.75674331294703503).epsilon(1e-12));
  CHECK(cdf_product_law(1.0) == doctest::Approx(0.88884780291902642).epsilon(1e-12));
  CHECK(cdf_product_law(2.0) == doctest::Approx(0.98025186400248832).epsilon(1e-12));
  CHECK(cdf_product_law(3.0) == doctest::Approx(0.99708064158693215).epsilon(1e-12));
  for (double x : {0.1, 0.7, 1.3, 2.9})
    CHECK(std::abs(cdf_product_law(x) + cdf_product_law(-x) - 1.0) < 1e-9);
}

TEST_CASE("product law matches simulation") {
  RngStream rng(3);
  std::vector<double> v;
  for (int i = 0; i < 50000; ++i) v.push_back(rng.normal() * std::sqrt(std::abs(rng.normal())));
  CHECK(ks_statistic(EmpiricalDistribution(v), TargetLaw::product()) < 0.012);
}

TEST_CASE("elementary laws") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
  CHECK(TargetLaw::half_normal().cdf(1.0) == doctest::Approx(0.6826894921370859).epsilon(1e-12));
  CHECK(TargetLaw::half_normal().cdf(-1.0) == 0.0);
  CHECK(TargetLaw::exponential().cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(TargetLaw::geometric_half().pmf(3) == doctest::Approx(0.125));
  CHECK_THROWS(TargetLaw::standard_normal().pmf(1));
  const auto tab = TargetLaw::tabulated({0.0, 1.0, 2.0}, {0.0, 0.25, 1.0});
  CHECK(tab.cdf(0.5) == doctest::Approx(0.125));
  CHECK(tab.cdf(1.5) == doctest::Approx(0.625));
  CHECK(tab.cdf(-1.0) == 0.0);
  CHECK(tab.cdf(3.0) == 1.0);
  CHECK_THROWS(TargetLaw::tabulated({0.0, 1.0}, {0.5, 0.2}));
}

TEST_CASE("empirical distribution") {
  const EmpiricalDistribution e({3.0, 1.0, 2.0, 2.0});
  CHECK(e.cdf(0.5) == 0.0);
  CHECK(e.cdf(2.0) == doctest::Approx(0.75));
  CHECK(e.cdf(3.0) == 1.0);
}

TEST_CASE("KS test") {
  const EmpiricalDistribution constant(std::vector<double>(1000, 0.0));
  const auto r = ks_test(constant, TargetLaw::standard_normal(), 0.05);
  CHECK(r.statistic == doctest::Approx(0.5));
  CHECK_FALSE(r.pass);
  CHECK(std::isnan(r.p_value));
  CHECK_THROWS(ks_test(constant, TargetLaw::geometric_half(), 0.05));
  CHECK_THROWS(ks_test(EmpiricalDistribution({1.0, 2.0}), TargetLaw::standard_normal(), 0.05));
  // Uniform grid points against the exponential law: the statistic is known.
  std::vector<double> q;
  for (int i = 1; i <= 1000; ++i) q.push_back(-std::log(1.0 - (i - 0.5) / 1000.0));
  CHECK(ks_statistic(EmpiricalDistribution(q), TargetLaw::exponential()) == doctest::Approx(0.0005).epsilon(1e-6));
}

TEST_CASE("chi-square tests") {
  RngStream rng(5);
  std::vector<std::int64_t> g;
  for (int i = 0; i < 20000; ++i) {
    std::int64_t j = 1;
    while (rng.bit()) ++j;
    g.push_back(j);
  }
  const auto geo = [](std::int64_t j) { return std::ldexp(1.0, -static_cast<int>(j)); };
  const auto ok = chi_square_test(g, geo, 1, 20, 1e-3);
  CHECK(ok.pass);
  CHECK(ok.dof >= 5);
  const std::vector<std::int64_t> ones(1000, 1);
  CHECK_FALSE(chi_square_test(ones, geo, 1, 20, 1e-3).pass);
  CHECK_THROWS(chi_square_test(g, geo, 5, 4, 1e-3));
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK_FALSE(chi_square_two_sample(g, ones, 1e-3).pass);
  std::vector<std::int64_t> h(g.begin(), g.begin() + 10000), k(g.begin() + 10000, g.end());
  CHECK(chi_square_two_sample(h, k, 1e-3).pass);
}

TEST_CASE("power law fit") {
  const std::vector<double> n{1, 10, 100, 1000};
  std::vector<double> e;
  for (double x : n) e.push_back(3.0 * std::pow(x, 0.25));
  const auto f = fit_power_law(n, e);
  CHECK(f.exponent == doctest::Approx(0.25));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
  CHECK(f.std_error == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(f.points == 4);
  CHECK_THROWS(fit_power_law(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
  CHECK_THROWS(fit_power_law(n, std::vector<double>{1, 0, 1, 1}));
}

TEST_CASE("tail audit rows") {
  TailAudit a;
  a.add(1.0, 0.9, 0.1, true);
  a.add(2.0, 0.05, 0.1);
  CHECK(a.violations() == 0);
  a.sample_size = 10000;
  a.add(3.0, 0.5, 0.1);
  CHECK(a.violations() == 1);
  CHECK_FALSE(a.pass());
  CHECK(wald_halfwidth_99(0.5, 10000) == doctest::Approx(2.5758293035489 * 0.005).epsilon(1e-9));
}

TEST_CASE("iterated logarithm tracker") {
  const std::vector<double> n{1, 2, 3};
  const std::vector<double> zero{0, 0, 0};
  const auto d = lil_tracker("z", n, zero, 1.0, 0.3, 1.3);
  CHECK(d.running_sup == 0.0);
  CHECK_FALSE(d.inside);
  const std::vector<double> s{0.2, 1.4, 0.9};
  const auto e = lil_tracker("s", n, s, 2.0, 0.3, 1.3);
  CHECK(e.running_sup == doctest::Approx(1.4));
  CHECK(e.n_at_sup == 2.0);
  CHECK(e.ratio == doctest::Approx(0.7));
  CHECK(e.inside);
  CHECK_THROWS(lil_tracker("bad", std::vector<double>{2, 1}, std::vector<double>{0, 0}, 1.0, 0.3, 1.3));
}

TEST_CASE("summaries") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS(median({}));
  const std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(pairwise_sum(v) == pairwise_sum(std::vector<double>(v)));
  const std::vector<double> w{1.0, 2.0, 3.0, 4.0};
  CHECK(pairwise_sum(w) == 10.0);
  const auto m = estimate_mean(w);
  CHECK(m.mean == 2.5);
  CHECK(m.variance == doctest::Approx(5.0 / 3.0));
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
}

TEST_CASE("step tests") {
  std::vector<int> alt;
  for (int i = 0; i < 1000; ++i) alt.push_back(i % 2 ? 1 : -1);
  CHECK(fair_coin_test(alt, 1e-3).pass);
  CHECK_FALSE(lag_pair_test(alt, 1e-3).pass);
  const std::vector<int> ups(1000, 1);
  CHECK_FALSE(fair_coin_test(ups, 1e-3).pass);
}
