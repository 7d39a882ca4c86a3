#include <doctest.h>

#include <cmath>
#include <vector>

#include "loctime/audits.hpp"
#include "loctime/exit_time.hpp"
#include "loctime/walk.hpp"

using namespace loctime;

namespace {

// P(rho_N > 2n) by enumerating all 4^n paths of length 2n.
double rho_tail_by_enumeration(unsigned N, unsigned n) {
  const unsigned len = 2 * n;
  std::uint64_t hit = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << len); ++mask) {
    int s = 0;
    unsigned returns = 0;
    for (unsigned i = 0; i < len; ++i) {
      s += ((mask >> i) & 1U) ? 1 : -1;
      returns += (s == 0);
    }
    hit += returns < N;
  }
  return static_cast<double>(hit) / static_cast<double>(std::uint64_t{1} << len);
}

std::uint64_t choose(unsigned n, unsigned k) {
  std::uint64_t c = 1;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

TEST_CASE("return-count tail against enumeration") {
  for (unsigned N : {1U, 2U, 3U, 5U})
    for (unsigned n : {0U, 1U, 2U, 4U, 7U})
      CHECK(rho_tail_exact(N, n) == doctest::Approx(rho_tail_by_enumeration(N, n)).epsilon(1e-12));
  CHECK(rho_tail_exact(0, 5) == 0.0);
}

TEST_CASE("first-return tail exceeds the square-root bound on (1, 2]") {
  // P(rho_1 >= u) = 1 for u <= 2, above 1 / sqrt(u).
  for (double u : {1.2, 1.5, 2.0}) {
    CHECK(rho_tail_at_least(1, u) == 1.0);
    CHECK(rho_tail_at_least(1, u) > 1.0 / std::sqrt(u));
  }
  const std::vector<std::uint64_t> samples(200, 2);
  const std::vector<double> grid{1.5, 4.0, 9.0};
  const auto audit = audit_rho_tail(samples, 1, grid);
  REQUIRE(audit.rows.size() == 3);
  CHECK(audit.rows[0].tight);
  // P(rho_1 >= 4) = P(rho_1 > 2) = 1/2 = 1/sqrt(4).
  CHECK(audit.rows[1].tight);
  CHECK_FALSE(audit.rows[2].tight);
  CHECK(audit.pass());
  CHECK_THROWS(audit_rho_tail(samples, 1, std::vector<double>{0.5}));
}

TEST_CASE("binomial tail against integer enumeration") {
  for (double u : {0.0, 1.0, 2.0, 3.5, 6.0, 10.0}) {
    std::uint64_t c = 0;
    for (unsigned v = 0; v <= 10; ++v)
      if (std::abs(2.0 * v - 10.0) >= u) c += choose(10, v);
    CHECK(binomial_two_sided_tail(10, u) == doctest::Approx(c / 1024.0).epsilon(1e-12));
  }
}

TEST_CASE("single increment tail of a Wiener path") {
  CHECK(wiener_single_increment_tail(1.0) == doctest::Approx(0.62922257020047609).epsilon(1e-12));
  CHECK(wiener_single_increment_tail(2.0) == doctest::Approx(0.091000523846366249).epsilon(1e-12));
  CHECK(wiener_single_increment_tail(0.0) == 1.0);
}

TEST_CASE("zero increment maximum against a naive scan") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::uint64_t a : {1ULL, 6ULL, 37ULL, 500ULL}) {
      const std::uint64_t t = 500;
      RngStream r1(seed), r2(seed);
      const double fast = sample_zero_increment_max(t, a, r1);
      const auto steps = simulate_walk(t, r2);
      const auto pos = WalkPath(steps).positions(t);
      std::vector<std::uint64_t> xi(t + 1, 0);
      for (std::uint64_t i = 1; i <= t; ++i) xi[i] = xi[i - 1] + (pos[i] == 0);
      std::uint64_t best = 0;
      for (std::uint64_t j = 0; j + a <= t; ++j) best = std::max(best, xi[j + a] - xi[j]);
      CHECK(fast == doctest::Approx(static_cast<double>(best) / std::sqrt(static_cast<double>(a))));
    }
  }
  RngStream rng(1);
  CHECK_THROWS(sample_zero_increment_max(10, 11, rng));
}

TEST_CASE("Wiener increment maximum against a naive scan") {
  RngStream rng(2);
  const TimeGrid g(2.0, 0.01);
  const auto w = sample_wiener(g, rng);
  const double h = 0.3;
  const std::size_t m = 30;
  double best = 0.0;
  for (std::size_t s = 0; s + m < w.values.size(); ++s)
    for (std::size_t r = 0; r <= m; ++r) best = std::max(best, std::abs(w.values[s + r] - w.values[s]));
  CHECK(wiener_increment_max(w, h) == doctest::Approx(best / std::sqrt(h)));
}

TEST_CASE("inequality audits record bounds") {
  const std::vector<double> maxes(1000, 1.0);
  const auto e = audit_exp_max(maxes, 100, std::vector<double>{2.0});
  CHECK(e.rows[0].bound == doctest::Approx(0.01));
  CHECK(e.rows[0].empirical == 0.0);
  const auto p = audit_exp_partial_sums(maxes, 100, std::vector<double>{1.0});
  CHECK(p.rows[0].bound == doctest::Approx(2.0 * std::exp(-1.0 / 8.0)));
  CHECK(p.rows[0].empirical == 1.0);
  CHECK_THROWS(audit_exp_partial_sums(maxes, 100, std::vector<double>{20.0}));
  const std::vector<std::uint64_t> lm(100, 600);
  const auto l = audit_level_max(lm, 100, 5);
  REQUIRE(l.rows.size() == 1);
  CHECK(l.rows[0].u == 500.0);
  CHECK(l.rows[0].empirical == 1.0);
  CHECK(l.rows[0].violated);
}

TEST_CASE("sampled return counts have the exact tail") {
  RngStream rng(3);
  const int n = 100000;
  int over = 0;
  for (int i = 0; i < n; ++i) over += sample_rho(3, rng) > 20;
  const double p = rho_tail_exact(3, 10);
  CHECK(std::abs(over / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}
