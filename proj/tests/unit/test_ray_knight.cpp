#include <doctest.h>

#include <cmath>
#include <map>

#include "loctime/ray_knight.hpp"

using namespace loctime;

namespace {

StepSequence seq(std::initializer_list<int> s) {
  const std::vector<int> v(s);
  return StepSequence::from_steps(v);
}

// Mass propagation on {0, 1, ..., k} started at 1: from k the walk either
// revisits k (the up excursion always comes back) or drops to k - 1. Returns
// P(visits to k before absorption at 0 == m) for m < cap.
std::vector<double> visit_law_by_dp(int k, int cap) {
  // mass[pos][visits]
  std::vector<std::vector<double>> mass(static_cast<std::size_t>(k) + 1,
                                        std::vector<double>(static_cast<std::size_t>(cap) + 1, 0.0));
  std::vector<double> absorbed(static_cast<std::size_t>(cap) + 1, 0.0);
  mass[1][k == 1 ? 1 : 0] = 1.0;
  for (int it = 0; it < 200000; ++it) {
    auto next = mass;
    for (auto& row : next) std::fill(row.begin(), row.end(), 0.0);
    double live = 0.0;
    for (int p = 1; p <= k; ++p) {
      for (int v = 0; v <= cap; ++v) {
        const double w = mass[static_cast<std::size_t>(p)][static_cast<std::size_t>(v)];
        if (w == 0.0) continue;
        live += w;
        const int vv = std::min(v + 1, cap);
        if (p == k) {
          next[static_cast<std::size_t>(p)][static_cast<std::size_t>(vv)] += w / 2;
        } else {
          const int up = p + 1;
          next[static_cast<std::size_t>(up)][static_cast<std::size_t>(up == k ? vv : v)] += w / 2;
        }
        const int down = p - 1;
        if (down == 0) {
          absorbed[static_cast<std::size_t>(v)] += w / 2;
        } else {
          next[static_cast<std::size_t>(down)][static_cast<std::size_t>(down == k ? vv : v)] += w / 2;
        }
      }
    }
    mass.swap(next);
    if (live < 1e-15) break;
  }
  absorbed.resize(static_cast<std::size_t>(cap));
  return absorbed;
}

}  // namespace

TEST_CASE("T extraction on the tent path") {
  const auto steps = seq({+1, +1, -1, -1});
  const auto t = extract_T_from_path(WalkPath(steps), 1, 1);
  REQUIRE(t.size() == 1);
  CHECK(t[0] == 2);
  CHECK_THROWS_AS(extract_T_from_path(WalkPath(steps), 1, 2), InsufficientExcursions);
}

TEST_CASE("centered sums") {
  const std::vector<std::uint64_t> t{1, 3, 2, 5};
  const auto u = centered_sums(2, t);
  CHECK(u.level == 2);
  CHECK(u.values == std::vector<std::int64_t>{-1, 0, 0, 3});
}

TEST_CASE("rho plus lookup") {
  const auto steps = seq({-1, +1, +1, -1, +1, +1, -1, -1});
  CHECK(rho_plus(WalkPath(steps), 1) == std::optional<std::uint64_t>(4));
  CHECK(rho_plus(WalkPath(steps), 2) == std::optional<std::uint64_t>(8));
  CHECK_FALSE(rho_plus(WalkPath(steps), 3).has_value());
}

TEST_CASE("identities hold on random walks and match the reference") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed);
    const auto steps = simulate_walk(1 << 16, rng);
    const WalkPath path(steps);
    const auto fast = verify_identities(path, 5, 6);
    const auto slow = verify_identities_reference(path, 5, 6);
    CHECK(fast.rho_plus_N == slow.rho_plus_N);
    REQUIRE(fast.levels.size() == slow.levels.size());
    for (std::size_t i = 0; i < fast.levels.size(); ++i) {
      const auto& a = fast.levels[i];
      const auto& b = slow.levels[i];
      CHECK(a.m == b.m);
      CHECK(a.visits == b.visits);
      CHECK(a.up == b.up);
      CHECK(a.down == b.down);
      CHECK(a.u_at_m == b.u_at_m);
      CHECK(a.sum_T_minus_1 == b.sum_T_minus_1);
    }
    CHECK(fast.all_hold());
    CHECK(fast.failures() == 0);
  }
}

TEST_CASE("first excursion law against a mass-propagation oracle") {
  for (int k : {1, 2, 3, 5}) {
    const auto dp = visit_law_by_dp(k, 12);
    const FirstExcursionLaw law(k);
    for (int m = 0; m < 12; ++m) CHECK(law.pmf(static_cast<std::uint64_t>(m)) == doctest::Approx(dp[static_cast<std::size_t>(m)]).epsilon(1e-9));
  }
  CHECK_THROWS(FirstExcursionLaw(0));
}

TEST_CASE("first excursion law exact fractions") {
  const FirstExcursionLaw two(2);
  CHECK(two.exact_pmf(0) == std::optional<Fraction>(Fraction{1, 2}));
  CHECK(two.exact_pmf(1) == std::optional<Fraction>(Fraction{1, 8}));
  CHECK(two.exact_pmf(2) == std::optional<Fraction>(Fraction{3, 32}));
  CHECK(FirstExcursionLaw(1).exact_pmf(0) == std::optional<Fraction>(Fraction{0, 1}));
  CHECK(FirstExcursionLaw(1).exact_pmf(3) == std::optional<Fraction>(Fraction{1, 8}));
}

TEST_CASE("first return visit tail") {
  CHECK(first_return_visit_tail(1, 1) == doctest::Approx(0.5));
  CHECK(first_return_visit_tail(2, 3) == doctest::Approx(0.25 * 0.75 * 0.75));
}

TEST_CASE("offspring variable is geometric") {
  RngStream rng(1);
  std::map<std::uint64_t, int> hist;
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto t = sample_T(rng);
    CHECK(t >= 1);
    ++hist[t];
    sum += static_cast<double>(t);
  }
  CHECK(sum / n == doctest::Approx(2.0).epsilon(0.01));
  CHECK(hist[1] / double(n) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(hist[2] / double(n) == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("branching process keeps its mean across both samplers") {
  RngStream rng(2);
  const int reps = 2000;
  double small = 0.0, large = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto a = simulate_gw(20, 3, rng);
    REQUIRE(a.z.size() == 4);
    CHECK(a.z[0] == 20);
    small += static_cast<double>(a.z[3]);
    large += static_cast<double>(simulate_gw(20000, 1, rng).z[1]);
  }
  // Var Z_3 = 3 N Var(T) = 120 for N = 20; Var Z_1 = 2N for N = 20000.
  CHECK(std::abs(small / reps - 20.0) < 4.0 * std::sqrt(120.0 / reps));
  CHECK(std::abs(large / reps - 20000.0) < 4.0 * std::sqrt(40000.0 / reps));
}

TEST_CASE("censored path ends at an upward return") {
  RngStream rng(3);
  const auto steps = censored_path_to_rho_plus(4, LevelWindow(-2, 5), rng);
  const WalkPath path(steps);
  CHECK(path.position(steps.size()) == 0);
  CHECK(steps.step(steps.size() - 1) == -1);
  const auto rp = rho_plus(path, 4);
  REQUIRE(rp.has_value());
  CHECK(*rp == steps.size());
  const auto report = verify_identities(path, 4, 5);
  CHECK(report.all_hold());
}

TEST_CASE("censored path supplies enough downcrossings") {
  RngStream rng(4);
  const auto steps = censored_path_with_downcrossings(3, 10, rng);
  for (std::int64_t k = 1; k <= 3; ++k)
    CHECK(extract_T_from_path(WalkPath(steps), k, 10).size() == 10);
}
