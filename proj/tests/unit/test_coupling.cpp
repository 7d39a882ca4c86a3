#include <doctest.h>

#include <cmath>
#include <map>

#include "loctime/coupling.hpp"

using namespace loctime;

TEST_CASE("eta coupling error on a hand-made walk") {
  EmbeddedWalk walk;
  const std::vector<int> s{+1, -1, +1, -1};
  walk.steps = StepSequence::from_steps(s);
  EtaMarks marks{{0.5, 2.0}};
  const std::vector<std::uint64_t> grid{2, 4};
  const auto r = coupling_error_eta(walk, marks, grid);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0] == doctest::Approx(0.5));
  CHECK(r.errors[1] == doctest::Approx(0.5));
  CHECK_FALSE(r.fit.has_value());
}

TEST_CASE("streamed eta errors equal the materialized ones") {
  const std::vector<std::uint64_t> grid{64, 100, 1000, 4096, 50000};
  for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
    RngStream a(seed), b(seed);
    const auto sample = embed_walk(grid.back(), a, false);
    const auto full = coupling_error_eta(sample.walk, sample.marks, grid);
    const auto streamed = stream_eta_errors(grid, b);
    CHECK(full.errors == streamed);
  }
}

TEST_CASE("marks do not depend on whether times are drawn") {
  RngStream a(9), b(9);
  const auto with = embed_walk(2000, a, true);
  const auto without = embed_walk(2000, b, false);
  CHECK(with.walk.steps == without.walk.steps);
  CHECK(with.marks.eta == without.marks.eta);
  CHECK(with.walk.tau.size() == 2000);
  CHECK(without.walk.tau.empty());
  for (std::size_t i = 1; i < with.walk.tau.size(); ++i) CHECK(with.walk.tau[i] > with.walk.tau[i - 1]);
}

TEST_CASE("grid validation") {
  RngStream rng(1);
  CHECK_THROWS(stream_eta_errors(std::vector<std::uint64_t>{}, rng));
  CHECK_THROWS(stream_eta_errors(std::vector<std::uint64_t>{10, 5}, rng));
}

TEST_CASE("level embeddings") {
  RngStream rng(2);
  const auto levels = embed_U_sums(3, 50, rng);
  REQUIRE(levels.size() == 3);
  for (const auto& lv : levels) {
    CHECK(lv.sums.values.size() == 50);
    CHECK(lv.sigma.size() == 50);
    CHECK(lv.w_at_2j.size() == 50);
    for (std::size_t j = 1; j < lv.sigma.size(); ++j) CHECK(lv.sigma[j] >= lv.sigma[j - 1]);
  }
}

TEST_CASE("sheet coupling requires K cubed below the grid") {
  RngStream rng(3);
  CHECK_THROWS_AS(assemble_sheet_coupling(std::vector<std::uint64_t>{8, 64}, 3, rng), std::out_of_range);
}

TEST_CASE("sheet coupling error is the level maximum of its parts") {
  RngStream rng(4);
  const std::vector<std::uint64_t> grid{27, 64, 512};
  const auto s = assemble_sheet_coupling(grid, 3, rng);
  REQUIRE(s.sup_error.size() == grid.size());
  REQUIRE(s.centered.size() == 3);
  REQUIRE(s.g.size() == 3);
  CHECK(s.up_at_top.size() == 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double m = 0.0;
    for (std::size_t k = 0; k < 3; ++k) m = std::max(m, std::abs(s.centered[k][i] - s.g[k][i]));
    CHECK(s.sup_error[i] == doctest::Approx(m));
  }
}

TEST_CASE("splicing a stream with itself has zero error") {
  RngStream rng(5);
  const BlockSchedule sched(8);
  const auto w = sample_excursion_stream(sched, 3, rng);
  REQUIRE(w.size() == sched.total());
  const auto e = splice_errors(w, w, sched);
  CHECK(e.n.size() == 8);
  CHECK(e.n.back() == 256);
  for (double x : e.rho_gap) CHECK(x == 0.0);
  for (double x : e.level_gap) CHECK(x == 0.0);
}

TEST_CASE("small excursion records carry visit counts") {
  RngStream rng(6);
  const BlockSchedule sched(6);
  const auto w = sample_excursion_stream(sched, 2, rng);
  for (const auto& r : w) {
    CHECK(r.length % 2 == 0);
    if (r.small) {
      // Level 1 is visited at least once by an upward small excursion; visits
      // cannot exceed the time spent away from zero.
      CHECK(r.visits[0] + r.visits[1] < r.length);
    }
  }
}

TEST_CASE("return probability") {
  CHECK(return_probability(0) == 1.0);
  CHECK(return_probability(1) == doctest::Approx(0.5));
  CHECK(return_probability(2) == doctest::Approx(0.375));
  // Table and asymptotic series meet smoothly.
  const double a = return_probability(1024);
  const double b = return_probability(1025);
  CHECK(b / a == doctest::Approx((2.0 * 1025 - 1) / (2.0 * 1025)).epsilon(1e-12));
  const double c = return_probability(1026);
  CHECK(c / b == doctest::Approx((2.0 * 1026 - 1) / (2.0 * 1026)).epsilon(1e-12));
}

TEST_CASE("excursion length law") {
  RngStream rng(7);
  const int n = 400000;
  std::map<std::uint64_t, int> hist;
  for (int i = 0; i < n; ++i) ++hist[sample_excursion_length(rng)];
  // P(rho_1 = 2m) = u_{m-1} - u_m with u_m = C(2m, m) 4^-m.
  const double pmf[] = {0.5, 0.125, 0.0625, 5.0 / 128};
  for (int m = 1; m <= 4; ++m) {
    const double p = pmf[m - 1];
    CHECK(std::abs(hist[2 * m] / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
  for (const auto& [len, c] : hist) CHECK(len % 2 == 0);
}
