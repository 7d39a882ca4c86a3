#include <doctest.h>

#include <cmath>

#include "loctime/excursions.hpp"

using namespace loctime;

namespace {

StepSequence seq(std::initializer_list<int> s) {
  const std::vector<int> v(s);
  return StepSequence::from_steps(v);
}

}  // namespace

TEST_CASE("return times and upward returns") {
  const auto steps = seq({+1, -1, -1, +1, +1, +1, -1, -1});
  const auto r = return_times(WalkPath(steps), 8);
  CHECK(r.rho == std::vector<std::uint64_t>{2, 4, 8});
  CHECK(r.rho_plus == std::vector<std::uint64_t>{2, 8});
}

TEST_CASE("excursions of the tent path") {
  const auto steps = seq({+1, +1, -1, -1});
  const auto at1 = classify_excursions(WalkPath(steps), 1);
  REQUIRE(at1.size() == 1);
  CHECK(at1[0] == Excursion{1, 3, Direction::up});
  const auto at0 = classify_excursions(WalkPath(steps), 0);
  REQUIRE(at0.size() == 1);
  CHECK(at0[0].length() == 4);
}

TEST_CASE("incomplete trailing excursions are dropped") {
  const auto steps = seq({+1, -1, -1, -1});
  CHECK(classify_excursions(WalkPath(steps), 0).size() == 1);
}

TEST_CASE("directional local time counts departures") {
  const auto steps = seq({+1, -1});
  const auto d = directional_counts(WalkPath(steps), 1, 2);
  CHECK(d.down == 1);
  CHECK(d.up == 0);
  const auto tent = seq({+1, +1, -1, -1});
  const auto t1 = directional_counts(WalkPath(tent), 1, 4);
  CHECK(t1.up == 1);
  CHECK(t1.down == 1);
  CHECK(directional_counts(WalkPath(tent), 0, 4).up == 1);
}

TEST_CASE("up plus down equals visits away from the level") {
  RngStream rng(2);
  const auto steps = simulate_walk(5000, rng);
  const WalkPath path(steps);
  for (std::int64_t k = 1; k <= 4; ++k) {
    const auto d = directional_counts(path, k, 5000);
    const auto visits = local_time(path, k, 5000);
    const bool at_k = path.position(5000) == k;
    CHECK(d.up + d.down == visits - (at_k ? 1 : 0));
  }
}

TEST_CASE("block schedule") {
  const BlockSchedule s(5);
  CHECK(s.boundary(0) == 0);
  CHECK(s.boundary(1) == 2);
  CHECK(s.boundary(5) == 32);
  CHECK(s.block_size(1) == 2);
  CHECK(s.block_size(3) == 4);
  CHECK(s.threshold(3) == doctest::Approx(std::pow(4.0, 4.0 / 3.0)));
  CHECK(s.is_large(3, 7));
  CHECK_FALSE(s.is_large(3, 6));
  CHECK(s.total() == 32);
}

TEST_CASE("splice plan keeps large excursions and fills small ones in order") {
  const BlockSchedule s(2);  // blocks {0,1} and {2,3}; thresholds 2^{4/3}, 2^{4/3}
  const std::vector<std::uint64_t> a{2, 10, 2, 2};
  const std::vector<std::uint64_t> b{12, 2, 2, 14};
  const auto plan = splice_plan(a, b, s);
  const std::vector<SpliceChoice> want{{2, 1}, {1, 1}, {2, 2}, {1, 3}};
  CHECK(plan == want);
  CHECK_THROWS_AS(splice_plan(std::vector<std::uint64_t>{2}, b, s), InsufficientExcursions);
}

TEST_CASE("splicing a walk with itself returns its prefix") {
  RngStream rng(8);
  const auto steps = simulate_walk(1 << 18, rng);
  const WalkPath path(steps);
  const auto rho = return_times(path, steps.size()).rho;
  REQUIRE(rho.size() >= 64);
  const BlockSchedule s(6);
  StepSequence prefix;
  prefix.append_range(steps, 0, rho[63]);
  CHECK(splice_walks(path, path, s) == prefix);
}

TEST_CASE("spliced walk returns to zero exactly N_L times") {
  RngStream r1(10), r2(11);
  const auto w1 = simulate_walk(1 << 18, r1);
  const auto w2 = simulate_walk(1 << 18, r2);
  const BlockSchedule s(5);
  const auto spliced = splice_walks(WalkPath(w1), WalkPath(w2), s);
  const auto r = return_times(WalkPath(spliced), spliced.size());
  CHECK(r.rho.size() == 32);
  CHECK(r.rho.back() == spliced.size());
}
