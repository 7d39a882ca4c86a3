#include <doctest.h>

#include <sstream>

#include "loctime/walk.hpp"

using namespace loctime;

namespace {

StepSequence seq(std::initializer_list<int> s) {
  const std::vector<int> v(s);
  return StepSequence::from_steps(v);
}

// Naive oracle: count visits directly from the step list.
std::uint64_t brute_local_time(const std::vector<int>& steps, std::int64_t k, std::uint64_t n) {
  std::int64_t s = 0;
  std::uint64_t c = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    s += steps[i];
    c += (s == k);
  }
  return c;
}

}  // namespace

TEST_CASE("local times of an alternating path") {
  const auto steps = seq({+1, -1, +1, -1});
  const WalkPath path(steps);
  CHECK(local_time(path, 0, 4) == 2);
  CHECK(local_time(path, 1, 4) == 2);
  CHECK(local_time(path, 2, 4) == 0);
}

TEST_CASE("local times of a tent path") {
  const auto steps = seq({+1, +1, -1, -1});
  const WalkPath path(steps);
  CHECK(local_time(path, 0, 4) == 1);
  CHECK(local_time(path, 1, 4) == 2);
  CHECK(local_time(path, 2, 4) == 1);
  CHECK(centered_local_time(path, 1, 4) == 1);
}

TEST_CASE("time zero and out-of-range times") {
  const auto steps = seq({+1, -1});
  const WalkPath path(steps);
  CHECK(local_time(path, 0, 0) == 0);
  CHECK_THROWS_AS(local_time(path, 0, 3), std::out_of_range);
}

TEST_CASE("bit packing round-trips across word boundaries") {
  RngStream rng(3);
  const auto steps = simulate_walk(1000, rng);
  CHECK(steps.size() == 1000);
  const auto v = steps.to_vector();
  CHECK(StepSequence::from_steps(v) == steps);
  StepSequence rebuilt;
  rebuilt.append_range(steps, 0, 77);
  rebuilt.append_range(steps, 77, 1000);
  CHECK(rebuilt == steps);
  const WalkPath path(steps);
  const auto pos = path.positions(1000);
  std::int64_t s = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    s += v[i];
    CHECK(pos[i + 1] == s);
  }
  CHECK(path.position(1000) == s);
  CHECK(path.position(0) == 0);
}

TEST_CASE("snapshots round-trip") {
  RngStream rng(4);
  const auto steps = simulate_walk(4321, rng);
  std::stringstream buf;
  write_snapshot(buf, steps);
  CHECK(read_snapshot(buf) == steps);
}

TEST_CASE("profile partitions time and matches the direct count") {
  RngStream rng(5);
  const auto steps = simulate_walk(20000, rng);
  const WalkPath path(steps);
  const auto v = steps.to_vector();
  const auto prof = local_time_profile(path, 20000, LevelWindow(-5, 7), 100);
  CHECK(prof.total() == 20000);
  for (std::int64_t k = -5; k <= 7; ++k) CHECK(prof.at(k) == brute_local_time(v, k, 20000));
  REQUIRE(prof.zero_series.size() == 200);
  for (std::size_t m = 0; m < prof.zero_series.size(); ++m)
    CHECK(prof.zero_series[m] == brute_local_time(v, 0, 100 * (m + 1)));
}

TEST_CASE("streamed profile with word skipping equals the stored-path profile") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    for (std::uint64_t n : {1ULL, 63ULL, 64ULL, 65ULL, 100000ULL}) {
      RngStream a(seed), b(seed);
      const auto steps = simulate_walk(n, a);
      const auto stored = local_time_profile(WalkPath(steps), n, LevelWindow(0, 3));
      const auto streamed = stream_local_time_profile(n, LevelWindow(0, 3), b);
      CHECK(stored.counts == streamed.counts);
      CHECK(stored.below == streamed.below);
      CHECK(stored.above == streamed.above);
    }
  }
}

TEST_CASE("censored walk stays in its window and returns through the boundary") {
  RngStream rng(9);
  CensoredWalk walk(LevelWindow(0, 3), true);
  for (int i = 0; i < 10000; ++i) {
    const auto s = walk.step(rng);
    CHECK(s >= 0);
    CHECK(s <= 3);
  }
  CHECK(walk.steps().size() == walk.time());
  // Recorded steps replay to the same position.
  CHECK(WalkPath(walk.steps()).position(walk.time()) == walk.position());
}

TEST_CASE("level window validation") {
  CHECK_THROWS(LevelWindow(3, 1));
  CHECK(LevelWindow(-2, 2).width() == 5);
}
