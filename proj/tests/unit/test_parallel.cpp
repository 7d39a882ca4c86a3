#include <doctest.h>

#include <stdexcept>

#include "loctime/parallel.hpp"
#include "loctime/rng.hpp"

using namespace loctime;

TEST_CASE("parallel replication equals the serial reference") {
  const RngStream root(99);
  const auto f = [&](std::uint64_t i) {
    auto r = root.child("rep", i);
    double s = 0.0;
    for (int j = 0; j < 100; ++j) s += r.normal();
    return s;
  };
  const auto serial = replicate_serial(257, f);
  for (int w : {1, 2, 3, 8}) CHECK(replicate(257, w, f) == serial);
  CHECK(replicate(0, 2, f).empty());
}

TEST_CASE("exceptions propagate out of the parallel loop") {
  const auto f = [](std::uint64_t i) -> int {
    if (i == 17) throw std::runtime_error("boom");
    return static_cast<int>(i);
  };
  CHECK_THROWS_WITH_AS(replicate(40, 4, f), "boom", std::runtime_error);
}

TEST_CASE("worker resolution") {
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}
