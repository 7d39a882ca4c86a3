// Wall-clock comparison of the OpenMP kernels with their serial references,
// and of the word-skipping local-time counter with a plain scan.
//
//   bench_kernels [workers] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "loctime/coupling.hpp"
#include "loctime/parallel.hpp"
#include "loctime/walk.hpp"

using namespace loctime;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double fast, bool same) {
  std::printf("%-34s %10.3f %10.3f %8.2fx  %s\n", name, serial, fast, serial / fast, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int workers = argc > 1 ? std::atoi(argv[1]) : 0;
  const std::uint64_t reps = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 64;
  const RngStream root(20241016);
  std::printf("workers %d, replications %llu\n", resolve_workers(workers), static_cast<unsigned long long>(reps));
  std::printf("%-34s %10s %10s %9s\n", "kernel", "serial s", "fast s", "speedup");

  // Replication loop: local-time profiles of 2^22-step walks.
  {
    const std::uint64_t n = std::uint64_t{1} << 22;
    const auto f = [&](std::uint64_t i) {
      auto r = root.child("profile", i);
      return stream_local_time_profile(n, LevelWindow(-3, 3), r).counts;
    };
    std::vector<std::vector<std::uint64_t>> a, b;
    const double ts = seconds([&] { a = replicate_serial(reps, f); });
    const double tp = seconds([&] { b = replicate(reps, workers, f); });
    row("profile 2^22, replicate", ts, tp, a == b);
  }

  // Replication loop: eta coupling errors up to 2^20.
  {
    std::vector<std::uint64_t> grid;
    for (int e = 10; e <= 20; ++e) grid.push_back(std::uint64_t{1} << e);
    const auto f = [&](std::uint64_t i) {
      auto r = root.child("eta", i);
      return stream_eta_errors(grid, r);
    };
    std::vector<std::vector<double>> a, b;
    const double ts = seconds([&] { a = replicate_serial(reps, f); });
    const double tp = seconds([&] { b = replicate(reps, workers, f); });
    row("eta errors 2^20, replicate", ts, tp, a == b);
  }

  // Single walk: plain scan against word skipping.
  {
    const std::uint64_t n = std::uint64_t{1} << 26;
    auto r1 = root.child("scan", 0);
    const auto steps = simulate_walk(n, r1);
    const WalkPath path(steps);
    std::uint64_t naive = 0;
    LocalTimeProfile fast;
    const double ts = seconds([&] { naive = local_time(path, 0, n); });
    auto r2 = root.child("scan", 0);
    const double tf = seconds([&] { fast = stream_local_time_profile(n, LevelWindow(0, 0), r2); });
    row("xi(0, 2^26): scan vs skip", ts, tf, naive == fast.at(0));
  }
  return 0;
}
