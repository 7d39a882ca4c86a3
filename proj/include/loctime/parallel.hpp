#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace loctime {

inline int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

/// Runs f(i) for i = 0..reps-1 and stores results by index, so the output
/// never depends on scheduling or on the worker count. The first exception
/// thrown by any replication is rethrown after the loop.
template <class F>
auto replicate(std::uint64_t reps, int workers, F&& f) {
  using R = std::invoke_result_t<F&, std::uint64_t>;
  static_assert(!std::is_same_v<R, bool>, "vector<bool> cannot take concurrent writes");
  std::vector<R> out(reps);
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto n = static_cast<std::int64_t>(reps);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::uint64_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// Serial reference for replicate().
template <class F>
auto replicate_serial(std::uint64_t reps, F&& f) {
  using R = std::invoke_result_t<F&, std::uint64_t>;
  std::vector<R> out;
  out.reserve(reps);
  for (std::uint64_t i = 0; i < reps; ++i) out.push_back(f(i));
  return out;
}

}  // namespace loctime
