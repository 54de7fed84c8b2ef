#pragma once

// Replica farm. Replica r is a pure function of r (its randomness comes from
// replica_seed(master, r)), results land in slot r, and aggregation runs
// afterwards in replica order, so output does not depend on the thread count
// or on completion order.

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace slowstart {

/// Runs fn(r) for r = 0..n-1 on `threads` OpenMP threads (0 = runtime
/// default). The first exception thrown by any replica is rethrown.
template <class Result, class Fn>
std::vector<Result> run_replicas(std::size_t n, int threads, Fn&& fn) {
  std::vector<Result> results(n);
  std::exception_ptr error;
  const int team = threads > 0 ? threads : omp_get_max_threads();
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (long long r = 0; r < count; ++r) {
    try {
      results[static_cast<std::size_t>(r)] = fn(static_cast<std::size_t>(r));
    } catch (...) {
#pragma omp critical(slowstart_farm_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return results;
}

/// Serial reference with the same contract.
template <class Result, class Fn>
std::vector<Result> run_replicas_serial(std::size_t n, Fn&& fn) {
  std::vector<Result> results(n);
  for (std::size_t r = 0; r < n; ++r) results[r] = fn(r);
  return results;
}

}  // namespace slowstart
