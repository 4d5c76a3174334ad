#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace schrocurve {

/// Worker count used when callers pass 0: SCHROCURVE_WORKERS, else hardware concurrency.
unsigned default_workers();

/**
 * Runs body(i) for i in [0, count) on up to `workers` threads (0 = default).
 * Work items are claimed dynamically; the first exception is rethrown after
 * all threads join. Callers store results by index so the outcome does not
 * depend on scheduling.
 */
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned workers, Fn&& fn) {
  std::vector<T> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

/// Pairwise sum in index order; identical for any worker count.
double pairwise_sum(const std::vector<double>& values);

}  // namespace schrocurve
