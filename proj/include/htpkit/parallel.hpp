#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <vector>

#include <omp.h>

#include "htpkit/combinations.hpp"

namespace htpkit::detail {

/// Folds `visit(partial, combo)` over every combination and merges partials.
///
/// The serial path walks the sequence once. The parallel path cuts the rank
/// range into contiguous chunks, folds each chunk on some thread, and merges
/// the per-chunk partials in rank order, so a merge that is associative gives
/// the same answer as the serial path regardless of scheduling.
template <typename Partial, typename Visit, typename Merge>
Partial reduce_combinations(const Combinations& combos, Execution execution, const Partial& init,
                            Visit visit, Merge merge) {
  const std::uint64_t total = combos.count();
  if (total == 0) return init;

  auto fold_range = [&](std::uint64_t begin, std::uint64_t end) {
    Partial partial = init;
    IndexSet combo = combos.unrank(begin);
    for (std::uint64_t rank = begin; rank < end; ++rank) {
      visit(partial, combo);
      if (rank + 1 < end) combos.next(combo);
    }
    return partial;
  };

  if (execution == Execution::serial) return fold_range(0, total);

  const std::uint64_t chunks = std::min<std::uint64_t>(
      total, static_cast<std::uint64_t>(std::max(1, omp_get_max_threads())) * 8);
  std::vector<Partial> partials(chunks, init);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const auto cu = static_cast<std::uint64_t>(c);
    try {
      partials[cu] = fold_range(total * cu / chunks, total * (cu + 1) / chunks);
    } catch (...) {
#pragma omp critical(htpkit_reduce_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  Partial result = std::move(partials.front());
  for (std::uint64_t c = 1; c < chunks; ++c) merge(result, std::move(partials[c]));
  return result;
}

/// Runs `body(i)` for i in [0, count), on OpenMP threads when parallel.
template <typename Body>
void for_each_index(std::int64_t count, Execution execution, int workers, Body body) {
  if (execution == Execution::serial) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(htpkit_index_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace htpkit::detail
