#pragma once

#include <cstdint>
#include <vector>

#include "htpkit/core.hpp"

namespace htpkit {

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(Index n, Index k);

/// k-subsets of {0..n-1} in lexicographic order, addressable by rank so that
/// workers can start from the middle of the sequence.
class Combinations {
 public:
  Combinations(Index n, Index k);

  std::uint64_t count() const { return count_; }

  /// The combination at lexicographic position `rank`.
  IndexSet unrank(std::uint64_t rank) const;

  /// Advances `combo` to its lexicographic successor; false after the last.
  bool next(IndexSet& combo) const;

 private:
  Index n_;
  Index k_;
  std::uint64_t count_;
};

/// Limits for exhaustive enumeration. `override_limits` lifts every cap.
struct EnumerationBudget {
  Index max_ambient = 20;
  Index max_order = 6;
  std::uint64_t max_evaluations = 2'000'000;
  bool override_limits = false;

  static EnumerationBudget for_uniqueness() { return {}; }
  static EnumerationBudget for_ric() { return {16, 5, 2'000'000, false}; }

  /// Throws enumeration_too_large (with the count) if C(n, subset_size)
  /// exceeds max_evaluations, n exceeds max_ambient, or `order` (the sparsity
  /// or RIC order driving the enumeration) exceeds max_order.
  void check(Index n, Index subset_size, Index order) const;
};

enum class Execution { serial, parallel };

}  // namespace htpkit
