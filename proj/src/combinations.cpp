#include "htpkit/combinations.hpp"

#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace htpkit {

std::uint64_t binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t result = 1;
  for (Index i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays exact because C(n-k+i, i) is integral.
    const auto num = static_cast<std::uint64_t>(n - k + i);
    const std::uint64_t g = std::gcd(result, static_cast<std::uint64_t>(i));
    const std::uint64_t r = result / g;
    const std::uint64_t d = static_cast<std::uint64_t>(i) / g;
    if (r > kMax / num) return kMax;
    result = r * (num / d);
  }
  return result;
}

Combinations::Combinations(Index n, Index k) : n_(n), k_(k), count_(binomial(n, k)) {
  if (n < 0 || k < 0 || k > n) {
    throw Error(ErrorCode::invalid_argument, fmt::format("no {}-subsets of {} items", k, n));
  }
}

IndexSet Combinations::unrank(std::uint64_t rank) const {
  IndexSet combo;
  combo.reserve(static_cast<std::size_t>(k_));
  Index next = 0;
  for (Index slot = 0; slot < k_; ++slot) {
    // Skip first elements whose block of completions lies entirely before rank.
    for (;; ++next) {
      const std::uint64_t block = binomial(n_ - next - 1, k_ - slot - 1);
      if (rank < block) break;
      rank -= block;
    }
    combo.push_back(next++);
  }
  return combo;
}

bool Combinations::next(IndexSet& combo) const {
  Index i = k_ - 1;
  while (i >= 0 && combo[static_cast<std::size_t>(i)] == n_ - k_ + i) --i;
  if (i < 0) return false;
  ++combo[static_cast<std::size_t>(i)];
  for (Index j = i + 1; j < k_; ++j) combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

void EnumerationBudget::check(Index n, Index k, Index order) const {
  if (override_limits) return;
  const std::uint64_t count = binomial(n, k);
  if (n > max_ambient || order > max_order || count > max_evaluations) {
    throw Error(ErrorCode::enumeration_too_large,
                fmt::format("enumeration too large: C({}, {}) = {} supports (limits: N <= {}, "
                            "order <= {}, {} evaluations)",
                            n, k, count, max_ambient, max_order, max_evaluations));
  }
}

}  // namespace htpkit
