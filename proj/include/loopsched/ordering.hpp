#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "loopsched/rng.hpp"
#include "loopsched/workload.hpp"

namespace loopsched {

/// Exact (arbitrary-precision) ordering-space size; n of 20+ overflows
/// 64-bit factorials.
using OrderingCount = boost::multiprecision::cpp_int;

/// A temporal loop ordering. Index 0 is the innermost loop.
struct LoopOrdering {
  std::vector<Loop> loops;

  std::size_t size() const { return loops.size(); }
  bool empty() const { return loops.empty(); }

  bool operator==(const LoopOrdering&) const = default;
};

/// Number of distinct permutations of the loop multiset:
/// n! / prod(k_i!) with k_i the multiplicity of each distinct (dim, factor)
/// entry. Empty list counts as 1.
OrderingCount count_distinct_orderings(const std::vector<Loop>& loops);

/// Streams every distinct permutation exactly once, in lexicographic order
/// under the canonical loop order. Usage:
///
///   OrderingStream s(loops);
///   do { visit(s.current()); } while (s.advance());
class OrderingStream {
 public:
  explicit OrderingStream(std::vector<Loop> loops);

  const LoopOrdering& current() const { return current_; }

  /// Steps to the next permutation; false once the stream is exhausted.
  bool advance();

 private:
  LoopOrdering current_;
};

/// Copy of `o` with entries i and j exchanged.
/// Throws std::out_of_range / std::invalid_argument on bad indices.
LoopOrdering swap_neighbor(const LoopOrdering& o, std::size_t i,
                           std::size_t j);

struct SwapSample {
  LoopOrdering ordering;
  std::size_t i, j;
};

/// Draws i uniformly from [0,n) and j uniformly from [0,n)\{i} (two bounded
/// draws), returning the swapped copy. Throws std::invalid_argument when
/// n < 2.
SwapSample sample_swap(const LoopOrdering& o, Rng& rng);

/// Uniform random permutation (Fisher-Yates) of the loop list.
LoopOrdering random_ordering(std::vector<Loop> loops, Rng& rng);

namespace detail {

/// Permutation with the given lexicographic rank (0-based) of the loop
/// multiset; used to partition the exhaustive stream across workers.
LoopOrdering ordering_at_rank(const std::vector<Loop>& loops,
                              OrderingCount rank);

}  // namespace detail

}  // namespace loopsched
