#include "loopsched/ordering.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace loopsched {

namespace {

// Multiplicities of the distinct entries of a sorted loop list.
std::vector<std::uint64_t> multiplicities(const std::vector<Loop>& sorted) {
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i] != sorted[i - 1]) {
      counts.push_back(1);
    } else {
      ++counts.back();
    }
  }
  return counts;
}

OrderingCount factorial(std::uint64_t n) {
  OrderingCount f = 1;
  for (std::uint64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

OrderingCount count_distinct_orderings(const std::vector<Loop>& loops) {
  std::vector<Loop> sorted = loops;
  std::sort(sorted.begin(), sorted.end());
  OrderingCount d = factorial(sorted.size());
  for (std::uint64_t k : multiplicities(sorted)) d /= factorial(k);
  return d;
}

OrderingStream::OrderingStream(std::vector<Loop> loops) {
  std::sort(loops.begin(), loops.end());
  current_.loops = std::move(loops);
}

bool OrderingStream::advance() {
  return std::next_permutation(current_.loops.begin(), current_.loops.end());
}

LoopOrdering swap_neighbor(const LoopOrdering& o, std::size_t i,
                           std::size_t j) {
  if (i >= o.size() || j >= o.size()) {
    throw std::out_of_range("swap_neighbor: index out of range");
  }
  if (i == j) {
    throw std::invalid_argument("swap_neighbor: indices must differ");
  }
  LoopOrdering out = o;
  std::swap(out.loops[i], out.loops[j]);
  return out;
}

SwapSample sample_swap(const LoopOrdering& o, Rng& rng) {
  const std::size_t n = o.size();
  if (n < 2) {
    throw std::invalid_argument("sample_swap: ordering too short");
  }
  const std::size_t i = rng.uniform_index(n);
  std::size_t j = rng.uniform_index(n - 1);
  if (j >= i) ++j;  // uniform over [0,n) \ {i}
  return {swap_neighbor(o, i, j), i, j};
}

LoopOrdering random_ordering(std::vector<Loop> loops, Rng& rng) {
  for (std::size_t k = loops.size(); k > 1; --k) {
    std::swap(loops[k - 1], loops[rng.uniform_index(k)]);
  }
  return {std::move(loops)};
}

namespace detail {

LoopOrdering ordering_at_rank(const std::vector<Loop>& loops,
                              OrderingCount rank) {
  std::vector<Loop> sorted = loops;
  std::sort(sorted.begin(), sorted.end());

  // Distinct values and their remaining multiplicities.
  std::vector<Loop> values;
  std::vector<std::uint64_t> counts;
  for (const Loop& l : sorted) {
    if (values.empty() || !(values.back() == l)) {
      values.push_back(l);
      counts.push_back(1);
    } else {
      ++counts.back();
    }
  }

  OrderingCount remaining_perms = count_distinct_orderings(sorted);
  if (rank >= remaining_perms) {
    throw std::out_of_range("ordering_at_rank: rank out of range");
  }

  std::vector<Loop> out;
  out.reserve(sorted.size());
  for (std::size_t m = sorted.size(); m > 0; --m) {
    for (std::size_t v = 0; v < values.size(); ++v) {
      if (counts[v] == 0) continue;
      // Permutations starting with values[v]; the division is exact.
      OrderingCount with_v = remaining_perms * counts[v] / m;
      if (rank < with_v) {
        out.push_back(values[v]);
        --counts[v];
        remaining_perms = std::move(with_v);
        break;
      }
      rank -= with_v;
    }
  }
  return {std::move(out)};
}

}  // namespace detail

}  // namespace loopsched
