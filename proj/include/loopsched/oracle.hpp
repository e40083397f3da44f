#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "loopsched/allocator.hpp"
#include "loopsched/costmodel.hpp"

namespace loopsched {

/// Access counts observed by literal loop-nest simulation.
struct SimTrace {
  /// Same shape as CostBreakdown::accesses: [level][operand].
  std::vector<std::array<AccessCounts, kOperandCount>> accesses;
  std::uint64_t iterations_executed = 0;

  bool operator==(const SimTrace&) const = default;
};

inline constexpr std::uint64_t kDefaultSimBudget = 1'000'000;

/// Ground truth for `evaluate`: executes the temporal loop nest iteration
/// by iteration, tracking the resident tile of every operand at every
/// serving level and counting each fill, drain, re-read, and datapath
/// access as it happens. Temporal-only (no spatial unrolling).
/// Throws BudgetExceeded when the iteration space exceeds the budget.
SimTrace simulate(const TemporalMapping& mapping, const LayerSpec& layer,
                  const ArchSpec& arch,
                  std::uint64_t iteration_budget = kDefaultSimBudget);

struct BruteForceResult {
  TemporalMapping mapping;
  CostBreakdown cost;
  std::uint64_t evaluations = 0;
};

inline constexpr std::uint64_t kDefaultBruteForceCap = 100'000;

/// Serial reference search: evaluates every distinct ordering and returns
/// the minimum-objective mapping, first-encountered tie-break. Kept
/// deliberately simple; the engines module provides the parallel variant.
/// Throws SpaceTooLarge when the ordering count exceeds the cap.
BruteForceResult brute_force_best(
    const LayerSpec& layer, const ArchSpec& arch,
    const SpatialUnrolling& spatial, MappingMode mode,
    std::uint64_t max_orderings = kDefaultBruteForceCap);

}  // namespace loopsched
