#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "loopsched/allocator.hpp"
#include "loopsched/archspec.hpp"
#include "loopsched/workload.hpp"

namespace loopsched {

struct AccessCounts {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;

  bool operator==(const AccessCounts&) const = default;
};

/// Per-(level, operand) access counts and energy terms. total_energy is the
/// optimization objective.
struct CostBreakdown {
  std::uint64_t mac_count = 0;
  /// Indexed [level][operand]; level indices follow ArchSpec::levels.
  std::vector<std::array<AccessCounts, kOperandCount>> accesses;
  std::vector<std::array<double, kOperandCount>> energy;
  double mac_energy_total = 0.0;
  double total_energy = 0.0;

  const AccessCounts& at(std::size_t level, Operand op) const {
    return accesses[level][static_cast<std::size_t>(op)];
  }

  bool operator==(const CostBreakdown&) const = default;
};

/// Words crossing one serving-chain transition over the whole execution.
struct BoundaryTraffic {
  std::uint64_t down = 0;  // words moved toward the PEs (fills / re-reads)
  std::uint64_t up = 0;    // words moved away from the PEs (drains)
};

/// Traffic across operand `op`'s transition into serving-chain level
/// `transition` (1-based chain position). Let tile be the operand footprint
/// of the loops below the boundary and A the iteration count of the loops
/// above it; the resident tile is refreshed F = A / r times, where r is the
/// product of the innermost contiguous run of operand-irrelevant loops above
/// the boundary (stationarity credit). I and W move tile*F words down. O
/// drains tile*F words up and re-reads tile*(F - R_rel) words down, with
/// R_rel the number of distinct output tiles above the boundary (the first
/// accumulation of each tile starts from zero). Counts are scaled by
/// p_total/reuse(op) distinct spatial streams.
BoundaryTraffic boundary_traffic(const TemporalMapping& mapping,
                                 const LayerSpec& layer, const ArchSpec& arch,
                                 const SpatialUnrolling& spatial, Operand op,
                                 std::size_t transition);

/// Full analytical evaluation of a mapping. Lowest serving levels absorb
/// one access per MAC per operand (O reads skip the first accumulation of
/// each output element); each boundary's down-traffic is read at the upper
/// level and written at the lower one, and vice versa for up-traffic.
CostBreakdown evaluate(const TemporalMapping& mapping, const LayerSpec& layer,
                       const ArchSpec& arch, const SpatialUnrolling& spatial);

enum class Metric : std::uint8_t { Energy, Latency, Edp };

/// The scalar objective. Only Metric::Energy is implemented; Latency and
/// Edp are reserved extension points and throw UnsupportedMetric.
double objective(const CostBreakdown& cb, Metric metric = Metric::Energy);

}  // namespace loopsched
