#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "loopsched/archspec.hpp"
#include "loopsched/ordering.hpp"
#include "loopsched/workload.hpp"

namespace loopsched {

/// Even: all operands promote levels at the same loop index.
/// Uneven: each operand promotes independently.
enum class MappingMode : std::uint8_t { Even, Uneven };

std::string_view mode_name(MappingMode m);
std::optional<MappingMode> parse_mode(std::string_view name);

/// A loop ordering bound to the memory hierarchy.
///
/// boundaries[op][t] is the loop index at which operand op's data
/// transitions into serving-chain level t+1: loops [0, boundaries[op][t])
/// are held at or below chain level t. Lists are non-decreasing and end
/// <= n; a transition that never happens records n.
struct TemporalMapping {
  LoopOrdering ordering;
  MappingMode mode = MappingMode::Uneven;
  std::array<std::vector<std::size_t>, kOperandCount> boundaries;

  std::vector<std::size_t>& boundaries_of(Operand op) {
    return boundaries[static_cast<std::size_t>(op)];
  }
  const std::vector<std::size_t>& boundaries_of(Operand op) const {
    return boundaries[static_cast<std::size_t>(op)];
  }

  bool operator==(const TemporalMapping&) const = default;
};

/// Bottom-up memory allocation: walks loops innermost to outermost and
/// assigns each to the lowest serving level whose capacity holds the
/// cumulative tile. Deterministic; the result is unique given the ordering.
/// Per-PE levels hold per-PE tiles; shared levels hold
/// p_total/reuse(op) distinct tiles at once.
/// Throws InfeasibleLowestLevel when a unit tile cannot fit an operand's
/// lowest serving level.
TemporalMapping allocate(const LoopOrdering& ordering, const LayerSpec& layer,
                         const ArchSpec& arch, const SpatialUnrolling& spatial,
                         MappingMode mode);

/// Groups layers with identical numeric fields (names ignored), preserving
/// first-occurrence order. Multiplicities sum to the input length.
std::vector<std::pair<LayerSpec, std::size_t>> unique_layers(
    const std::vector<LayerSpec>& network);

}  // namespace loopsched
