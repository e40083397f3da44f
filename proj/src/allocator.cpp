#include "loopsched/allocator.hpp"

#include <algorithm>

#include "loopsched/errors.hpp"

namespace loopsched {

std::string_view mode_name(MappingMode m) {
  return m == MappingMode::Even ? "even" : "uneven";
}

std::optional<MappingMode> parse_mode(std::string_view name) {
  if (name == "even") return MappingMode::Even;
  if (name == "uneven") return MappingMode::Uneven;
  return std::nullopt;
}

namespace {

// Occupancy check of one operand's tile against one level. Shared levels
// hold p_total/reuse distinct per-PE tiles at once.
bool tile_fits(const MemoryLevel& level, Operand op, std::uint64_t tile_words,
               const LayerSpec& layer, const SpatialUnrolling& spatial) {
  if (level.unbounded()) return true;
  const auto scale = spatial_scale(op, spatial);
  const std::uint64_t copies = level.shared ? scale.p_total / scale.reuse : 1;
  const unsigned __int128 bits =
      static_cast<unsigned __int128>(tile_words) * copies *
      layer.word_bits[static_cast<std::size_t>(op)];
  return bits <= *level.capacity_bits;
}

void check_lowest_level_feasible(const LayerSpec& layer, const ArchSpec& arch,
                                 const SpatialUnrolling& spatial) {
  for (Operand op : kAllOperands) {
    const auto chain = arch.serving_chain(op);
    const std::uint64_t unit = tile_footprint(op, kUnitTile, layer);
    if (!tile_fits(arch.levels[chain.front()], op, unit, layer, spatial)) {
      throw InfeasibleLowestLevel(
          std::string("a single ") + std::string(operand_name(op)) +
          " word does not fit level '" + arch.levels[chain.front()].name +
          "'");
    }
  }
}

}  // namespace

TemporalMapping allocate(const LoopOrdering& ordering, const LayerSpec& layer,
                         const ArchSpec& arch, const SpatialUnrolling& spatial,
                         MappingMode mode) {
  check_lowest_level_feasible(layer, arch, spatial);

  const std::size_t n = ordering.size();
  TemporalMapping mapping;
  mapping.ordering = ordering;
  mapping.mode = mode;

  if (mode == MappingMode::Uneven) {
    for (Operand op : kAllOperands) {
      const auto chain = arch.serving_chain(op);
      auto& bounds = mapping.boundaries_of(op);
      bounds.assign(chain.size() - 1, n);

      TileSizes tile = kUnitTile;
      std::size_t pos = 0;  // current chain position
      for (std::size_t i = 0; i < n; ++i) {
        tile[static_cast<std::size_t>(ordering.loops[i].dim)] *=
            ordering.loops[i].factor;
        const std::uint64_t fp = tile_footprint(op, tile, layer);
        while (pos + 1 < chain.size() &&
               !tile_fits(arch.levels[chain[pos]], op, fp, layer, spatial)) {
          bounds[pos] = i;  // loop i transitions into chain[pos + 1]
          ++pos;
        }
      }
    }
    return mapping;
  }

  // Even mode: one shared walk over the architecture's level ladder. A loop
  // sits at ladder position p; operand data lives at its lowest serving
  // level with index >= p. Any overflow promotes the loop for everyone.
  std::array<std::vector<std::size_t>, kOperandCount> chains;
  for (Operand op : kAllOperands) {
    chains[static_cast<std::size_t>(op)] = arch.serving_chain(op);
  }
  const auto level_at_or_above = [&](Operand op, std::size_t p) {
    const auto& chain = chains[static_cast<std::size_t>(op)];
    return *std::lower_bound(chain.begin(), chain.end(), p);
  };

  std::vector<std::size_t> ladder_pos(n, 0);
  TileSizes tile = kUnitTile;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tile[static_cast<std::size_t>(ordering.loops[i].dim)] *=
        ordering.loops[i].factor;
    bool fits;
    do {
      fits = true;
      for (Operand op : kAllOperands) {
        const std::size_t lvl = level_at_or_above(op, pos);
        const std::uint64_t fp = tile_footprint(op, tile, layer);
        if (!tile_fits(arch.levels[lvl], op, fp, layer, spatial)) {
          fits = false;
          break;
        }
      }
      if (!fits) ++pos;  // top level is unbounded, so this terminates
    } while (!fits);
    ladder_pos[i] = pos;
  }

  // Project the shared ladder onto each operand's chain.
  for (Operand op : kAllOperands) {
    const auto& chain = chains[static_cast<std::size_t>(op)];
    auto& bounds = mapping.boundaries_of(op);
    bounds.assign(chain.size() - 1, n);
    for (std::size_t t = 0; t + 1 < chain.size(); ++t) {
      // First loop strictly above chain[t] on the ladder.
      for (std::size_t i = 0; i < n; ++i) {
        if (ladder_pos[i] > chain[t]) {
          bounds[t] = i;
          break;
        }
      }
    }
  }
  return mapping;
}

std::vector<std::pair<LayerSpec, std::size_t>> unique_layers(
    const std::vector<LayerSpec>& network) {
  std::vector<std::pair<LayerSpec, std::size_t>> groups;
  for (const LayerSpec& layer : network) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return g.first.same_shape(layer);
    });
    if (it == groups.end()) {
      groups.emplace_back(layer, 1);
    } else {
      ++it->second;
    }
  }
  return groups;
}

}  // namespace loopsched
