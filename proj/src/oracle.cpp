#include "loopsched/oracle.hpp"

#include <unordered_set>

#include "loopsched/errors.hpp"
#include "loopsched/ordering.hpp"

namespace loopsched {

namespace {

// Resident-tile watcher for one serving-chain transition. The tile held
// below the boundary is identified by the current indices of the
// operand-relevant loops above it; any change is a refresh event.
struct BoundaryWatcher {
  Operand op;
  std::size_t lower_level, upper_level;
  std::uint64_t tile_words;
  std::vector<std::size_t> id_positions;  // relevant loop positions >= boundary
  std::vector<std::uint64_t> id_strides;  // mixed-radix packing
  std::uint64_t resident_id = 0;
  std::uint64_t fills = 0;     // I/W: tiles moved down
  std::uint64_t drains = 0;    // O: tiles moved up
  std::uint64_t rereads = 0;   // O: partial-sum tiles moved back down
  std::unordered_set<std::uint64_t> touched;  // O: tiles accumulated before

  std::uint64_t pack(const std::vector<std::uint64_t>& idx) const {
    std::uint64_t id = 0;
    for (std::size_t p = 0; p < id_positions.size(); ++p) {
      id += idx[id_positions[p]] * id_strides[p];
    }
    return id;
  }
};

}  // namespace

SimTrace simulate(const TemporalMapping& mapping, const LayerSpec& layer,
                  const ArchSpec& arch, std::uint64_t iteration_budget) {
  const auto& loops = mapping.ordering.loops;
  const std::size_t n = loops.size();

  std::uint64_t iterations = 1;
  for (const Loop& l : loops) {
    iterations *= l.factor;
    if (iterations > iteration_budget) {
      throw BudgetExceeded("simulation budget exceeded: > " +
                           std::to_string(iteration_budget) + " iterations");
    }
  }

  SimTrace trace;
  trace.accesses.assign(arch.levels.size(), {});
  trace.iterations_executed = iterations;

  const auto acc = [&](std::size_t level, Operand op) -> AccessCounts& {
    return trace.accesses[level][static_cast<std::size_t>(op)];
  };

  std::vector<BoundaryWatcher> watchers;
  std::array<std::size_t, kOperandCount> lowest_level{};
  // Output-element first-touch tracking at the datapath.
  std::vector<std::size_t> out_positions;
  std::vector<std::uint64_t> out_strides;
  for (Operand op : kAllOperands) {
    const auto chain = arch.serving_chain(op);
    lowest_level[static_cast<std::size_t>(op)] = chain.front();
    for (std::size_t t = 1; t < chain.size(); ++t) {
      BoundaryWatcher w;
      w.op = op;
      w.lower_level = chain[t - 1];
      w.upper_level = chain[t];
      const std::size_t b = mapping.boundaries_of(op)[t - 1];
      TileSizes tile = kUnitTile;
      for (std::size_t i = 0; i < b; ++i) {
        tile[static_cast<std::size_t>(loops[i].dim)] *= loops[i].factor;
      }
      w.tile_words = tile_footprint(op, tile, layer);
      std::uint64_t stride = 1;
      for (std::size_t i = b; i < n; ++i) {
        if (operand_relevance(loops[i].dim, op)) {
          w.id_positions.push_back(i);
          w.id_strides.push_back(stride);
          stride *= loops[i].factor;
        }
      }
      watchers.push_back(std::move(w));
    }
  }
  {
    std::uint64_t stride = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (operand_relevance(loops[i].dim, Operand::Output)) {
        out_positions.push_back(i);
        out_strides.push_back(stride);
        stride *= loops[i].factor;
      }
    }
  }

  std::vector<std::uint64_t> idx(n, 0);
  std::unordered_set<std::uint64_t> outputs_touched;

  for (std::uint64_t it = 0; it < iterations; ++it) {
    // Datapath accesses at each operand's lowest serving level.
    acc(lowest_level[static_cast<std::size_t>(Operand::Input)], Operand::Input)
        .reads++;
    acc(lowest_level[static_cast<std::size_t>(Operand::Weight)],
        Operand::Weight)
        .reads++;
    auto& out_acc = acc(
        lowest_level[static_cast<std::size_t>(Operand::Output)],
        Operand::Output);
    out_acc.writes++;
    std::uint64_t out_id = 0;
    for (std::size_t p = 0; p < out_positions.size(); ++p) {
      out_id += idx[out_positions[p]] * out_strides[p];
    }
    if (!outputs_touched.insert(out_id).second) {
      out_acc.reads++;  // accumulating onto an already-started element
    }

    // Resident-tile changes at every boundary.
    for (BoundaryWatcher& w : watchers) {
      const std::uint64_t id = w.pack(idx);
      if (it == 0) {
        w.resident_id = id;
        if (w.op == Operand::Output) {
          w.touched.insert(id);
        } else {
          w.fills++;
        }
        continue;
      }
      if (id == w.resident_id) continue;
      if (w.op == Operand::Output) {
        w.drains++;  // evict the finished/suspended partial-sum tile
        if (!w.touched.insert(id).second) {
          w.rereads++;  // resume accumulation on a suspended tile
        }
      } else {
        w.fills++;
      }
      w.resident_id = id;
    }

    // Odometer step, innermost loop fastest.
    for (std::size_t p = 0; p < n; ++p) {
      if (++idx[p] < loops[p].factor) break;
      idx[p] = 0;
    }
  }

  // The last resident output tiles leave the hierarchy when the nest ends.
  for (BoundaryWatcher& w : watchers) {
    if (w.op == Operand::Output) w.drains++;
  }

  for (const BoundaryWatcher& w : watchers) {
    const std::uint64_t down =
        (w.op == Operand::Output ? w.rereads : w.fills) * w.tile_words;
    const std::uint64_t up =
        (w.op == Operand::Output ? w.drains : 0) * w.tile_words;
    acc(w.upper_level, w.op).reads += down;
    acc(w.lower_level, w.op).writes += down;
    acc(w.lower_level, w.op).reads += up;
    acc(w.upper_level, w.op).writes += up;
  }
  return trace;
}

BruteForceResult brute_force_best(const LayerSpec& layer, const ArchSpec& arch,
                                  const SpatialUnrolling& spatial,
                                  MappingMode mode,
                                  std::uint64_t max_orderings) {
  const std::vector<Loop> lpfs = lpf_decompose(layer, spatial);
  const OrderingCount count = count_distinct_orderings(lpfs);
  if (count > max_orderings) {
    throw SpaceTooLarge("ordering space of " + count.str() +
                        " exceeds the brute-force cap of " +
                        std::to_string(max_orderings));
  }

  BruteForceResult best;
  bool have_best = false;
  OrderingStream stream(lpfs);
  do {
    TemporalMapping mapping =
        allocate(stream.current(), layer, arch, spatial, mode);
    CostBreakdown cost = evaluate(mapping, layer, arch, spatial);
    ++best.evaluations;
    if (!have_best || cost.total_energy < best.cost.total_energy) {
      have_best = true;
      best.mapping = std::move(mapping);
      best.cost = std::move(cost);
    }
  } while (stream.advance());
  return best;
}

}  // namespace loopsched
