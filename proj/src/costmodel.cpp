#include "loopsched/costmodel.hpp"

#include "loopsched/errors.hpp"

namespace loopsched {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
  if (r > static_cast<unsigned __int128>(UINT64_MAX)) {
    throw Error("integer overflow in traffic count");
  }
  return static_cast<std::uint64_t>(r);
}

std::uint64_t footprint_below(const TemporalMapping& mapping,
                              const LayerSpec& layer, Operand op,
                              std::size_t boundary_index) {
  TileSizes tile = kUnitTile;
  for (std::size_t i = 0; i < boundary_index; ++i) {
    tile[static_cast<std::size_t>(mapping.ordering.loops[i].dim)] *=
        mapping.ordering.loops[i].factor;
  }
  return tile_footprint(op, tile, layer);
}

}  // namespace

BoundaryTraffic boundary_traffic(const TemporalMapping& mapping,
                                 const LayerSpec& layer, const ArchSpec& arch,
                                 const SpatialUnrolling& spatial, Operand op,
                                 std::size_t transition) {
  const auto chain = arch.serving_chain(op);
  if (transition == 0 || transition >= chain.size()) {
    throw Error("boundary_traffic: not a serving-chain transition");
  }
  const auto& loops = mapping.ordering.loops;
  const std::size_t b = mapping.boundaries_of(op)[transition - 1];

  const std::uint64_t tile = footprint_below(mapping, layer, op, b);

  // Above-region products: total iterations A, stationarity credit r
  // (innermost contiguous irrelevant run), and relevant iterations.
  std::uint64_t above = 1, credit = 1, relevant = 1;
  bool in_prefix = true;
  for (std::size_t i = b; i < loops.size(); ++i) {
    above = checked_mul(above, loops[i].factor);
    if (operand_relevance(loops[i].dim, op)) {
      in_prefix = false;
      relevant = checked_mul(relevant, loops[i].factor);
    } else if (in_prefix) {
      credit *= loops[i].factor;
    }
  }
  const std::uint64_t refreshes = above / credit;

  const auto scale = spatial_scale(op, spatial);
  const std::uint64_t streams = scale.p_total / scale.reuse;

  BoundaryTraffic t;
  if (op == Operand::Output) {
    t.up = checked_mul(checked_mul(tile, refreshes), streams);
    t.down = checked_mul(checked_mul(tile, refreshes - relevant), streams);
  } else {
    t.down = checked_mul(checked_mul(tile, refreshes), streams);
  }
  return t;
}

CostBreakdown evaluate(const TemporalMapping& mapping, const LayerSpec& layer,
                       const ArchSpec& arch, const SpatialUnrolling& spatial) {
  CostBreakdown cb;
  cb.accesses.assign(arch.levels.size(), {});
  cb.energy.assign(arch.levels.size(), {});
  cb.mac_count = total_macs(layer);

  const auto acc = [&](std::size_t level, Operand op) -> AccessCounts& {
    return cb.accesses[level][static_cast<std::size_t>(op)];
  };

  for (Operand op : kAllOperands) {
    const auto chain = arch.serving_chain(op);

    // Datapath traffic at the operand's lowest serving level.
    AccessCounts& lowest = acc(chain.front(), op);
    switch (op) {
      case Operand::Input:
      case Operand::Weight:
        lowest.reads += cb.mac_count;
        break;
      case Operand::Output: {
        const std::uint64_t outputs = checked_mul(
            checked_mul(layer.b, layer.k), checked_mul(layer.oy, layer.ox));
        lowest.writes += cb.mac_count;
        lowest.reads += cb.mac_count - outputs;  // first touch is zero-init
        break;
      }
    }

    for (std::size_t t = 1; t < chain.size(); ++t) {
      const BoundaryTraffic bt =
          boundary_traffic(mapping, layer, arch, spatial, op, t);
      acc(chain[t], op).reads += bt.down;
      acc(chain[t - 1], op).writes += bt.down;
      acc(chain[t - 1], op).reads += bt.up;
      acc(chain[t], op).writes += bt.up;
    }
  }

  cb.mac_energy_total = static_cast<double>(cb.mac_count) * arch.mac_energy;
  cb.total_energy = cb.mac_energy_total;
  for (std::size_t l = 0; l < arch.levels.size(); ++l) {
    for (Operand op : kAllOperands) {
      const AccessCounts& a = cb.at(l, op);
      const double e = static_cast<double>(a.reads) * arch.levels[l].read_energy +
                       static_cast<double>(a.writes) * arch.levels[l].write_energy;
      cb.energy[l][static_cast<std::size_t>(op)] = e;
      cb.total_energy += e;
    }
  }
  return cb;
}

double objective(const CostBreakdown& cb, Metric metric) {
  switch (metric) {
    case Metric::Energy:
      return cb.total_energy;
    case Metric::Latency:
      throw UnsupportedMetric("metric 'latency' is reserved, only 'energy' is implemented");
    case Metric::Edp:
      throw UnsupportedMetric("metric 'edp' is reserved, only 'energy' is implemented");
  }
  throw UnsupportedMetric("unknown metric");
}

}  // namespace loopsched
