#include <doctest.h>

#include <algorithm>
#include <set>

#include "loopsched/allocator.hpp"
#include "loopsched/errors.hpp"
#include "loopsched/fixtures.hpp"
#include "loopsched/rng.hpp"
#include "test_support.hpp"

using namespace loopsched;
using namespace loopsched::test;

namespace {

// Capacity invariant of a finished mapping: every bounded serving level
// that holds loops (non-empty segment) fits the footprint of the loops
// below its upper boundary. Levels with an empty segment only stream tiles
// through and carry no residency requirement.
void check_capacity_invariants(const TemporalMapping& m,
                               const LayerSpec& layer, const ArchSpec& arch,
                               const SpatialUnrolling& spatial) {
  for (Operand op : kAllOperands) {
    const auto chain = arch.serving_chain(op);
    const auto& bounds = m.boundaries_of(op);
    REQUIRE(bounds.size() == chain.size() - 1);
    for (std::size_t t = 0; t + 1 < chain.size(); ++t) {
      if (t > 0) CHECK(bounds[t - 1] <= bounds[t]);  // non-decreasing
      CHECK(bounds[t] <= m.ordering.size());
      const MemoryLevel& level = arch.levels[chain[t]];
      if (level.unbounded()) continue;
      const std::size_t segment_begin = t == 0 ? 0 : bounds[t - 1];
      if (t > 0 && segment_begin == bounds[t]) continue;  // pass-through
      TileSizes tile = kUnitTile;
      for (std::size_t i = 0; i < bounds[t]; ++i) {
        tile[static_cast<std::size_t>(m.ordering.loops[i].dim)] *=
            m.ordering.loops[i].factor;
      }
      const auto scale = spatial_scale(op, spatial);
      const std::uint64_t copies =
          level.shared ? scale.p_total / scale.reuse : 1;
      CHECK(tile_footprint(op, tile, layer) * copies *
                layer.word_bits[static_cast<std::size_t>(op)] <=
            *level.capacity_bits);
    }
  }
}

}  // namespace

TEST_SUITE("allocator") {

TEST_CASE("bottom-up walk promotes at the first overflowing loop") {
  // W footprints of [K2 C2 K2 C2] accumulate 2, 4, 8, 16 words against a
  // 4-word level: loops 0..1 stay below, the transition lands at index 2.
  const LayerSpec layer = layer_of(1, 4, 4, 1, 1, 1, 1);
  const ArchSpec arch = make_toy_arch_2level(4);
  const LoopOrdering o =
      ord({{Dim::K, 2}, {Dim::C, 2}, {Dim::K, 2}, {Dim::C, 2}});
  const TemporalMapping m =
      allocate(o, layer, arch, {}, MappingMode::Uneven);
  CHECK(m.boundaries_of(Operand::Weight) == std::vector<std::size_t>{2});
  check_capacity_invariants(m, layer, arch, {});
}

TEST_CASE("all-dims-1 layer maps to an empty ordering") {
  const LayerSpec layer = layer_of(1, 1, 1, 1, 1, 1, 1);
  const ArchSpec arch = make_toy_arch_3level(4, 64);
  const TemporalMapping m = allocate({}, layer, arch, {}, MappingMode::Even);
  CHECK(m.ordering.empty());
  for (Operand op : kAllOperands) {
    for (std::size_t b : m.boundaries_of(op)) CHECK(b == 0);
  }
}

TEST_CASE("even mode promotes everyone at the earliest overflow") {
  // O overflows a 4-word level at loop 2 (oy*k = 2,4,8); W alone would fit
  // much longer (1,1,2). The shared boundary lands at O's overflow point.
  const LayerSpec layer = layer_of(1, 2, 1, 4, 1, 1, 1);
  const ArchSpec arch = make_toy_arch_2level(4);
  const LoopOrdering o = ord({{Dim::OY, 2}, {Dim::OY, 2}, {Dim::K, 2}});

  const TemporalMapping uneven =
      allocate(o, layer, arch, {}, MappingMode::Uneven);
  CHECK(uneven.boundaries_of(Operand::Weight) ==
        std::vector<std::size_t>{3});  // never promoted
  CHECK(uneven.boundaries_of(Operand::Output) ==
        std::vector<std::size_t>{2});

  const TemporalMapping even = allocate(o, layer, arch, {}, MappingMode::Even);
  CHECK(even.boundaries_of(Operand::Output) == std::vector<std::size_t>{2});
  CHECK(even.boundaries_of(Operand::Weight) == std::vector<std::size_t>{2});
  CHECK(even.boundaries_of(Operand::Input) ==
        even.boundaries_of(Operand::Output));
}

TEST_CASE("infeasible lowest level is rejected") {
  ArchSpec arch = make_toy_arch_2level(4);
  arch.levels[0].capacity_bits = 8;  // below one 16-bit word
  CHECK_THROWS_AS(allocate(ord({{Dim::K, 2}}), layer_of(1, 2, 1, 1, 1, 1, 1),
                           arch, {}, MappingMode::Uneven),
                  InfeasibleLowestLevel);
}

TEST_CASE("allocate is deterministic") {
  const LayerSpec layer = layer_of(2, 4, 3, 2, 1, 1, 1);
  const ArchSpec arch = make_toy_arch_3level(8, 64);
  const LoopOrdering o = ord(
      {{Dim::K, 2}, {Dim::B, 2}, {Dim::C, 3}, {Dim::K, 2}, {Dim::OY, 2}});
  CHECK(allocate(o, layer, arch, {}, MappingMode::Uneven) ==
        allocate(o, layer, arch, {}, MappingMode::Uneven));
}

TEST_CASE("fuzzed mappings honor every capacity invariant") {
  Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const LayerSpec layer =
        layer_of(1 + rng.uniform_index(3), 1 + rng.uniform_index(8),
                 1 + rng.uniform_index(8), 1 + rng.uniform_index(4),
                 1 + rng.uniform_index(4), 1 + rng.uniform_index(3),
                 1 + rng.uniform_index(3), 1 + rng.uniform_index(2),
                 1 + rng.uniform_index(2));
    const ArchSpec arch =
        trial % 3 == 0
            ? make_toy_arch_2level(2ULL << rng.uniform_index(5))
            : trial % 3 == 1
                  ? make_toy_arch_3level(2ULL << rng.uniform_index(4),
                                         32ULL << rng.uniform_index(4))
                  : make_toy_arch_skip_w(2ULL << rng.uniform_index(4),
                                         32ULL << rng.uniform_index(4));
    const MappingMode mode =
        rng.uniform_index(2) ? MappingMode::Even : MappingMode::Uneven;
    const auto lpfs = lpf_decompose(layer, {});
    const LoopOrdering o = random_ordering(lpfs, rng);
    const TemporalMapping m = allocate(o, layer, arch, {}, mode);
    check_capacity_invariants(m, layer, arch, {});
  }
}

TEST_CASE("shared levels account for distinct spatial tiles") {
  // O footprints of [OY2 OY2 K2 K2] accumulate 2, 4, 8, 16 words. l0 holds
  // 4 words per PE, the shared l1 holds 8 words total. Without unrolling
  // the 8-word tile sits at l1; with K:4 unrolled, four distinct output
  // tiles coexist there (8 * 4 words), forcing it up to DRAM.
  const LayerSpec layer = layer_of(1, 16, 1, 4, 1, 1, 1);
  ArchSpec arch = make_toy_arch_3level(4, 8);
  arch.pe_cols = 4;
  const LoopOrdering o =
      ord({{Dim::OY, 2}, {Dim::OY, 2}, {Dim::K, 2}, {Dim::K, 2}});

  const LayerSpec temporal_only = layer_of(1, 4, 1, 4, 1, 1, 1);
  const TemporalMapping plain =
      allocate(o, temporal_only, arch, {}, MappingMode::Uneven);
  CHECK(plain.boundaries_of(Operand::Output) ==
        std::vector<std::size_t>{2, 3});

  const auto spatial = spatial_of({{Dim::K, 4, SpatialAxis::Col}});
  const TemporalMapping unrolled =
      allocate(o, layer, arch, spatial, MappingMode::Uneven);
  CHECK(unrolled.boundaries_of(Operand::Output) ==
        std::vector<std::size_t>{2, 2});
  check_capacity_invariants(unrolled, layer, arch, spatial);
}

TEST_CASE("even boundaries never exceed uneven boundaries") {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const LayerSpec layer =
        layer_of(1 + rng.uniform_index(2), 1 + rng.uniform_index(8),
                 1 + rng.uniform_index(8), 1 + rng.uniform_index(4),
                 1 + rng.uniform_index(4), 1 + rng.uniform_index(3), 1);
    const ArchSpec arch = make_toy_arch_3level(4ULL << rng.uniform_index(3),
                                               64ULL << rng.uniform_index(2));
    const auto lpfs = lpf_decompose(layer, {});
    const LoopOrdering o = random_ordering(lpfs, rng);
    const TemporalMapping even = allocate(o, layer, arch, {},
                                          MappingMode::Even);
    const TemporalMapping uneven =
        allocate(o, layer, arch, {}, MappingMode::Uneven);
    for (Operand op : kAllOperands) {
      const auto& eb = even.boundaries_of(op);
      const auto& ub = uneven.boundaries_of(op);
      REQUIRE(eb.size() == ub.size());
      for (std::size_t t = 0; t < eb.size(); ++t) CHECK(eb[t] <= ub[t]);
    }
  }
}

TEST_CASE("permuting loops within one level segment keeps the boundaries") {
  Rng rng(47);
  const LayerSpec layer = layer_of(2, 8, 6, 4, 1, 3, 1);
  const ArchSpec arch = make_toy_arch_3level(8, 128);
  const auto lpfs = lpf_decompose(layer, {});
  for (int trial = 0; trial < 100; ++trial) {
    const MappingMode mode =
        rng.uniform_index(2) ? MappingMode::Even : MappingMode::Uneven;
    const LoopOrdering o = random_ordering(lpfs, rng);
    const TemporalMapping m = allocate(o, layer, arch, {}, mode);

    // Collect every boundary position; an interval between consecutive
    // positions lies within one segment for all operands simultaneously.
    // Strictly-within means the interior only: a segment's first loop is
    // the promotion trigger, so exchanging it can legitimately let a
    // smaller loop stay below and shift that one boundary.
    std::set<std::size_t> cuts = {0, o.size()};
    for (Operand op : kAllOperands) {
      for (std::size_t b : m.boundaries_of(op)) cuts.insert(b);
    }
    std::vector<std::size_t> sorted(cuts.begin(), cuts.end());
    for (std::size_t s = 0; s + 1 < sorted.size(); ++s) {
      const std::size_t lo = sorted[s] + (sorted[s] > 0 ? 1 : 0);
      const std::size_t hi = sorted[s + 1];
      if (hi <= lo || hi - lo < 2) continue;
      LoopOrdering shuffled = o;
      std::reverse(shuffled.loops.begin() + lo, shuffled.loops.begin() + hi);
      const TemporalMapping ms = allocate(shuffled, layer, arch, {}, mode);
      CHECK(ms.boundaries == m.boundaries);
    }
  }
}

TEST_CASE("unique_layers groups by shape, not name") {
  LayerSpec l1 = layer_of(1, 4, 4, 2, 2, 1, 1);
  l1.name = "a";
  LayerSpec l1b = l1;
  l1b.name = "b";  // same shape, different label
  LayerSpec l2 = layer_of(1, 8, 4, 2, 2, 1, 1);
  l2.name = "c";

  const auto groups = unique_layers({l1, l1b, l2});
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].first.name == "a");
  CHECK(groups[0].second == 2);
  CHECK(groups[1].second == 1);

  CHECK(unique_layers({}).empty());

  LayerSpec l3 = l1;
  l3.word_bits[0] = 8;  // differing word width splits the group
  CHECK(unique_layers({l1, l3}).size() == 2);
}

}  // TEST_SUITE
