#include <doctest.h>

#include <algorithm>

#include "loopsched/engines.hpp"
#include "loopsched/errors.hpp"
#include "loopsched/fixtures.hpp"
#include "loopsched/oracle.hpp"
#include "loopsched/rng.hpp"
#include "test_support.hpp"

using namespace loopsched;
using namespace loopsched::test;

TEST_SUITE("oracle") {

TEST_CASE("simulate matches the model on the single-MAC layer") {
  const LayerSpec layer = layer_of(1, 1, 1, 1, 1, 1, 1);
  const ArchSpec arch = make_toy_arch_3level(4, 64);
  const TemporalMapping m = allocate({}, layer, arch, {}, MappingMode::Uneven);
  const SimTrace sim = simulate(m, layer, arch);
  CHECK(sim.iterations_executed == 1);
  CHECK(sim.accesses == evaluate(m, layer, arch, {}).accesses);
}

TEST_CASE("simulate counts iterations and enforces the budget") {
  const LayerSpec layer = layer_of(1, 4, 4, 2, 1, 1, 1);
  const ArchSpec arch = make_toy_arch_2level(8);
  const auto lpfs = lpf_decompose(layer, {});
  std::vector<Loop> sorted = lpfs;
  std::sort(sorted.begin(), sorted.end());
  const TemporalMapping m =
      allocate({sorted}, layer, arch, {}, MappingMode::Uneven);
  CHECK(simulate(m, layer, arch).iterations_executed == 32);
  CHECK_THROWS_AS(simulate(m, layer, arch, 31), BudgetExceeded);
}

TEST_CASE("orderings differing within one level segment simulate equally") {
  const LayerSpec layer = layer_of(1, 8, 4, 2, 1, 1, 1);
  const ArchSpec arch = make_toy_arch_2level(64);  // everything fits at l0
  const auto a = ord({{Dim::K, 2}, {Dim::C, 2}, {Dim::K, 2}, {Dim::K, 2},
                      {Dim::C, 2}, {Dim::OY, 2}});
  const auto b = ord({{Dim::C, 2}, {Dim::K, 2}, {Dim::OY, 2}, {Dim::K, 2},
                      {Dim::K, 2}, {Dim::C, 2}});
  const TemporalMapping ma = allocate(a, layer, arch, {}, MappingMode::Uneven);
  const TemporalMapping mb = allocate(b, layer, arch, {}, MappingMode::Uneven);
  REQUIRE(ma.boundaries == mb.boundaries);  // same (trivial) placement
  CHECK(simulate(ma, layer, arch) == simulate(mb, layer, arch));
}

TEST_CASE("brute_force_best degenerate and tiny spaces") {
  const ArchSpec arch = make_toy_arch_2level(4);

  // A single distinct ordering.
  const LayerSpec single = layer_of(1, 2, 1, 1, 1, 1, 1);
  const BruteForceResult r1 =
      brute_force_best(single, arch, {}, MappingMode::Uneven);
  CHECK(r1.evaluations == 1);
  CHECK(r1.mapping.ordering == ord({{Dim::K, 2}}));

  // Three orderings: the result is the min of the three evaluations.
  const LayerSpec three = layer_of(1, 4, 3, 1, 1, 1, 1);
  const BruteForceResult r3 =
      brute_force_best(three, arch, {}, MappingMode::Uneven);
  CHECK(r3.evaluations == 3);
  double best = std::numeric_limits<double>::infinity();
  OrderingStream stream(lpf_decompose(three, {}));
  do {
    const TemporalMapping m =
        allocate(stream.current(), three, arch, {}, MappingMode::Uneven);
    best = std::min(best, evaluate(m, three, arch, {}).total_energy);
  } while (stream.advance());
  CHECK(r3.cost.total_energy == best);
}

TEST_CASE("brute_force_best rejects oversized spaces") {
  const LayerSpec layer = layer_of(1, 12, 6, 2, 2, 3, 1);  // 20160 orderings
  CHECK_THROWS_AS(brute_force_best(layer, make_toy_arch_2level(8), {},
                                   MappingMode::Uneven, 10000),
                  SpaceTooLarge);
}

TEST_CASE("brute_force_best agrees with the parallel engine") {
  for (const Fixture& f : {oracle_fixtures()[0], oracle_fixtures()[3],
                           oracle_fixtures()[7]}) {
    const BruteForceResult serial =
        brute_force_best(f.layer, f.arch, f.spatial, f.mode);
    const SearchResult parallel =
        exhaustive_search(f.layer, f.arch, f.spatial, f.mode);
    CHECK(serial.cost.total_energy == parallel.best_cost.total_energy);
    CHECK(serial.mapping == parallel.best_mapping);
    CHECK(serial.evaluations == parallel.evaluations);
  }
}

TEST_CASE("W reads at the top boundary cover the tensor") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const LayerSpec layer =
        layer_of(1, 1 + rng.uniform_index(6), 1 + rng.uniform_index(6),
                 1 + rng.uniform_index(3), 1 + rng.uniform_index(3),
                 1 + rng.uniform_index(2), 1 + rng.uniform_index(2));
    const ArchSpec arch = make_toy_arch_2level(2ULL << rng.uniform_index(4));
    const LoopOrdering o = random_ordering(lpf_decompose(layer, {}), rng);
    const TemporalMapping m =
        allocate(o, layer, arch, {}, MappingMode::Uneven);
    const SimTrace sim = simulate(m, layer, arch);
    const auto chain = arch.serving_chain(Operand::Weight);
    CHECK(sim.accesses[chain.back()][static_cast<std::size_t>(Operand::Weight)]
              .reads >= layer.k * layer.c * layer.fy * layer.fx);
  }
}

}  // TEST_SUITE
