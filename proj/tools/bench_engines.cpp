// Benchmark of the rank-partitioned exhaustive engine against the serial
// reference enumeration, plus the annealing engine's size-independent
// runtime. Results of every parallel run are checked against the serial
// reference before timings are reported.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "loopsched/engines.hpp"
#include "loopsched/fixtures.hpp"
#include "loopsched/oracle.hpp"

using namespace loopsched;

namespace {

LayerSpec bench_layer(std::uint64_t k, std::uint64_t c, std::uint64_t oy,
                      std::uint64_t ox, std::uint64_t fy, std::uint64_t fx) {
  LayerSpec l;
  l.name = "bench";
  l.k = k;
  l.c = c;
  l.oy = oy;
  l.ox = ox;
  l.fy = fy;
  l.fx = fx;
  return l;
}

double best_of(int repeats, const std::function<double()>& run) {
  double best = run();
  for (int i = 1; i < repeats; ++i) best = std::min(best, run());
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"engine benchmark: serial reference vs rank-partitioned"};
  int repeats = 3;
  app.add_option("--repeats", repeats, "timing repetitions (best-of)");
  CLI11_PARSE(app, argc, argv);

  // n = 11 loops, 415800 distinct orderings.
  const LayerSpec layer = bench_layer(16, 12, 9, 5, 7, 1);
  const ArchSpec arch = make_toy_arch_3level(32, 512);
  const SpatialUnrolling spatial;
  const auto loops = lpf_decompose(layer, spatial);
  const OrderingCount count = count_distinct_orderings(loops);

  std::printf("exhaustive fixture: %zu loops, %s distinct orderings\n",
              loops.size(), count.str().c_str());

  const BruteForceResult reference = brute_force_best(
      layer, arch, spatial, MappingMode::Uneven, /*max_orderings=*/1u << 30);
  const double serial_s = best_of(repeats, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    (void)brute_force_best(layer, arch, spatial, MappingMode::Uneven,
                           1u << 30);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  });
  std::printf("serial reference: %.3fs (objective %.6g)\n", serial_s,
              reference.cost.total_energy);

  int max_threads = 1;
#ifdef _OPENMP
  max_threads = omp_get_max_threads();
#endif
  std::printf("%8s %10s %9s %s\n", "threads", "time", "speedup", "matches");
  for (int t = 1; t <= max_threads; t *= 2) {
#ifdef _OPENMP
    omp_set_num_threads(t);
#endif
    SearchResult result;
    const double par_s = best_of(repeats, [&] {
      const auto t0 = std::chrono::steady_clock::now();
      result = exhaustive_search(layer, arch, spatial, MappingMode::Uneven);
      return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           t0)
          .count();
    });
    const bool match =
        result.best_cost.total_energy == reference.cost.total_energy &&
        result.best_mapping.ordering == reference.mapping.ordering;
    std::printf("%8d %9.3fs %8.2fx %s\n", t, par_s, serial_s / par_s,
                match ? "yes" : "NO");
  }

  // Annealing runtime is governed by the iteration budget, not by the
  // ordering-space size.
  const LayerSpec small = bench_layer(6, 5, 7, 2, 3, 1);    // n = 6
  const LayerSpec large = bench_layer(1024, 64, 8, 2, 1, 1);  // n = 20
  SaParams params;
  params.iterations = 1000;
  for (const LayerSpec* l : {&small, &large}) {
    const auto n = lpf_decompose(*l, spatial).size();
    const double sa_s = best_of(repeats, [&] {
      const auto t0 = std::chrono::steady_clock::now();
      (void)sa_search(*l, arch, spatial, MappingMode::Uneven, params);
      return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           t0)
          .count();
    });
    std::printf("annealing, n=%zu loops, I=%llu: %.4fs\n", n,
                static_cast<unsigned long long>(params.iterations), sa_s);
  }
  return 0;
}
