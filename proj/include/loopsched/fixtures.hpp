#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopsched/allocator.hpp"
#include "loopsched/archspec.hpp"
#include "loopsched/engines.hpp"
#include "loopsched/ordering.hpp"
#include "loopsched/workload.hpp"

namespace loopsched {

/// One deterministic test case: a layer/arch/spatial/mode combination.
/// `expected`, when present, is produced by the oracle's brute-force search
/// and recorded, never hand-written.
struct Fixture {
  std::string name;
  LayerSpec layer;
  ArchSpec arch;
  SpatialUnrolling spatial;
  MappingMode mode = MappingMode::Uneven;

  struct Expected {
    OrderingCount ordering_count;
    double optimal_objective;
  };
  std::optional<Expected> expected;
};

/// Small hierarchies used across the fixture sets. Capacities are in words
/// of the given width so fixture definitions read naturally.
ArchSpec make_toy_arch_2level(std::uint64_t l0_words,
                              std::uint32_t word_bits = 16);
ArchSpec make_toy_arch_3level(std::uint64_t l0_words, std::uint64_t l1_words,
                              std::uint32_t word_bits = 16);
/// Three-level hierarchy whose mid level skips W (the W chain bypasses it).
ArchSpec make_toy_arch_skip_w(std::uint64_t l0_words, std::uint64_t l1_words,
                              std::uint32_t word_bits = 16);

/// Tiny fixtures (total_macs <= 1e4, temporal-only, 2-3 levels) for the
/// model-vs-simulation equivalence suite.
std::vector<Fixture> oracle_fixtures();

/// Fixtures with 1e3 <= D <= 1e5 distinct orderings for the annealing
/// optimality study; small enough for brute force, large enough to search.
std::vector<Fixture> study_fixtures();

/// A fixture with D >= 1e6 for the visited-energy distribution property.
Fixture complex_fixture();

struct StudyRow {
  std::string fixture;
  double optimum = 0.0;
  std::uint64_t runs = 0;
  std::uint64_t hits = 0;
  double hit_rate = 0.0;
  double mean_excess = 0.0;  // mean of objective/optimum - 1 over runs
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::uint64_t runs = 0;
  std::uint64_t hits = 0;
  double hit_rate = 0.0;
  double mean_excess = 0.0;
};

/// Runs the annealing engine `runs_per_fixture` times per fixture against
/// the brute-force optimum. Run r of fixture f uses seed
/// base_seed + f * 1000000007 + r, restarts = 1, and `params`' remaining
/// knobs. hit_rate counts runs whose best objective equals the optimum;
/// mean_excess averages objective/optimum - 1 over the same run set.
/// Bit-reproducible given base_seed.
StudyResult optimality_study(const std::vector<Fixture>& fixtures,
                             std::uint64_t runs_per_fixture,
                             std::uint64_t base_seed,
                             const SaParams& params = {});

/// Delimited summary table (one row per fixture plus a total row).
std::string study_summary_csv(const StudyResult& result);

}  // namespace loopsched
