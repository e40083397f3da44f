#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "loopsched/allocator.hpp"
#include "loopsched/costmodel.hpp"
#include "loopsched/ordering.hpp"

namespace loopsched {

enum class EngineKind : std::uint8_t { Exhaustive, Sa };

std::string_view engine_name(EngineKind k);

/// Simulated-annealing hyperparameters.
struct SaParams {
  std::uint64_t iterations = 1000;  // candidate evaluations per chain
  double rho = 0.999;               // geometric cooling factor, in (0,1)
  double t0 = 0.05;                 // initial temperature
  std::uint64_t seed = 0;
  std::uint64_t restarts = 1;  // independent chains; best result wins
  /// Start chains from the canonical ordering instead of a seeded shuffle.
  bool start_canonical = false;

  bool operator==(const SaParams&) const = default;
};

/// Knobs of the dual-engine selection and the exhaustive path.
struct EngineConfig {
  double kappa = 1.0;  // exhaustive chosen iff D <= kappa * I * restarts
  std::uint64_t exhaustive_cap = 100'000'000;  // hard enumeration cap
};

struct TraceEntry {
  std::uint64_t iteration;
  double objective;  // objective of the mapping visited at this iteration
  bool accepted;

  bool operator==(const TraceEntry&) const = default;
};

struct SearchResult {
  TemporalMapping best_mapping;
  CostBreakdown best_cost;
  EngineKind engine_used = EngineKind::Exhaustive;
  std::uint64_t evaluations = 0;
  double wall_time_s = 0.0;
  /// Per-iteration visit log (SA only, on request); restart chains are
  /// concatenated in chain order.
  std::optional<std::vector<TraceEntry>> trace;
};

/// Metropolis acceptance for a candidate of objective v_new against the
/// current objective v at temperature t: min(1, exp((v/v_new - 1)/t)).
/// Improvements always return 1. Throws on non-positive inputs.
double acceptance_probability(double v, double v_new, double t);

/// One geometric cooling step: rho * t.
double cooling_step(double t, double rho);

/// Simulated-annealing search. Each chain starts from a seeded shuffle
/// (iteration 0 visits the start state), then walks the swap neighborhood
/// with Metropolis acceptance and geometric cooling, for exactly
/// `iterations` objective evaluations per chain. Restart chains run
/// independently (in parallel when OpenMP is enabled) on streams seeded by
/// (seed, chain); the best-of-all-chains mapping is returned. Fully
/// deterministic given the seed. Spaces with a single distinct ordering
/// short-circuit with one evaluation.
SearchResult sa_search(const LayerSpec& layer, const ArchSpec& arch,
                       const SpatialUnrolling& spatial, MappingMode mode,
                       const SaParams& params, bool record_trace = false,
                       std::optional<std::size_t> lpf_limit = std::nullopt);

/// Exhaustive search over every distinct ordering (optionally coarsened by
/// limit_lpfs), returning the global argmin with first-encountered
/// (lowest-rank) tie-break. The permutation stream is partitioned by rank
/// across OpenMP workers; results are independent of the thread count.
/// Throws SpaceTooLarge above config.exhaustive_cap.
SearchResult exhaustive_search(const LayerSpec& layer, const ArchSpec& arch,
                               const SpatialUnrolling& spatial,
                               MappingMode mode,
                               std::optional<std::size_t> lpf_limit =
                                   std::nullopt,
                               const EngineConfig& config = {});

/// Predicted exhaustive runtime: tau * D seconds for D distinct orderings.
/// Saturates to infinity when D overflows double range.
double estimate_exhaustive_time(const std::vector<Loop>& lpfs, double tau);

/// Median wall time of one allocate+evaluate over `samples` random
/// orderings; the hardware-dependent per-evaluation constant.
double calibrate_tau(const LayerSpec& layer, const ArchSpec& arch,
                     const SpatialUnrolling& spatial,
                     MappingMode mode = MappingMode::Uneven,
                     std::uint64_t samples = 50);

/// Dual-engine choice: exhaustive iff D <= kappa * iterations * restarts
/// (inclusive). tau cancels out of the comparison of tau*D against
/// tau*I*restarts but is kept for reporting symmetry. kappa is honored to a
/// resolution of 1e-6.
EngineKind select_engine(const std::vector<Loop>& lpfs, const SaParams& params,
                         double tau, double kappa = 1.0);

}  // namespace loopsched
