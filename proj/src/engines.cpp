#include "loopsched/engines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "loopsched/errors.hpp"
#include "loopsched/rng.hpp"

namespace loopsched {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Loop> search_loops(const LayerSpec& layer,
                               const SpatialUnrolling& spatial,
                               std::optional<std::size_t> lpf_limit) {
  std::vector<Loop> loops = lpf_decompose(layer, spatial);
  if (lpf_limit) loops = limit_lpfs(std::move(loops), *lpf_limit);
  return loops;
}

struct Candidate {
  TemporalMapping mapping;
  CostBreakdown cost;
};

Candidate evaluate_ordering(const LoopOrdering& o, const LayerSpec& layer,
                            const ArchSpec& arch,
                            const SpatialUnrolling& spatial,
                            MappingMode mode) {
  Candidate c;
  c.mapping = allocate(o, layer, arch, spatial, mode);
  c.cost = evaluate(c.mapping, layer, arch, spatial);
  return c;
}

struct SaChainResult {
  Candidate best;
  std::vector<TraceEntry> trace;
};

// One annealing chain on its own random stream. Iteration 0 visits the
// start state; iterations 1..I-1 visit swap neighbors. The temperature at
// iteration i is t0 * rho^i. Draw order per neighbor iteration is fixed:
// swap index i, swap index j, acceptance uniform.
SaChainResult run_sa_chain(const std::vector<Loop>& loops,
                           const LayerSpec& layer, const ArchSpec& arch,
                           const SpatialUnrolling& spatial, MappingMode mode,
                           const SaParams& params, std::uint64_t chain,
                           bool record_trace) {
  Rng rng(params.seed, chain);

  LoopOrdering current;
  if (params.start_canonical) {
    std::vector<Loop> sorted = loops;
    std::sort(sorted.begin(), sorted.end());
    current.loops = std::move(sorted);
  } else {
    current = random_ordering(loops, rng);
  }

  SaChainResult result;
  Candidate cur = evaluate_ordering(current, layer, arch, spatial, mode);
  result.best = cur;
  if (record_trace) {
    result.trace.reserve(params.iterations);
    result.trace.push_back({0, cur.cost.total_energy, true});
  }

  double temperature = params.t0;
  for (std::uint64_t i = 1; i < params.iterations; ++i) {
    temperature = cooling_step(temperature, params.rho);  // = t0 * rho^i
    SwapSample sample = sample_swap(cur.mapping.ordering, rng);
    Candidate cand =
        evaluate_ordering(sample.ordering, layer, arch, spatial, mode);
    const double p = acceptance_probability(cur.cost.total_energy,
                                            cand.cost.total_energy,
                                            temperature);
    const bool accepted = rng.uniform_double() < p;
    if (record_trace) {
      result.trace.push_back({i, cand.cost.total_energy, accepted});
    }
    if (cand.cost.total_energy < result.best.cost.total_energy) {
      result.best = cand;
    }
    if (accepted) {
      cur = std::move(cand);
    }
  }
  return result;
}

}  // namespace

std::string_view engine_name(EngineKind k) {
  return k == EngineKind::Exhaustive ? "exhaustive" : "sa";
}

double acceptance_probability(double v, double v_new, double t) {
  if (!(v > 0.0) || !(v_new > 0.0) || !(t > 0.0)) {
    throw Error("acceptance_probability: inputs must be positive");
  }
  return std::min(1.0, std::exp((v / v_new - 1.0) / t));
}

double cooling_step(double t, double rho) {
  if (!(t > 0.0) || !(rho > 0.0) || !(rho < 1.0)) {
    throw Error("cooling_step: requires t > 0 and 0 < rho < 1");
  }
  return rho * t;
}

SearchResult sa_search(const LayerSpec& layer, const ArchSpec& arch,
                       const SpatialUnrolling& spatial, MappingMode mode,
                       const SaParams& params, bool record_trace,
                       std::optional<std::size_t> lpf_limit) {
  if (params.iterations < 1 || params.restarts < 1 || !(params.t0 > 0.0) ||
      !(params.rho > 0.0) || !(params.rho < 1.0)) {
    throw Error("sa_search: requires iterations >= 1, restarts >= 1, "
                "t0 > 0 and 0 < rho < 1");
  }
  const auto start = Clock::now();
  const std::vector<Loop> loops = search_loops(layer, spatial, lpf_limit);

  SearchResult result;
  result.engine_used = EngineKind::Sa;

  if (loops.size() < 2 || count_distinct_orderings(loops) == 1) {
    // Single-point space: evaluate the unique ordering and stop.
    std::vector<Loop> sorted = loops;
    std::sort(sorted.begin(), sorted.end());
    Candidate only = evaluate_ordering({std::move(sorted)}, layer, arch,
                                       spatial, mode);
    result.best_mapping = std::move(only.mapping);
    result.best_cost = std::move(only.cost);
    result.evaluations = 1;
    if (record_trace) {
      result.trace = {{{0, result.best_cost.total_energy, true}}};
    }
    result.wall_time_s = seconds_since(start);
    return result;
  }

  std::vector<SaChainResult> chains(params.restarts);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (params.restarts > 1)
#endif
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(params.restarts);
       ++c) {
    chains[c] = run_sa_chain(loops, layer, arch, spatial, mode, params,
                             static_cast<std::uint64_t>(c), record_trace);
  }

  std::size_t winner = 0;
  for (std::size_t c = 1; c < chains.size(); ++c) {
    if (chains[c].best.cost.total_energy <
        chains[winner].best.cost.total_energy) {
      winner = c;
    }
  }
  result.best_mapping = std::move(chains[winner].best.mapping);
  result.best_cost = std::move(chains[winner].best.cost);
  result.evaluations = params.iterations * params.restarts;
  if (record_trace) {
    std::vector<TraceEntry> trace;
    trace.reserve(params.iterations * params.restarts);
    for (const auto& c : chains) {
      trace.insert(trace.end(), c.trace.begin(), c.trace.end());
    }
    result.trace = std::move(trace);
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

SearchResult exhaustive_search(const LayerSpec& layer, const ArchSpec& arch,
                               const SpatialUnrolling& spatial,
                               MappingMode mode,
                               std::optional<std::size_t> lpf_limit,
                               const EngineConfig& config) {
  const auto start = Clock::now();
  const std::vector<Loop> loops = search_loops(layer, spatial, lpf_limit);

  const OrderingCount count = count_distinct_orderings(loops);
  if (count > config.exhaustive_cap) {
    throw SpaceTooLarge("ordering space of " + count.str() +
                        " exceeds the exhaustive cap of " +
                        std::to_string(config.exhaustive_cap));
  }
  const std::uint64_t total = count.convert_to<std::uint64_t>();

  struct WorkerBest {
    Candidate candidate;
    std::uint64_t rank = 0;
    bool valid = false;
  };

  int workers = 1;
#ifdef _OPENMP
  workers = omp_get_max_threads();
#endif
  // Rank-partitioned chunks; small spaces are not worth forking for.
  if (total < 4096) workers = 1;
  const std::uint64_t chunk = (total + workers - 1) / workers;
  std::vector<WorkerBest> bests(workers);

#ifdef _OPENMP
#pragma omp parallel for schedule(static, 1) if (workers > 1)
#endif
  for (int w = 0; w < workers; ++w) {
    const std::uint64_t begin = chunk * static_cast<std::uint64_t>(w);
    const std::uint64_t end = std::min(begin + chunk, total);
    if (begin >= end) continue;

    LoopOrdering ordering = detail::ordering_at_rank(loops, begin);
    WorkerBest local;
    for (std::uint64_t rank = begin; rank < end; ++rank) {
      Candidate c = evaluate_ordering(ordering, layer, arch, spatial, mode);
      if (!local.valid ||
          c.cost.total_energy < local.candidate.cost.total_energy) {
        local.valid = true;
        local.candidate = std::move(c);
        local.rank = rank;
      }
      if (rank + 1 < end) {
        std::next_permutation(ordering.loops.begin(), ordering.loops.end());
      }
    }
    bests[w] = std::move(local);
  }

  // Merge on (objective, rank): global argmin, first-encountered tie-break.
  std::size_t winner = bests.size();
  for (std::size_t w = 0; w < bests.size(); ++w) {
    if (!bests[w].valid) continue;
    if (winner == bests.size() ||
        bests[w].candidate.cost.total_energy <
            bests[winner].candidate.cost.total_energy) {
      winner = w;
    }
  }

  SearchResult result;
  result.engine_used = EngineKind::Exhaustive;
  result.best_mapping = std::move(bests[winner].candidate.mapping);
  result.best_cost = std::move(bests[winner].candidate.cost);
  result.evaluations = total;
  result.wall_time_s = seconds_since(start);
  return result;
}

double estimate_exhaustive_time(const std::vector<Loop>& lpfs, double tau) {
  const OrderingCount count = count_distinct_orderings(lpfs);
  return tau * count.convert_to<double>();
}

double calibrate_tau(const LayerSpec& layer, const ArchSpec& arch,
                     const SpatialUnrolling& spatial, MappingMode mode,
                     std::uint64_t samples) {
  const std::vector<Loop> loops = lpf_decompose(layer, spatial);
  Rng rng(0x74617573);  // timing only; the value never affects results
  volatile double sink = 0.0;
  std::vector<double> times;
  times.reserve(samples);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const LoopOrdering o = random_ordering(loops, rng);
    const auto t0 = Clock::now();
    const Candidate c = evaluate_ordering(o, layer, arch, spatial, mode);
    times.push_back(seconds_since(t0));
    sink = sink + c.cost.total_energy;
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

EngineKind select_engine(const std::vector<Loop>& lpfs, const SaParams& params,
                         double /*tau*/, double kappa) {
  const OrderingCount d = count_distinct_orderings(lpfs);
  // tau * D <= kappa * tau * I * restarts, with tau cancelled and kappa
  // applied at 1e-6 resolution to keep the comparison exact.
  const OrderingCount kappa_scaled =
      static_cast<std::int64_t>(std::llround(kappa * 1e6));
  const OrderingCount sa_budget =
      kappa_scaled * params.iterations * params.restarts;
  return d * 1'000'000 <= sa_budget ? EngineKind::Exhaustive : EngineKind::Sa;
}

}  // namespace loopsched
