// loopsched: searches energy-optimal temporal mappings (loop orderings plus
// memory allocations) of layer loop nests onto an accelerator memory
// hierarchy, choosing between an exhaustive enumeration and a simulated
// annealing walk based on the predicted enumeration cost.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "loopsched/config_io.hpp"
#include "loopsched/engines.hpp"
#include "loopsched/errors.hpp"
#include "loopsched/oracle.hpp"
#include "loopsched/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace loopsched;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSpaceTooLarge = 3;

struct SearchFlags {
  std::string layer_file;
  std::string network_file;
  std::string arch_file;
  std::string spatial_file;
  std::string engine = "auto";
  std::string mode = "uneven";
  std::string sa_start = "random";
  std::uint64_t seed = 0;
  std::uint64_t iterations = 1000;
  double rho = 0.999;
  double t0 = 0.05;
  std::uint64_t restarts = 1;
  std::int64_t lpf_limit = -1;
  std::string out_file;
};

void add_search_flags(CLI::App* cmd, SearchFlags& flags) {
  cmd->add_option("--arch", flags.arch_file, "architecture config file")
      ->required();
  cmd->add_option("--spatial", flags.spatial_file,
                  "spatial unrolling config file");
  cmd->add_option("--engine", flags.engine, "search engine")
      ->check(CLI::IsMember({"auto", "sa", "exhaustive"}));
  cmd->add_option("--mode", flags.mode, "memory mapping mode")
      ->check(CLI::IsMember({"even", "uneven"}));
  cmd->add_option("--seed", flags.seed, "random seed");
  cmd->add_option("--iterations", flags.iterations,
                  "annealing iterations per chain");
  cmd->add_option("--rho", flags.rho, "geometric cooling factor");
  cmd->add_option("--t0", flags.t0, "initial temperature");
  cmd->add_option("--restarts", flags.restarts,
                  "independent annealing chains");
  cmd->add_option("--lpf-limit", flags.lpf_limit,
                  "merge prime-factor loops down to at most N entries");
  cmd->add_option("--sa-start", flags.sa_start,
                  "annealing start ordering")
      ->check(CLI::IsMember({"random", "canonical"}));
  cmd->add_option("--out", flags.out_file, "write the report to this file");
}

SaParams sa_params_from(const SearchFlags& flags) {
  SaParams params;
  params.iterations = flags.iterations;
  params.rho = flags.rho;
  params.t0 = flags.t0;
  params.seed = flags.seed;
  params.restarts = flags.restarts;
  params.start_canonical = flags.sa_start == "canonical";
  return params;
}

std::optional<std::size_t> lpf_limit_from(const SearchFlags& flags) {
  if (flags.lpf_limit < 0) return std::nullopt;
  return static_cast<std::size_t>(flags.lpf_limit);
}

SpatialUnrolling load_spatial_checked(const std::string& file,
                                      const ArchSpec& arch) {
  if (file.empty()) return {};
  SpatialUnrolling spatial = load_spatial_file(file);
  const auto errors = validate_spatial(spatial, arch);
  if (!errors.empty()) {
    std::string msg = file + ": invalid spatial unrolling";
    for (const auto& e : errors) msg += "\n  " + e.message;
    throw ConfigError(msg);
  }
  return spatial;
}

RunReport run_search(const LayerSpec& layer, const ArchSpec& arch,
                     const SpatialUnrolling& spatial,
                     const SearchFlags& flags) {
  const SaParams params = sa_params_from(flags);
  const auto limit = lpf_limit_from(flags);
  const MappingMode mode = *parse_mode(flags.mode);

  EngineKind engine;
  if (flags.engine == "sa") {
    engine = EngineKind::Sa;
  } else if (flags.engine == "exhaustive") {
    engine = EngineKind::Exhaustive;
  } else {
    std::vector<Loop> loops = lpf_decompose(layer, spatial);
    if (limit) loops = limit_lpfs(std::move(loops), *limit);
    engine = select_engine(loops, params, /*tau=*/1.0);
  }

  const SearchResult result =
      engine == EngineKind::Exhaustive
          ? exhaustive_search(layer, arch, spatial, mode, limit)
          : sa_search(layer, arch, spatial, mode, params,
                      /*record_trace=*/false, limit);
  return make_report(result, layer, arch, spatial, mode, params);
}

void emit_document(const json& doc, const std::string& out_file,
                   const std::string& summary) {
  const std::string text = doc.dump(2) + "\n";
  if (out_file.empty()) {
    std::cout << text;
  } else {
    write_text_atomic(out_file, text);
    std::cout << summary << " -> " << out_file << "\n";
  }
}

int cmd_schedule(const SearchFlags& flags) {
  const LayerSpec layer = load_layer_file(flags.layer_file);
  const ArchSpec arch = load_arch_file(flags.arch_file);
  const SpatialUnrolling spatial =
      load_spatial_checked(flags.spatial_file, arch);

  const RunReport report = run_search(layer, arch, spatial, flags);
  emit_document(report_to_json(report), flags.out_file,
                "schedule report for layer '" + layer.name + "'");
  return kExitOk;
}

int cmd_sweep(const SearchFlags& flags) {
  const std::vector<LayerSpec> network = load_network_file(flags.network_file);
  const ArchSpec arch = load_arch_file(flags.arch_file);
  const SpatialUnrolling spatial =
      load_spatial_checked(flags.spatial_file, arch);

  const auto groups = unique_layers(network);
  json layers = json::array();
  double total_energy = 0.0;
  for (const auto& [layer, multiplicity] : groups) {
    const RunReport report = run_search(layer, arch, spatial, flags);
    json entry = report_to_json(report);
    entry["multiplicity"] = multiplicity;
    total_energy += report.objective * static_cast<double>(multiplicity);
    layers.push_back(std::move(entry));
  }

  json doc;
  doc["arch"] = arch.name;
  doc["layers"] = std::move(layers);
  doc["network_total_energy"] = total_energy;
  doc["total_layer_count"] = network.size();
  doc["unique_layer_count"] = groups.size();
  emit_document(doc, flags.out_file,
                "sweep report (" + std::to_string(groups.size()) +
                    " unique layers)");
  return kExitOk;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int cmd_distribution(const SearchFlags& flags, std::uint64_t samples) {
  const LayerSpec layer = load_layer_file(flags.layer_file);
  const ArchSpec arch = load_arch_file(flags.arch_file);
  const SpatialUnrolling spatial =
      load_spatial_checked(flags.spatial_file, arch);
  const MappingMode mode = *parse_mode(flags.mode);

  SaParams params = sa_params_from(flags);
  params.iterations = samples;
  params.restarts = 1;

  const SearchResult sa =
      sa_search(layer, arch, spatial, mode, params, /*record_trace=*/true);

  std::string csv = "strategy,iteration,objective,accepted\n";
  for (const TraceEntry& e : *sa.trace) {
    csv += "sa," + std::to_string(e.iteration) + "," +
           format_double(e.objective) + "," + (e.accepted ? "1" : "0") + "\n";
  }

  // Uniform-random baseline at the same evaluation budget, from the same
  // seed family (stream 1; the annealing chain uses stream 0).
  Rng rng(params.seed, 1);
  const std::vector<Loop> loops = lpf_decompose(layer, spatial);
  for (std::uint64_t i = 0; i < samples; ++i) {
    const LoopOrdering o = random_ordering(loops, rng);
    const TemporalMapping mapping = allocate(o, layer, arch, spatial, mode);
    const CostBreakdown cost = evaluate(mapping, layer, arch, spatial);
    csv += "random," + std::to_string(i) + "," +
           format_double(cost.total_energy) + ",1\n";
  }

  if (flags.out_file.empty()) {
    std::cout << csv;
  } else {
    write_text_atomic(flags.out_file, csv);
    std::cout << "distribution table (" << 2 * samples << " rows) -> "
              << flags.out_file << "\n";
  }
  return kExitOk;
}

std::string count_table(const ArchSpec& arch, const CostBreakdown& model,
                        const SimTrace& sim) {
  std::string out =
      "  level            op  model_reads  model_writes    sim_reads  "
      "sim_writes\n";
  for (std::size_t l = 0; l < arch.levels.size(); ++l) {
    for (Operand op : kAllOperands) {
      const AccessCounts& m = model.at(l, op);
      const AccessCounts& s = sim.accesses[l][static_cast<std::size_t>(op)];
      char line[160];
      std::snprintf(line, sizeof(line),
                    "  %-15s %3s %12llu %13llu %12llu %11llu%s\n",
                    arch.levels[l].name.c_str(),
                    std::string(operand_name(op)).c_str(),
                    static_cast<unsigned long long>(m.reads),
                    static_cast<unsigned long long>(m.writes),
                    static_cast<unsigned long long>(s.reads),
                    static_cast<unsigned long long>(s.writes),
                    m == s ? "" : "   <-- MISMATCH");
      out += line;
    }
  }
  return out;
}

std::string ordering_str(const LoopOrdering& o) {
  std::string s = "[";
  for (std::size_t i = 0; i < o.loops.size(); ++i) {
    if (i) s += " ";
    s += std::string(dim_name(o.loops[i].dim)) + ":" +
         std::to_string(o.loops[i].factor);
  }
  return s + "]";
}

// Model-vs-simulation check of one mapping; prints and returns false on the
// first mismatching count.
bool check_mapping(const Fixture& fixture, const LoopOrdering& ordering) {
  const TemporalMapping mapping =
      allocate(ordering, fixture.layer, fixture.arch, fixture.spatial,
               fixture.mode);
  const CostBreakdown model =
      evaluate(mapping, fixture.layer, fixture.arch, fixture.spatial);
  const SimTrace sim = simulate(mapping, fixture.layer, fixture.arch);
  for (std::size_t l = 0; l < fixture.arch.levels.size(); ++l) {
    if (model.accesses[l] != sim.accesses[l]) {
      std::cout << "FAIL " << fixture.name << " ordering "
                << ordering_str(ordering) << " ("
                << mode_name(fixture.mode) << ")\n"
                << count_table(fixture.arch, model, sim);
      return false;
    }
  }
  return true;
}

bool check_fixture(const Fixture& fixture, const json& extra,
                   const std::string& file) {
  if (fixture.spatial.p_total() != 1) {
    throw ConfigError(file +
                      ": validation fixtures must be temporal-only "
                      "(no spatial unrolling)");
  }
  const std::vector<Loop> lpfs =
      lpf_decompose(fixture.layer, fixture.spatial);

  std::vector<LoopOrdering> orderings;
  if (extra.contains("orderings")) {
    for (const json& oj : extra.at("orderings")) {
      LoopOrdering o;
      for (const json& lj : oj) {
        const auto dim = parse_dim(lj.at(0).get<std::string>());
        if (!dim) {
          throw ConfigError(file + ": bad dim in explicit ordering");
        }
        o.loops.push_back({*dim, lj.at(1).get<std::uint64_t>()});
      }
      std::vector<Loop> a = o.loops, b = lpfs;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) {
        throw ConfigError(file +
                          ": explicit ordering is not a permutation of the "
                          "layer's loop factors");
      }
      orderings.push_back(std::move(o));
    }
  }
  std::uint64_t random_count = extra.value("random_orderings", 0ULL);
  const std::uint64_t seed = extra.value("seed", 0ULL);
  if (orderings.empty() && random_count == 0) random_count = 20;

  // Canonical ordering first, then the seeded shuffles.
  {
    std::vector<Loop> sorted = lpfs;
    std::sort(sorted.begin(), sorted.end());
    orderings.push_back({std::move(sorted)});
  }
  Rng rng(seed);
  for (std::uint64_t i = 0; i < random_count; ++i) {
    orderings.push_back(random_ordering(lpfs, rng));
  }

  std::uint64_t checked = 0;
  for (const LoopOrdering& o : orderings) {
    if (!check_mapping(fixture, o)) return false;
    ++checked;
  }

  if (fixture.expected) {
    const OrderingCount count = count_distinct_orderings(lpfs);
    if (count != fixture.expected->ordering_count) {
      std::cout << "FAIL " << fixture.name << ": expected ordering_count "
                << fixture.expected->ordering_count.str() << ", computed "
                << count.str() << "\n";
      return false;
    }
    const BruteForceResult best = brute_force_best(
        fixture.layer, fixture.arch, fixture.spatial, fixture.mode);
    const double want = fixture.expected->optimal_objective;
    const double got = best.cost.total_energy;
    if (std::abs(got - want) > 1e-12 * std::max(std::abs(got), 1.0)) {
      std::cout << "FAIL " << fixture.name << ": expected optimal objective "
                << format_double(want) << ", computed " << format_double(got)
                << "\n";
      return false;
    }
  }
  std::cout << "ok   " << fixture.name << " (" << checked << " mappings)\n";
  return true;
}

// Deterministic randomized fixture for `validate --random`.
Fixture random_validation_fixture(std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed, index + 1);
  Fixture f;
  f.name = "random_" + std::to_string(index);
  LayerSpec layer;
  layer.name = f.name;
  layer.b = 1 + rng.uniform_index(3);
  layer.k = 1 + rng.uniform_index(4);
  layer.c = 1 + rng.uniform_index(4);
  layer.oy = 1 + rng.uniform_index(4);
  layer.ox = 1 + rng.uniform_index(4);
  layer.fy = 1 + rng.uniform_index(3);
  layer.fx = 1 + rng.uniform_index(3);
  layer.stride_y = 1 + rng.uniform_index(2);
  layer.stride_x = 1 + rng.uniform_index(2);
  f.layer = layer;
  const std::uint64_t l0_words = 2ULL << rng.uniform_index(5);
  if (rng.uniform_index(2) == 0) {
    f.arch = make_toy_arch_2level(l0_words);
  } else {
    const std::uint64_t l1_words = 32ULL << rng.uniform_index(4);
    f.arch = rng.uniform_index(2) == 0
                 ? make_toy_arch_3level(l0_words, l1_words)
                 : make_toy_arch_skip_w(l0_words, l1_words);
  }
  f.mode = rng.uniform_index(2) == 0 ? MappingMode::Uneven : MappingMode::Even;
  return f;
}

int cmd_validate(const std::string& fixtures_dir, std::uint64_t random_count,
                 std::uint64_t seed) {
  bool all_ok = true;
  if (!fixtures_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(fixtures_dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw ConfigError(fixtures_dir + ": no .json fixtures found");
    }
    for (const fs::path& file : files) {
      std::ifstream in(file);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
      }
      const Fixture fixture = fixture_from_json(j, file.string());
      if (!check_fixture(fixture, j, file.string())) {
        all_ok = false;
        break;  // report the first mismatch only
      }
    }
  } else {
    for (std::uint64_t i = 0; i < random_count; ++i) {
      const Fixture fixture = random_validation_fixture(seed, i);
      Rng rng(seed ^ 0x5eedULL, i);
      const std::vector<Loop> lpfs =
          lpf_decompose(fixture.layer, fixture.spatial);
      const LoopOrdering ordering = random_ordering(lpfs, rng);
      if (!check_mapping(fixture, ordering)) {
        all_ok = false;
        break;
      }
    }
    if (all_ok) {
      std::cout << "ok   " << random_count
                << " randomized model-vs-simulation checks\n";
    }
  }
  std::cout << (all_ok ? "VALIDATION PASSED\n" : "VALIDATION FAILED\n");
  return all_ok ? kExitOk : kExitMismatch;
}

void apply_thread_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("LOOPSCHED_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();

  CLI::App app{"temporal-mapping scheduler for accelerator loop nests"};
  app.require_subcommand(1);

  SearchFlags flags;
  std::uint64_t samples = 1000;
  std::string fixtures_dir;
  std::uint64_t random_count = 0;

  CLI::App* schedule =
      app.add_subcommand("schedule", "search one layer's best mapping");
  schedule->add_option("--layer", flags.layer_file, "layer config file")
      ->required();
  add_search_flags(schedule, flags);

  CLI::App* sweep =
      app.add_subcommand("sweep", "search every unique layer of a network");
  sweep->add_option("--network", flags.network_file, "network config file")
      ->required();
  add_search_flags(sweep, flags);

  CLI::App* distribution = app.add_subcommand(
      "distribution",
      "export visited-objective samples for annealing vs random");
  distribution->add_option("--layer", flags.layer_file, "layer config file")
      ->required();
  distribution->add_option("--samples", samples, "evaluations per strategy")
      ->required();
  add_search_flags(distribution, flags);

  CLI::App* validate = app.add_subcommand(
      "validate", "check the analytical model against loop-nest simulation");
  validate->add_option("--fixtures", fixtures_dir,
                       "directory of fixture .json files");
  validate->add_option("--random", random_count,
                       "number of randomized checks");
  validate->add_option("--seed", flags.seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (schedule->parsed()) return cmd_schedule(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (distribution->parsed()) return cmd_distribution(flags, samples);
    if (validate->parsed()) {
      if (fixtures_dir.empty() && random_count == 0) {
        std::cerr << "validate: pass --fixtures DIR or --random N\n";
        return kExitConfig;
      }
      return cmd_validate(fixtures_dir, random_count, flags.seed);
    }
  } catch (const SpaceTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpaceTooLarge;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonDivisibleUnrolling& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
