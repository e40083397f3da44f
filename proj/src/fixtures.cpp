#include "loopsched/fixtures.hpp"

#include <charconv>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "loopsched/oracle.hpp"

namespace loopsched {

namespace {

MemoryLevel bounded_level(std::string name, std::uint64_t words,
                          std::uint32_t word_bits, double re, double we,
                          std::set<Operand> serves, bool shared) {
  MemoryLevel l;
  l.name = std::move(name);
  l.capacity_bits = words * word_bits;
  l.read_energy = re;
  l.write_energy = we;
  l.serves = std::move(serves);
  l.shared = shared;
  return l;
}

MemoryLevel dram_level() {
  MemoryLevel l;
  l.name = "dram";
  l.capacity_bits = std::nullopt;
  l.read_energy = 100.0;
  l.write_energy = 105.0;
  l.serves = {Operand::Input, Operand::Weight, Operand::Output};
  l.shared = true;
  return l;
}

LayerSpec make_layer(std::string name, std::uint64_t b, std::uint64_t k,
                     std::uint64_t c, std::uint64_t oy, std::uint64_t ox,
                     std::uint64_t fy, std::uint64_t fx,
                     std::uint64_t sy = 1, std::uint64_t sx = 1) {
  LayerSpec l;
  l.name = std::move(name);
  l.b = b;
  l.k = k;
  l.c = c;
  l.oy = oy;
  l.ox = ox;
  l.fy = fy;
  l.fx = fx;
  l.stride_y = sy;
  l.stride_x = sx;
  return l;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

ArchSpec make_toy_arch_2level(std::uint64_t l0_words,
                              std::uint32_t word_bits) {
  ArchSpec a;
  a.name = "toy2_" + std::to_string(l0_words) + "w";
  a.pe_rows = 1;
  a.pe_cols = 1;
  a.mac_energy = 0.5;
  a.levels.push_back(bounded_level(
      "l0", l0_words, word_bits, 1.0, 1.0,
      {Operand::Input, Operand::Weight, Operand::Output}, false));
  a.levels.push_back(dram_level());
  return a;
}

ArchSpec make_toy_arch_3level(std::uint64_t l0_words, std::uint64_t l1_words,
                              std::uint32_t word_bits) {
  ArchSpec a;
  a.name = "toy3_" + std::to_string(l0_words) + "w_" +
           std::to_string(l1_words) + "w";
  a.pe_rows = 1;
  a.pe_cols = 1;
  a.mac_energy = 0.5;
  a.levels.push_back(bounded_level(
      "l0", l0_words, word_bits, 1.0, 1.0,
      {Operand::Input, Operand::Weight, Operand::Output}, false));
  a.levels.push_back(bounded_level(
      "l1", l1_words, word_bits, 6.0, 7.0,
      {Operand::Input, Operand::Weight, Operand::Output}, true));
  a.levels.push_back(dram_level());
  return a;
}

ArchSpec make_toy_arch_skip_w(std::uint64_t l0_words, std::uint64_t l1_words,
                              std::uint32_t word_bits) {
  ArchSpec a = make_toy_arch_3level(l0_words, l1_words, word_bits);
  a.name = "toyskipw_" + std::to_string(l0_words) + "w_" +
           std::to_string(l1_words) + "w";
  a.levels[1].serves = {Operand::Input, Operand::Output};
  return a;
}

std::vector<Fixture> oracle_fixtures() {
  const std::vector<LayerSpec> layers = {
      make_layer("k4c4", 1, 4, 4, 1, 1, 1, 1),
      make_layer("k4c4oy2", 1, 4, 4, 2, 1, 1, 1),
      make_layer("b2k2c2oy2ox2", 2, 2, 2, 2, 2, 1, 1),
      make_layer("k12c3", 1, 12, 3, 1, 1, 1, 1),
      make_layer("ox4fx3", 1, 1, 1, 1, 4, 1, 3),
      make_layer("ox4fx3s2", 1, 1, 1, 1, 4, 1, 3, 1, 2),
      make_layer("oy3ox3fy2fx2s2", 1, 1, 1, 3, 3, 2, 2, 2, 2),
      make_layer("k6c6", 1, 6, 6, 1, 1, 1, 1),
      make_layer("b3k2c2", 3, 2, 2, 1, 1, 1, 1),
      make_layer("all1", 1, 1, 1, 1, 1, 1, 1),
      make_layer("k2", 1, 2, 1, 1, 1, 1, 1),
      make_layer("fy3fx3c2", 1, 1, 2, 1, 1, 3, 3),
      make_layer("k8oy2", 1, 8, 1, 2, 1, 1, 1),
      make_layer("b2c3oy2fy2", 2, 1, 3, 2, 1, 2, 1),
      make_layer("k5c5oy2", 1, 5, 5, 2, 1, 1, 1),
      make_layer("k2c2oy2ox2fy2fx2", 1, 2, 2, 2, 2, 2, 2),
      make_layer("b2k4c3ox3", 2, 4, 3, 1, 3, 1, 1),
      make_layer("k9c2fy2", 1, 9, 2, 1, 1, 2, 1),
      make_layer("oy4ox4s2", 1, 1, 1, 4, 4, 1, 1, 2, 2),
      make_layer("k4c4fy3fx3", 1, 4, 4, 1, 1, 3, 3),
  };
  const std::vector<ArchSpec> archs = {
      make_toy_arch_2level(4),
      make_toy_arch_2level(64),
      make_toy_arch_3level(4, 64),
      make_toy_arch_3level(8, 32, 8),
      make_toy_arch_skip_w(4, 64),
      make_toy_arch_skip_w(16, 256),
  };

  std::vector<Fixture> fixtures;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Fixture f;
    f.layer = layers[i];
    f.arch = archs[i % archs.size()];
    f.mode = (i % 2 == 0) ? MappingMode::Uneven : MappingMode::Even;
    f.name = layers[i].name + "_" + f.arch.name + "_" +
             std::string(mode_name(f.mode));
    fixtures.push_back(std::move(f));
  }
  // A couple of deliberate mode flips so both modes hit the 2-level archs.
  {
    Fixture f;
    f.layer = layers[0];
    f.arch = archs[0];
    f.mode = MappingMode::Even;
    f.name = "k4c4_toy2_4w_even";
    fixtures.push_back(std::move(f));
  }
  {
    Fixture f;
    f.layer = layers[3];
    f.arch = archs[4];
    f.mode = MappingMode::Uneven;
    f.name = "k12c3_toyskipw_4w_64w_uneven";
    fixtures.push_back(std::move(f));
  }
  return fixtures;
}

std::vector<Fixture> study_fixtures() {
  // Distinct-ordering counts span 5040..75600, all brute-forceable.
  struct Def {
    const char* name;
    LayerSpec layer;
    ArchSpec arch;
    MappingMode mode;
  };
  const std::vector<Def> defs = {
      {"study_d1260", make_layer("d1260", 1, 4, 6, 9, 5, 1, 1),
       make_toy_arch_skip_w(16, 256), MappingMode::Even},
      {"study_d5040", make_layer("d5040", 2, 6, 5, 7, 2, 3, 1),
       make_toy_arch_3level(16, 256), MappingMode::Uneven},
      {"study_d10080", make_layer("d10080", 1, 4, 6, 9, 5, 7, 1),
       make_toy_arch_3level(16, 256), MappingMode::Uneven},
      {"study_d20160", make_layer("d20160", 1, 12, 6, 2, 2, 3, 1),
       make_toy_arch_skip_w(16, 256), MappingMode::Uneven},
      {"study_d40320", make_layer("d40320", 2, 6, 5, 7, 2, 3, 11),
       make_toy_arch_3level(64, 1024), MappingMode::Even},
      {"study_d60480", make_layer("d60480", 1, 8, 6, 3, 5, 7, 2),
       make_toy_arch_3level(32, 512), MappingMode::Uneven},
      {"study_d75600", make_layer("d75600", 1, 16, 6, 9, 5, 7, 1),
       make_toy_arch_3level(32, 512), MappingMode::Uneven},
  };
  std::vector<Fixture> fixtures;
  for (const Def& d : defs) {
    Fixture f;
    f.name = d.name;
    f.layer = d.layer;
    f.arch = d.arch;
    f.mode = d.mode;
    fixtures.push_back(std::move(f));
  }
  return fixtures;
}

Fixture complex_fixture() {
  Fixture f;
  f.name = "complex_conv";
  f.layer = make_layer("complex_conv", 1, 256, 96, 27, 27, 5, 5);
  f.arch = make_toy_arch_3level(64, 16384);
  f.mode = MappingMode::Uneven;
  return f;
}

StudyResult optimality_study(const std::vector<Fixture>& fixtures,
                             std::uint64_t runs_per_fixture,
                             std::uint64_t base_seed,
                             const SaParams& params) {
  StudyResult result;
  double excess_sum_total = 0.0;

  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    const Fixture& fx = fixtures[f];
    const BruteForceResult reference =
        brute_force_best(fx.layer, fx.arch, fx.spatial, fx.mode);
    const double optimum = reference.cost.total_energy;

    std::vector<double> objectives(runs_per_fixture);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(runs_per_fixture);
         ++r) {
      SaParams run_params = params;
      run_params.restarts = 1;
      run_params.seed = base_seed + f * 1000000007ULL +
                        static_cast<std::uint64_t>(r);
      const SearchResult sr =
          sa_search(fx.layer, fx.arch, fx.spatial, fx.mode, run_params);
      objectives[r] = sr.best_cost.total_energy;
    }

    StudyRow row;
    row.fixture = fx.name;
    row.optimum = optimum;
    row.runs = runs_per_fixture;
    double excess_sum = 0.0;
    for (double obj : objectives) {
      if (obj == optimum) ++row.hits;
      excess_sum += obj / optimum - 1.0;
    }
    row.hit_rate = static_cast<double>(row.hits) / runs_per_fixture;
    row.mean_excess = excess_sum / runs_per_fixture;
    excess_sum_total += excess_sum;
    result.hits += row.hits;
    result.runs += runs_per_fixture;
    result.rows.push_back(std::move(row));
  }

  result.hit_rate =
      result.runs ? static_cast<double>(result.hits) / result.runs : 0.0;
  result.mean_excess = result.runs ? excess_sum_total / result.runs : 0.0;
  return result;
}

std::string study_summary_csv(const StudyResult& result) {
  std::string out = "fixture,optimum,runs,hits,hit_rate,mean_excess\n";
  for (const StudyRow& row : result.rows) {
    out += row.fixture + "," + format_double(row.optimum) + "," +
           std::to_string(row.runs) + "," + std::to_string(row.hits) + "," +
           format_double(row.hit_rate) + "," +
           format_double(row.mean_excess) + "\n";
  }
  out += "TOTAL,," + std::to_string(result.runs) + "," +
         std::to_string(result.hits) + "," + format_double(result.hit_rate) +
         "," + format_double(result.mean_excess) + "\n";
  return out;
}

}  // namespace loopsched
