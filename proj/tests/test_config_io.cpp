#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include "loopsched/config_io.hpp"
#include "loopsched/engines.hpp"
#include "loopsched/errors.hpp"
#include "test_support.hpp"

using namespace loopsched;
using namespace loopsched::test;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigDir = LOOPSCHED_CONFIG_DIR;

std::filesystem::path write_temp(const std::string& name,
                                 const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_SUITE("config_io") {

TEST_CASE("shipped configs load and validate") {
  const ArchSpec arch = load_arch_file(kConfigDir / "arch/eyeriss_like.json");
  CHECK(arch.pe_rows == 12);
  CHECK(arch.pe_cols == 14);
  CHECK(arch.levels.size() == 5);
  CHECK(validate_arch(arch).empty());
  CHECK(arch.levels.back().unbounded());

  const LayerSpec toy = load_layer_file(kConfigDir / "layers/toy_small.json");
  CHECK(toy.k == 4);
  CHECK(toy.stride_x == 1);  // defaulted

  const SpatialUnrolling sp =
      load_spatial_file(kConfigDir / "spatial/oy7_row_k8_col.json");
  CHECK(sp.p_total() == 56);
  CHECK(validate_spatial(sp, arch).empty());
}

TEST_CASE("the shipped network deduplicates by shape") {
  const auto network =
      load_network_file(kConfigDir / "networks/resnet_like.json");
  CHECK(network.size() == 37);

  // Independent reference: distinct shape tuples.
  std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t,
                      std::uint64_t, std::uint64_t, std::uint64_t,
                      std::uint64_t, std::uint64_t, std::uint64_t>>
      shapes;
  for (const LayerSpec& l : network) {
    shapes.insert({l.b, l.k, l.c, l.oy, l.ox, l.fy, l.fx, l.stride_y,
                   l.stride_x});
  }
  const auto groups = unique_layers(network);
  CHECK(groups.size() == shapes.size());
  CHECK(groups.size() == 12);
  std::size_t total = 0;
  for (const auto& [layer, mult] : groups) total += mult;
  CHECK(total == network.size());
}

TEST_CASE("unknown keys are rejected") {
  const auto path = write_temp("bad_layer.json", R"({
    "name": "x", "B": 1, "K": 2, "C": 1, "OY": 1, "OX": 1, "FY": 1, "FX": 1,
    "word_bits": {"I": 16, "W": 16, "O": 16},
    "stride": 2
  })");
  CHECK_THROWS_WITH_AS(load_layer_file(path),
                       doctest::Contains("unknown key 'stride'"),
                       ConfigError);
}

TEST_CASE("missing keys are rejected with file and key named") {
  const auto path = write_temp("missing_key.json", R"({
    "name": "x", "B": 1, "K": 2, "C": 1, "OY": 1, "OX": 1, "FY": 1,
    "word_bits": {"I": 16, "W": 16, "O": 16}
  })");
  try {
    load_layer_file(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("missing_key.json") != std::string::npos);
    CHECK(msg.find("'FX'") != std::string::npos);
  }
}

TEST_CASE("arch files reject broken hierarchies") {
  const auto path = write_temp("bad_arch.json", R"({
    "name": "bad", "pe_rows": 1, "pe_cols": 1, "mac_energy": 1.0,
    "levels": [
      {"name": "l0", "capacity_bits": 64, "read_energy": 1, "write_energy": 1,
       "serves": ["I", "W", "O"], "shared": false},
      {"name": "top", "capacity_bits": 128, "read_energy": 1,
       "write_energy": 1, "serves": ["I", "W", "O"], "shared": true}
    ]
  })");
  CHECK_THROWS_WITH_AS(load_arch_file(path),
                       doctest::Contains("TopLevelBounded"), ConfigError);
}

TEST_CASE("fixture files parse expected blocks and big counts") {
  const auto path = write_temp("fixture.json", R"({
    "name": "fx",
    "layer": {"name": "l", "B": 1, "K": 4, "C": 1, "OY": 1, "OX": 1,
              "FY": 1, "FX": 1, "word_bits": {"I": 16, "W": 16, "O": 16}},
    "arch": {"name": "a", "pe_rows": 1, "pe_cols": 1, "mac_energy": 1.0,
      "levels": [
        {"name": "l0", "capacity_bits": 64, "read_energy": 1,
         "write_energy": 1, "serves": ["I", "W", "O"], "shared": false},
        {"name": "top", "capacity_bits": "unbounded", "read_energy": 1,
         "write_energy": 1, "serves": ["I", "W", "O"], "shared": true}
      ]},
    "mode": "even",
    "expected": {"ordering_count": "2432902008176640000",
                 "optimal_objective": 123.5}
  })");
  const Fixture f = load_fixture_file(path);
  CHECK(f.mode == MappingMode::Even);
  REQUIRE(f.expected.has_value());
  CHECK(f.expected->ordering_count == OrderingCount("2432902008176640000"));
  CHECK(f.expected->optimal_objective == 123.5);
}

TEST_CASE("reports round-trip losslessly") {
  const LayerSpec layer = load_layer_file(kConfigDir / "layers/toy_small.json");
  const ArchSpec arch = load_arch_file(kConfigDir / "arch/eyeriss_like.json");
  SaParams params;
  params.seed = 9;
  const SearchResult result =
      exhaustive_search(layer, arch, {}, MappingMode::Uneven);
  const RunReport report =
      make_report(result, layer, arch, {}, MappingMode::Uneven, params);

  const json j = report_to_json(report);
  const RunReport parsed = report_from_json(j);
  CHECK(parsed == report);
  CHECK(report_to_json(parsed).dump(2) == j.dump(2));
}

TEST_CASE("atomic write replaces the file completely") {
  const auto path = std::filesystem::temp_directory_path() / "atomic.txt";
  write_text_atomic(path, "first version");
  write_text_atomic(path, "second");
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text == "second");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

}  // TEST_SUITE
