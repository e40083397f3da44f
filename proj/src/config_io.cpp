#include "loopsched/config_io.hpp"

#include <fstream>

#include "loopsched/errors.hpp"

namespace loopsched {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path.string() + ": cannot open file");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void check_keys(const json& obj, const std::string& file,
                const std::string& where,
                std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) {
    throw ConfigError(file + ": " + where + ": expected an object");
  }
  for (const char* key : required) {
    if (!obj.contains(key)) {
      throw ConfigError(file + ": " + where + ": missing key '" + key + "'");
    }
  }
  for (const auto& [key, value] : obj.items()) {
    const auto known = [&](std::initializer_list<const char*> list) {
      for (const char* k : list) {
        if (key == k) return true;
      }
      return false;
    };
    if (!known(required) && !known(optional)) {
      throw ConfigError(file + ": " + where + ": unknown key '" + key + "'");
    }
  }
}

std::uint64_t positive_u64(const json& j, const std::string& file,
                           const std::string& key) {
  if (!j.is_number_unsigned() || j.get<std::uint64_t>() == 0) {
    throw ConfigError(file + ": key '" + key +
                      "' must be a positive integer");
  }
  return j.get<std::uint64_t>();
}

double nonneg_real(const json& j, const std::string& file,
                   const std::string& key) {
  if (!j.is_number() || j.get<double>() < 0.0) {
    throw ConfigError(file + ": key '" + key +
                      "' must be a non-negative number");
  }
  return j.get<double>();
}

}  // namespace

LayerSpec layer_from_json(const json& j, const std::string& file) {
  const std::string where =
      j.contains("name") && j["name"].is_string()
          ? "layer '" + j["name"].get<std::string>() + "'"
          : "layer";
  check_keys(j, file, where,
             {"name", "B", "K", "C", "OY", "OX", "FY", "FX", "word_bits"},
             {"stride_y", "stride_x"});
  LayerSpec layer;
  layer.name = j["name"].get<std::string>();
  layer.b = positive_u64(j["B"], file, "B");
  layer.k = positive_u64(j["K"], file, "K");
  layer.c = positive_u64(j["C"], file, "C");
  layer.oy = positive_u64(j["OY"], file, "OY");
  layer.ox = positive_u64(j["OX"], file, "OX");
  layer.fy = positive_u64(j["FY"], file, "FY");
  layer.fx = positive_u64(j["FX"], file, "FX");
  if (j.contains("stride_y")) {
    layer.stride_y = positive_u64(j["stride_y"], file, "stride_y");
  }
  if (j.contains("stride_x")) {
    layer.stride_x = positive_u64(j["stride_x"], file, "stride_x");
  }
  check_keys(j["word_bits"], file, where + ": word_bits", {"I", "W", "O"});
  for (Operand op : kAllOperands) {
    const std::string key(operand_name(op));
    layer.word_bits[static_cast<std::size_t>(op)] = static_cast<std::uint32_t>(
        positive_u64(j["word_bits"][key], file, "word_bits." + key));
  }
  total_macs(layer);  // rejects layers whose MAC count overflows
  return layer;
}

ArchSpec arch_from_json(const json& j, const std::string& file) {
  check_keys(j, file, "architecture",
             {"name", "pe_rows", "pe_cols", "mac_energy", "levels"});
  ArchSpec arch;
  arch.name = j["name"].get<std::string>();
  arch.pe_rows = positive_u64(j["pe_rows"], file, "pe_rows");
  arch.pe_cols = positive_u64(j["pe_cols"], file, "pe_cols");
  arch.mac_energy = nonneg_real(j["mac_energy"], file, "mac_energy");
  if (!j["levels"].is_array() || j["levels"].empty()) {
    throw ConfigError(file + ": key 'levels' must be a non-empty list");
  }
  for (const json& lj : j["levels"]) {
    const std::string where =
        lj.contains("name") && lj["name"].is_string()
            ? "level '" + lj["name"].get<std::string>() + "'"
            : "level";
    check_keys(lj, file, where,
               {"name", "capacity_bits", "read_energy", "write_energy",
                "serves", "shared"});
    MemoryLevel level;
    level.name = lj["name"].get<std::string>();
    if (lj["capacity_bits"].is_string()) {
      if (lj["capacity_bits"].get<std::string>() != "unbounded") {
        throw ConfigError(file + ": " + where +
                          ": capacity_bits must be a positive integer or "
                          "\"unbounded\"");
      }
      level.capacity_bits = std::nullopt;
    } else {
      level.capacity_bits =
          positive_u64(lj["capacity_bits"], file, "capacity_bits");
    }
    level.read_energy = nonneg_real(lj["read_energy"], file, "read_energy");
    level.write_energy = nonneg_real(lj["write_energy"], file, "write_energy");
    if (!lj["serves"].is_array() || lj["serves"].empty()) {
      throw ConfigError(file + ": " + where +
                        ": key 'serves' must be a non-empty list");
    }
    for (const json& s : lj["serves"]) {
      const auto op = s.is_string()
                          ? parse_operand(s.get<std::string>())
                          : std::nullopt;
      if (!op) {
        throw ConfigError(file + ": " + where +
                          ": serves entries must be \"I\", \"W\" or \"O\"");
      }
      level.serves.insert(*op);
    }
    if (!lj["shared"].is_boolean()) {
      throw ConfigError(file + ": " + where + ": key 'shared' must be a bool");
    }
    level.shared = lj["shared"].get<bool>();
    arch.levels.push_back(std::move(level));
  }

  const auto errors = validate_arch(arch);
  if (!errors.empty()) {
    std::string msg = file + ": invalid architecture";
    for (const auto& e : errors) msg += "\n  " + e.message;
    throw ConfigError(msg);
  }
  return arch;
}

SpatialUnrolling spatial_from_json(const json& j, const std::string& file) {
  if (!j.is_array()) {
    throw ConfigError(file + ": spatial unrolling must be a list");
  }
  SpatialUnrolling spatial;
  for (const json& ej : j) {
    check_keys(ej, file, "spatial entry", {"dim", "factor", "axis"});
    SpatialEntry entry{};
    const auto dim = ej["dim"].is_string()
                         ? parse_dim(ej["dim"].get<std::string>())
                         : std::nullopt;
    if (!dim) {
      throw ConfigError(file + ": key 'dim' must be one of "
                        "B,K,C,OY,OX,FY,FX");
    }
    entry.dim = *dim;
    entry.factor = positive_u64(ej["factor"], file, "factor");
    if (entry.factor < 2) {
      throw ConfigError(file + ": key 'factor' must be > 1");
    }
    const auto axis = ej["axis"].is_string()
                          ? parse_axis(ej["axis"].get<std::string>())
                          : std::nullopt;
    if (!axis) {
      throw ConfigError(file + ": key 'axis' must be \"row\" or \"col\"");
    }
    entry.axis = *axis;
    spatial.entries.push_back(entry);
  }
  return spatial;
}

Fixture fixture_from_json(const json& j, const std::string& file) {
  check_keys(j, file, "fixture", {"name", "layer", "arch"},
             {"spatial", "mode", "orderings", "random_orderings", "seed",
              "expected"});
  Fixture f;
  f.name = j["name"].get<std::string>();
  f.layer = layer_from_json(j["layer"], file);
  f.arch = arch_from_json(j["arch"], file);
  if (j.contains("spatial")) {
    f.spatial = spatial_from_json(j["spatial"], file);
  }
  if (j.contains("mode")) {
    const auto mode = j["mode"].is_string()
                          ? parse_mode(j["mode"].get<std::string>())
                          : std::nullopt;
    if (!mode) {
      throw ConfigError(file + ": key 'mode' must be \"even\" or \"uneven\"");
    }
    f.mode = *mode;
  }
  if (j.contains("expected")) {
    check_keys(j["expected"], file, "expected",
               {"ordering_count", "optimal_objective"});
    Fixture::Expected expected;
    const json& oc = j["expected"]["ordering_count"];
    if (oc.is_string()) {
      expected.ordering_count = OrderingCount(oc.get<std::string>());
    } else {
      expected.ordering_count =
          positive_u64(oc, file, "expected.ordering_count");
    }
    expected.optimal_objective =
        nonneg_real(j["expected"]["optimal_objective"], file,
                    "expected.optimal_objective");
    f.expected = std::move(expected);
  }
  return f;
}

LayerSpec load_layer_file(const std::filesystem::path& path) {
  return layer_from_json(parse_file(path), path.string());
}

std::vector<LayerSpec> load_network_file(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_array()) {
    throw ConfigError(path.string() + ": a network file is a list of layers");
  }
  std::vector<LayerSpec> layers;
  for (const json& lj : j) {
    layers.push_back(layer_from_json(lj, path.string()));
  }
  return layers;
}

ArchSpec load_arch_file(const std::filesystem::path& path) {
  return arch_from_json(parse_file(path), path.string());
}

SpatialUnrolling load_spatial_file(const std::filesystem::path& path) {
  return spatial_from_json(parse_file(path), path.string());
}

Fixture load_fixture_file(const std::filesystem::path& path) {
  return fixture_from_json(parse_file(path), path.string());
}

RunReport make_report(const SearchResult& result, const LayerSpec& layer,
                      const ArchSpec& arch, const SpatialUnrolling& spatial,
                      MappingMode mode, const SaParams& params) {
  RunReport report;
  report.layer = layer.name;
  report.arch = arch.name;
  report.mode = mode;
  report.engine_used = result.engine_used;
  report.best_ordering = result.best_mapping.ordering;
  for (Operand op : kAllOperands) {
    const auto chain = arch.serving_chain(op);
    auto& out = report.boundaries[static_cast<std::size_t>(op)];
    const auto& bounds = result.best_mapping.boundaries_of(op);
    for (std::size_t t = 0; t < bounds.size(); ++t) {
      out.emplace_back(arch.levels[chain[t + 1]].name, bounds[t]);
    }
  }
  for (const MemoryLevel& level : arch.levels) {
    report.level_names.push_back(level.name);
  }
  report.cost = result.best_cost;
  report.objective = result.best_cost.total_energy;
  report.evaluations = result.evaluations;
  report.wall_time_s = result.wall_time_s;
  report.seed = params.seed;
  report.sa_params = params;
  report.spatial = spatial.entries;
  return report;
}

nlohmann::json report_to_json(const RunReport& report) {
  json j;
  j["layer"] = report.layer;
  j["arch"] = report.arch;
  j["mode"] = std::string(mode_name(report.mode));
  j["engine_used"] = std::string(engine_name(report.engine_used));

  json ordering = json::array();
  for (const Loop& l : report.best_ordering.loops) {
    ordering.push_back({std::string(dim_name(l.dim)), l.factor});
  }
  j["best_ordering"] = std::move(ordering);

  json boundaries = json::object();
  for (Operand op : kAllOperands) {
    json list = json::array();
    for (const auto& [level, index] :
         report.boundaries[static_cast<std::size_t>(op)]) {
      list.push_back({{"into_level", level}, {"index", index}});
    }
    boundaries[std::string(operand_name(op))] = std::move(list);
  }
  j["boundaries"] = std::move(boundaries);

  json cost;
  cost["mac_count"] = report.cost.mac_count;
  cost["mac_energy_total"] = report.cost.mac_energy_total;
  cost["total_energy"] = report.cost.total_energy;
  json levels = json::array();
  for (std::size_t l = 0; l < report.level_names.size(); ++l) {
    json operands = json::object();
    for (Operand op : kAllOperands) {
      const AccessCounts& a = report.cost.at(l, op);
      operands[std::string(operand_name(op))] = {
          {"reads", a.reads},
          {"writes", a.writes},
          {"energy", report.cost.energy[l][static_cast<std::size_t>(op)]}};
    }
    levels.push_back(
        {{"level", report.level_names[l]}, {"operands", std::move(operands)}});
  }
  cost["levels"] = std::move(levels);
  j["cost"] = std::move(cost);

  j["objective"] = report.objective;
  j["evaluations"] = report.evaluations;
  j["wall_time_s"] = report.wall_time_s;
  j["seed"] = report.seed;
  j["sa_params"] = {{"iterations", report.sa_params.iterations},
                    {"rho", report.sa_params.rho},
                    {"t0", report.sa_params.t0},
                    {"restarts", report.sa_params.restarts},
                    {"start", report.sa_params.start_canonical
                                  ? "canonical"
                                  : "random"}};
  json spatial = json::array();
  for (const SpatialEntry& e : report.spatial) {
    spatial.push_back({std::string(dim_name(e.dim)), e.factor,
                       std::string(axis_name(e.axis))});
  }
  j["spatial"] = std::move(spatial);
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  const std::string file = "<report>";
  RunReport report;
  report.layer = j.at("layer").get<std::string>();
  report.arch = j.at("arch").get<std::string>();
  report.mode = *parse_mode(j.at("mode").get<std::string>());
  report.engine_used = j.at("engine_used").get<std::string>() == "exhaustive"
                           ? EngineKind::Exhaustive
                           : EngineKind::Sa;
  for (const json& lj : j.at("best_ordering")) {
    report.best_ordering.loops.push_back(
        {*parse_dim(lj.at(0).get<std::string>()),
         lj.at(1).get<std::uint64_t>()});
  }
  for (Operand op : kAllOperands) {
    for (const json& bj : j.at("boundaries").at(std::string(operand_name(op)))) {
      report.boundaries[static_cast<std::size_t>(op)].emplace_back(
          bj.at("into_level").get<std::string>(),
          bj.at("index").get<std::uint64_t>());
    }
  }
  const json& cost = j.at("cost");
  report.cost.mac_count = cost.at("mac_count").get<std::uint64_t>();
  report.cost.mac_energy_total = cost.at("mac_energy_total").get<double>();
  report.cost.total_energy = cost.at("total_energy").get<double>();
  for (const json& lj : cost.at("levels")) {
    report.level_names.push_back(lj.at("level").get<std::string>());
    std::array<AccessCounts, kOperandCount> counts{};
    std::array<double, kOperandCount> energy{};
    for (Operand op : kAllOperands) {
      const json& oj = lj.at("operands").at(std::string(operand_name(op)));
      counts[static_cast<std::size_t>(op)] = {
          oj.at("reads").get<std::uint64_t>(),
          oj.at("writes").get<std::uint64_t>()};
      energy[static_cast<std::size_t>(op)] = oj.at("energy").get<double>();
    }
    report.cost.accesses.push_back(counts);
    report.cost.energy.push_back(energy);
  }
  report.objective = j.at("objective").get<double>();
  report.evaluations = j.at("evaluations").get<std::uint64_t>();
  report.wall_time_s = j.at("wall_time_s").get<double>();
  report.seed = j.at("seed").get<std::uint64_t>();
  const json& sa = j.at("sa_params");
  report.sa_params.iterations = sa.at("iterations").get<std::uint64_t>();
  report.sa_params.rho = sa.at("rho").get<double>();
  report.sa_params.t0 = sa.at("t0").get<double>();
  report.sa_params.restarts = sa.at("restarts").get<std::uint64_t>();
  report.sa_params.start_canonical =
      sa.at("start").get<std::string>() == "canonical";
  report.sa_params.seed = report.seed;
  for (const json& sj : j.at("spatial")) {
    report.spatial.push_back({*parse_dim(sj.at(0).get<std::string>()),
                              sj.at(1).get<std::uint64_t>(),
                              *parse_axis(sj.at(2).get<std::string>())});
  }
  return report;
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write to " + tmp.string());
    }
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace loopsched
