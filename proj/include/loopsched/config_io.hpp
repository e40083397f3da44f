#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "loopsched/allocator.hpp"
#include "loopsched/archspec.hpp"
#include "loopsched/costmodel.hpp"
#include "loopsched/engines.hpp"
#include "loopsched/fixtures.hpp"
#include "loopsched/workload.hpp"

namespace loopsched {

/// Config loaders. All schemas are strict: unknown keys are rejected and
/// every error message names the offending file and key.

LayerSpec layer_from_json(const nlohmann::json& j, const std::string& file);
ArchSpec arch_from_json(const nlohmann::json& j, const std::string& file);
SpatialUnrolling spatial_from_json(const nlohmann::json& j,
                                   const std::string& file);
Fixture fixture_from_json(const nlohmann::json& j, const std::string& file);

LayerSpec load_layer_file(const std::filesystem::path& path);
std::vector<LayerSpec> load_network_file(const std::filesystem::path& path);
ArchSpec load_arch_file(const std::filesystem::path& path);
SpatialUnrolling load_spatial_file(const std::filesystem::path& path);
Fixture load_fixture_file(const std::filesystem::path& path);

/// Self-describing result document of one scheduling run.
struct RunReport {
  std::string layer;
  std::string arch;
  MappingMode mode = MappingMode::Uneven;
  EngineKind engine_used = EngineKind::Exhaustive;
  LoopOrdering best_ordering;  // innermost first
  /// Per operand: (level transitioned into, loop index) pairs.
  std::array<std::vector<std::pair<std::string, std::uint64_t>>,
             kOperandCount>
      boundaries;
  std::vector<std::string> level_names;
  CostBreakdown cost;
  double objective = 0.0;
  std::uint64_t evaluations = 0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  SaParams sa_params;
  std::vector<SpatialEntry> spatial;

  bool operator==(const RunReport&) const = default;
};

RunReport make_report(const SearchResult& result, const LayerSpec& layer,
                      const ArchSpec& arch, const SpatialUnrolling& spatial,
                      MappingMode mode, const SaParams& params);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// Write-then-rename so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text);

}  // namespace loopsched
