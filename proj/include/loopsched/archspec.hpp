#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loopsched/workload.hpp"

namespace loopsched {

/// One memory level. `capacity_bits == nullopt` means unbounded (top level
/// only). `shared == true` is one instance for the whole PE array,
/// `shared == false` is one instance per PE. Capacity applies per served
/// operand (separate physical arrays per operand).
struct MemoryLevel {
  std::string name;
  std::optional<std::uint64_t> capacity_bits;
  double read_energy = 0.0;   // energy units per word
  double write_energy = 0.0;  // energy units per word
  std::set<Operand> serves;
  bool shared = true;

  bool unbounded() const { return !capacity_bits.has_value(); }
};

/// The accelerator: PE array shape, MAC cost, and the memory hierarchy
/// ordered lowest (innermost) first.
struct ArchSpec {
  std::string name;
  std::uint64_t pe_rows = 1, pe_cols = 1;
  double mac_energy = 0.0;
  std::vector<MemoryLevel> levels;

  /// Indices into `levels` that serve `op`, lowest first.
  std::vector<std::size_t> serving_chain(Operand op) const;
};

enum class SpatialAxis : std::uint8_t { Row, Col };

std::string_view axis_name(SpatialAxis a);
std::optional<SpatialAxis> parse_axis(std::string_view name);

/// One parallel (parfor) loop mapped across the PE array.
struct SpatialEntry {
  Dim dim;
  std::uint64_t factor;  // > 1
  SpatialAxis axis;

  bool operator==(const SpatialEntry&) const = default;
};

/// The fixed parallelization pattern. Factors on each axis must fit the
/// PE array shape.
struct SpatialUnrolling {
  std::vector<SpatialEntry> entries;

  std::uint64_t p_total() const;
  std::uint64_t factor_product(Dim d) const;
  std::uint64_t axis_product(SpatialAxis a) const;
};

/// One invariant violation found by validate_arch.
struct ArchError {
  enum class Code {
    TopLevelBounded,
    NonTopUnbounded,
    EmptyServes,
    NoServingLevel,
    TopLevelNotServing,
    PerPeAboveShared,
    SpatialRowOverflow,
    SpatialColOverflow,
    NonPositiveDims,
  };
  Code code;
  std::string message;
};

std::string_view arch_error_name(ArchError::Code c);

/// Collects every invariant violation; empty result means valid.
std::vector<ArchError> validate_arch(const ArchSpec& arch);

/// Spatial constraint check against a given architecture.
std::vector<ArchError> validate_spatial(const SpatialUnrolling& spatial,
                                        const ArchSpec& arch);

struct SpatialScale {
  std::uint64_t p_total;  // total PEs used
  std::uint64_t reuse;    // PEs sharing each word of the operand
};

/// Multicast scaling for an operand: p_total is the product of all spatial
/// factors, reuse the product of factors on dimensions irrelevant to the
/// operand. reuse always divides p_total.
SpatialScale spatial_scale(Operand op, const SpatialUnrolling& spatial);

}  // namespace loopsched
