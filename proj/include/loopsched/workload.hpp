#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace loopsched {

/// The seven loop dimensions of a convolutional layer, in canonical order.
/// Other layer topologies (fully connected, pointwise, matmul) fix the
/// unused dimensions to 1.
enum class Dim : std::uint8_t { B, K, C, OY, OX, FY, FX };

inline constexpr std::size_t kDimCount = 7;
inline constexpr std::array<Dim, kDimCount> kAllDims = {
    Dim::B, Dim::K, Dim::C, Dim::OY, Dim::OX, Dim::FY, Dim::FX};

std::string_view dim_name(Dim d);
std::optional<Dim> parse_dim(std::string_view name);

/// The three layer operands.
enum class Operand : std::uint8_t { Input, Weight, Output };

inline constexpr std::size_t kOperandCount = 3;
inline constexpr std::array<Operand, kOperandCount> kAllOperands = {
    Operand::Input, Operand::Weight, Operand::Output};

/// Short operand tag used in configs and reports: "I", "W", "O".
std::string_view operand_name(Operand op);
std::optional<Operand> parse_operand(std::string_view name);

/// One indivisible temporal for-loop: a dimension and its trip count.
/// lpf_decompose produces loops with prime trip counts; limit_lpfs may
/// merge them into composite ones.
struct Loop {
  Dim dim;
  std::uint64_t factor;

  // Canonical order: dimension order first, then ascending factor.
  auto operator<=>(const Loop&) const = default;
};

/// A layer's loop-nest sizes, strides, and operand word widths.
struct LayerSpec {
  std::string name;
  std::uint64_t b = 1, k = 1, c = 1, oy = 1, ox = 1, fy = 1, fx = 1;
  std::uint64_t stride_y = 1, stride_x = 1;
  /// Bits per word, indexed by Operand.
  std::array<std::uint32_t, kOperandCount> word_bits = {16, 16, 16};

  std::uint64_t dim(Dim d) const;

  /// Equality over the numeric fields only; names are labels.
  bool same_shape(const LayerSpec& other) const;

  bool operator==(const LayerSpec&) const = default;
};

struct SpatialUnrolling;  // defined in archspec.hpp

/// Whether a loop over `d` indexes operand `op`'s tensor. Irrelevant loops
/// enable reuse (I/W) or accumulation (O).
bool operand_relevance(Dim d, Operand op);

bool is_prime(std::uint64_t n);

/// Prime factorization of every dimension's temporal size (the size left
/// after dividing out spatial factors), in canonical order: dimension order,
/// factors ascending. Dimensions with temporal size 1 contribute nothing.
/// Throws NonDivisibleUnrolling if a spatial factor does not divide its
/// dimension.
std::vector<Loop> lpf_decompose(const LayerSpec& layer,
                                const SpatialUnrolling& spatial);

/// Coarsens a loop list down to at most `max_n` entries by repeatedly
/// merging the two smallest factors that share a dimension (earliest
/// canonical dimension on ties). Per-dimension factor products are
/// preserved. Stops early if no dimension has two factors left.
std::vector<Loop> limit_lpfs(std::vector<Loop> loops, std::size_t max_n);

/// Per-dimension tile sizes; index by static_cast<size_t>(Dim).
using TileSizes = std::array<std::uint64_t, kDimCount>;

inline constexpr TileSizes kUnitTile = {1, 1, 1, 1, 1, 1, 1};

/// Words of operand data covered by a tile:
///   W -> k*c*fy*fx, O -> b*k*oy*ox,
///   I -> b*c*iy*ix with iy = stride_y*(oy-1)+fy, ix = stride_x*(ox-1)+fx.
std::uint64_t tile_footprint(Operand op, const TileSizes& tile,
                             const LayerSpec& layer);

/// b*k*c*oy*ox*fy*fx over the full dimensions, spatial included.
std::uint64_t total_macs(const LayerSpec& layer);

}  // namespace loopsched
