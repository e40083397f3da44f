#include "loopsched/archspec.hpp"

namespace loopsched {

std::vector<std::size_t> ArchSpec::serving_chain(Operand op) const {
  std::vector<std::size_t> chain;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].serves.count(op)) chain.push_back(i);
  }
  return chain;
}

std::string_view axis_name(SpatialAxis a) {
  return a == SpatialAxis::Row ? "row" : "col";
}

std::optional<SpatialAxis> parse_axis(std::string_view name) {
  if (name == "row") return SpatialAxis::Row;
  if (name == "col") return SpatialAxis::Col;
  return std::nullopt;
}

std::uint64_t SpatialUnrolling::p_total() const {
  std::uint64_t p = 1;
  for (const auto& e : entries) p *= e.factor;
  return p;
}

std::uint64_t SpatialUnrolling::factor_product(Dim d) const {
  std::uint64_t p = 1;
  for (const auto& e : entries) {
    if (e.dim == d) p *= e.factor;
  }
  return p;
}

std::uint64_t SpatialUnrolling::axis_product(SpatialAxis a) const {
  std::uint64_t p = 1;
  for (const auto& e : entries) {
    if (e.axis == a) p *= e.factor;
  }
  return p;
}

std::string_view arch_error_name(ArchError::Code c) {
  switch (c) {
    case ArchError::Code::TopLevelBounded: return "TopLevelBounded";
    case ArchError::Code::NonTopUnbounded: return "NonTopUnbounded";
    case ArchError::Code::EmptyServes: return "EmptyServes";
    case ArchError::Code::NoServingLevel: return "NoServingLevel";
    case ArchError::Code::TopLevelNotServing: return "TopLevelNotServing";
    case ArchError::Code::PerPeAboveShared: return "PerPeAboveShared";
    case ArchError::Code::SpatialRowOverflow: return "SpatialRowOverflow";
    case ArchError::Code::SpatialColOverflow: return "SpatialColOverflow";
    case ArchError::Code::NonPositiveDims: return "NonPositiveDims";
  }
  return "?";
}

std::vector<ArchError> validate_arch(const ArchSpec& arch) {
  std::vector<ArchError> errors;
  const auto fail = [&](ArchError::Code code, std::string msg) {
    errors.push_back({code, std::string(arch_error_name(code)) + ": " + msg});
  };

  if (arch.pe_rows == 0 || arch.pe_cols == 0) {
    fail(ArchError::Code::NonPositiveDims, "PE array dimensions must be >= 1");
  }
  if (arch.levels.empty()) {
    fail(ArchError::Code::NoServingLevel, "architecture has no memory levels");
    return errors;
  }

  const std::size_t top = arch.levels.size() - 1;
  if (!arch.levels[top].unbounded()) {
    fail(ArchError::Code::TopLevelBounded,
         "top level '" + arch.levels[top].name + "' must be unbounded");
  }
  for (std::size_t i = 0; i < top; ++i) {
    if (arch.levels[i].unbounded()) {
      fail(ArchError::Code::NonTopUnbounded,
           "level '" + arch.levels[i].name + "' is unbounded but not topmost");
    }
  }
  for (const auto& level : arch.levels) {
    if (level.serves.empty()) {
      fail(ArchError::Code::EmptyServes,
           "level '" + level.name + "' serves no operand");
    }
  }
  for (Operand op : kAllOperands) {
    const auto chain = arch.serving_chain(op);
    if (chain.empty()) {
      fail(ArchError::Code::NoServingLevel,
           std::string("operand ") + std::string(operand_name(op)) +
               " is served by no level");
      continue;
    }
    if (chain.back() != top) {
      fail(ArchError::Code::TopLevelNotServing,
           std::string("operand ") + std::string(operand_name(op)) +
               "'s topmost serving level is not the unbounded top");
    }
    // A per-PE level above a shared one would need broadcast-back; rejected.
    bool seen_shared = false;
    for (std::size_t idx : chain) {
      if (arch.levels[idx].shared) {
        seen_shared = true;
      } else if (seen_shared) {
        fail(ArchError::Code::PerPeAboveShared,
             "per-PE level '" + arch.levels[idx].name +
                 "' sits above a shared level in " +
                 std::string(operand_name(op)) + "'s chain");
      }
    }
  }
  return errors;
}

std::vector<ArchError> validate_spatial(const SpatialUnrolling& spatial,
                                        const ArchSpec& arch) {
  std::vector<ArchError> errors;
  if (spatial.axis_product(SpatialAxis::Row) > arch.pe_rows) {
    errors.push_back({ArchError::Code::SpatialRowOverflow,
                      "SpatialRowOverflow: row factors exceed pe_rows=" +
                          std::to_string(arch.pe_rows)});
  }
  if (spatial.axis_product(SpatialAxis::Col) > arch.pe_cols) {
    errors.push_back({ArchError::Code::SpatialColOverflow,
                      "SpatialColOverflow: col factors exceed pe_cols=" +
                          std::to_string(arch.pe_cols)});
  }
  return errors;
}

SpatialScale spatial_scale(Operand op, const SpatialUnrolling& spatial) {
  std::uint64_t p_total = 1;
  std::uint64_t reuse = 1;
  for (const auto& e : spatial.entries) {
    p_total *= e.factor;
    if (!operand_relevance(e.dim, op)) reuse *= e.factor;
  }
  return {p_total, reuse};
}

}  // namespace loopsched
