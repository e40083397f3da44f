#include "loopsched/workload.hpp"

#include <algorithm>

#include "loopsched/archspec.hpp"
#include "loopsched/errors.hpp"

namespace loopsched {

std::string_view dim_name(Dim d) {
  switch (d) {
    case Dim::B: return "B";
    case Dim::K: return "K";
    case Dim::C: return "C";
    case Dim::OY: return "OY";
    case Dim::OX: return "OX";
    case Dim::FY: return "FY";
    case Dim::FX: return "FX";
  }
  return "?";
}

std::optional<Dim> parse_dim(std::string_view name) {
  for (Dim d : kAllDims) {
    if (dim_name(d) == name) return d;
  }
  return std::nullopt;
}

std::string_view operand_name(Operand op) {
  switch (op) {
    case Operand::Input: return "I";
    case Operand::Weight: return "W";
    case Operand::Output: return "O";
  }
  return "?";
}

std::optional<Operand> parse_operand(std::string_view name) {
  for (Operand op : kAllOperands) {
    if (operand_name(op) == name) return op;
  }
  return std::nullopt;
}

std::uint64_t LayerSpec::dim(Dim d) const {
  switch (d) {
    case Dim::B: return b;
    case Dim::K: return k;
    case Dim::C: return c;
    case Dim::OY: return oy;
    case Dim::OX: return ox;
    case Dim::FY: return fy;
    case Dim::FX: return fx;
  }
  return 1;
}

bool LayerSpec::same_shape(const LayerSpec& other) const {
  return b == other.b && k == other.k && c == other.c && oy == other.oy &&
         ox == other.ox && fy == other.fy && fx == other.fx &&
         stride_y == other.stride_y && stride_x == other.stride_x &&
         word_bits == other.word_bits;
}

bool operand_relevance(Dim d, Operand op) {
  switch (op) {
    case Operand::Weight:
      return d == Dim::K || d == Dim::C || d == Dim::FY || d == Dim::FX;
    case Operand::Output:
      return d == Dim::B || d == Dim::K || d == Dim::OY || d == Dim::OX;
    case Operand::Input:
      // Sliding-window dims OY/OX/FY/FX all index the input footprint.
      return d != Dim::K;
  }
  return false;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) return false;
  }
  return true;
}

namespace {

void append_prime_factors(Dim d, std::uint64_t n, std::vector<Loop>& out) {
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      out.push_back({d, p});
      n /= p;
    }
  }
  if (n > 1) out.push_back({d, n});
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
  if (r > static_cast<unsigned __int128>(UINT64_MAX)) {
    throw Error("integer overflow in loop-size product");
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace

std::vector<Loop> lpf_decompose(const LayerSpec& layer,
                                const SpatialUnrolling& spatial) {
  std::vector<Loop> out;
  for (Dim d : kAllDims) {
    const std::uint64_t full = layer.dim(d);
    const std::uint64_t sp = spatial.factor_product(d);
    if (sp == 0 || full % sp != 0) {
      throw NonDivisibleUnrolling(
          "spatial factor " + std::to_string(sp) + " does not divide " +
          std::string(dim_name(d)) + "=" + std::to_string(full) +
          " of layer '" + layer.name + "'");
    }
    append_prime_factors(d, full / sp, out);
  }
  // append_prime_factors emits ascending factors per dimension, and
  // kAllDims is canonical order, so `out` is already canonical.
  return out;
}

std::vector<Loop> limit_lpfs(std::vector<Loop> loops, std::size_t max_n) {
  while (loops.size() > max_n) {
    // Per dimension, the two smallest factors; pick the smallest such pair,
    // ties broken by earliest canonical dimension.
    bool found = false;
    Dim best_dim = Dim::B;
    std::uint64_t best_f1 = 0, best_f2 = 0;
    for (Dim d : kAllDims) {
      std::uint64_t f1 = 0, f2 = 0;  // two smallest factors of d
      for (const Loop& l : loops) {
        if (l.dim != d) continue;
        if (f1 == 0 || l.factor < f1) {
          f2 = f1;
          f1 = l.factor;
        } else if (f2 == 0 || l.factor < f2) {
          f2 = l.factor;
        }
      }
      if (f2 == 0) continue;  // fewer than two factors in d
      if (!found || f1 < best_f1 || (f1 == best_f1 && f2 < best_f2)) {
        found = true;
        best_dim = d;
        best_f1 = f1;
        best_f2 = f2;
      }
    }
    if (!found) break;  // nothing left to merge

    auto first = std::find(loops.begin(), loops.end(), Loop{best_dim, best_f1});
    first->factor = checked_mul(best_f1, best_f2);
    auto second = std::find(std::next(first), loops.end(),
                            Loop{best_dim, best_f2});
    if (second == loops.end()) {
      second = std::find(loops.begin(), first, Loop{best_dim, best_f2});
    }
    loops.erase(second);
  }
  return loops;
}

std::uint64_t tile_footprint(Operand op, const TileSizes& tile,
                             const LayerSpec& layer) {
  const auto at = [&](Dim d) { return tile[static_cast<std::size_t>(d)]; };
  switch (op) {
    case Operand::Weight:
      return checked_mul(checked_mul(at(Dim::K), at(Dim::C)),
                         checked_mul(at(Dim::FY), at(Dim::FX)));
    case Operand::Output:
      return checked_mul(checked_mul(at(Dim::B), at(Dim::K)),
                         checked_mul(at(Dim::OY), at(Dim::OX)));
    case Operand::Input: {
      const std::uint64_t iy = layer.stride_y * (at(Dim::OY) - 1) + at(Dim::FY);
      const std::uint64_t ix = layer.stride_x * (at(Dim::OX) - 1) + at(Dim::FX);
      return checked_mul(checked_mul(at(Dim::B), at(Dim::C)),
                         checked_mul(iy, ix));
    }
  }
  return 0;
}

std::uint64_t total_macs(const LayerSpec& layer) {
  std::uint64_t r = 1;
  for (Dim d : kAllDims) r = checked_mul(r, layer.dim(d));
  return r;
}

}  // namespace loopsched
