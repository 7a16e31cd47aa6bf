#pragma once

#include <cmath>
#include <cstdint>

#include "basinlab/trig.hpp"

namespace basinlab {

// Circle points stored as k / 2⁶⁴. Integer multiplication by L is then exactly
// the expanding map u ↦ Lu mod 1, and integer matrices act exactly on pairs.

/// Top 52 bits of k as a double in [0,1). 52 bits so vector code can convert
/// with the 2⁵² exponent trick.
inline double lattice_to_unit(std::uint64_t k) noexcept {
  return static_cast<double>(k >> 12) * 0x1.0p-52;
}

inline std::uint64_t unit_to_lattice(double v) noexcept {
  return static_cast<std::uint64_t>(std::ldexp(wrap_unit(v), 64));
}

}  // namespace basinlab
