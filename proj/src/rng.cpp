#include "basinlab/rng.hpp"

namespace basinlab {

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (a * 0xd6e8feb86659fd93ULL));
  k = splitmix64(k ^ (b * 0xa0761d6478bd642fULL + 0x1d8e4e27c47d124fULL));
  return k;
}

}  // namespace basinlab
