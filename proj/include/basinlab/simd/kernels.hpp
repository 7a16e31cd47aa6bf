#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace basinlab::simd {

enum class Backend { Scalar, Avx2 };

std::string backend_name(Backend b);
bool backend_available(Backend b);

/// Backend used by default: BASINLAB_SIMD=scalar|avx2 if set (an unavailable
/// request falls back to scalar), otherwise the best one the CPU supports.
Backend active_backend();

/// Kan orbit classification. Each orbit starts at (base[i], x[i]) with base
/// on the 2⁻⁶⁴ lattice and steps
///     x ← x + (cos(2πu)/32)·x(1-x),   u ← 3u mod 1.
/// After every step the dwell counters of the two boundary circles are
/// updated (x < radius, 1 - x < radius); the first to reach `dwell` decides.
/// cls: 0 undecided, 1 lower (x = 0), 2 upper (x = 1). steps: steps taken.
struct KanClassifyParams {
  std::uint64_t horizon;
  double radius;
  std::uint32_t dwell;
};

void kan_classify(Backend b, std::span<const std::uint64_t> base, std::span<const double> x,
                  const KanClassifyParams& params, std::span<std::uint8_t> cls, std::span<std::uint64_t> steps);

/// Σ_{k<n} log(1 + coef·cos(2πu_k)), u_0 = base0/2⁶⁴, u_{k+1} = 3u_k mod 1.
/// Summation layout (four interleaved lanes, logs of 64-factor products) is
/// fixed, so every backend returns the same bits.
double kan_log_sum(Backend b, std::uint64_t base0, std::uint64_t n, double coef);

/// In-place u ← E_p(u).
void ep_push(Backend b, double p, std::span<double> u);

namespace detail {
void kan_classify_scalar(std::span<const std::uint64_t>, std::span<const double>, const KanClassifyParams&,
                         std::span<std::uint8_t>, std::span<std::uint64_t>);
double kan_log_sum_scalar(std::uint64_t, std::uint64_t, double);
void ep_push_scalar(double, std::span<double>);
#if BASINLAB_HAVE_AVX2
void kan_classify_avx2(std::span<const std::uint64_t>, std::span<const double>, const KanClassifyParams&,
                       std::span<std::uint8_t>, std::span<std::uint64_t>);
double kan_log_sum_avx2(std::uint64_t, std::uint64_t, double);
void ep_push_avx2(double, std::span<double>);
#endif
/// Chunk length for the product-then-log layout of kan_log_sum.
inline constexpr std::uint64_t kLogChunk = 64;
/// Tail of kan_log_sum after the four-lane part; shared by all backends.
double kan_log_tail(std::uint64_t base, std::uint64_t count, double coef);
}  // namespace detail

}  // namespace basinlab::simd
