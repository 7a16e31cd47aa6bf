#include <immintrin.h>

#include <array>
#include <cmath>

#include "basinlab/lattice.hpp"
#include "basinlab/simd/kernels.hpp"
#include "basinlab/trig.hpp"

namespace basinlab::simd::detail {

namespace {

// (k >> 12) · 2⁻⁵², exact: the shifted value is below 2⁵².
inline __m256d lattice_to_unit4(__m256i k) {
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  const __m256d two52 = _mm256_set1_pd(0x1.0p52);
  const __m256i v = _mm256_or_si256(_mm256_srli_epi64(k, 12), magic);
  return _mm256_mul_pd(_mm256_sub_pd(_mm256_castsi256_pd(v), two52), _mm256_set1_pd(0x1.0p-52));
}

inline __m256d cos_2pi_poly4(__m256d x) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d r = _mm256_sub_pd(x, _mm256_round_pd(x, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC));
  const __m256d a = _mm256_andnot_pd(sign, r);
  const __m256d t = _mm256_sub_pd(_mm256_set1_pd(0.25), a);
  const __m256d t2 = _mm256_mul_pd(t, t);
  __m256d p = _mm256_set1_pd(kSin2PiCoeffs[9]);
  for (int k = 8; k >= 0; --k) p = _mm256_add_pd(_mm256_mul_pd(p, t2), _mm256_set1_pd(kSin2PiCoeffs[k]));
  return _mm256_mul_pd(p, t);
}

inline __m256i times3(__m256i k) { return _mm256_add_epi64(_mm256_slli_epi64(k, 1), k); }

inline __m256i times81(__m256i k) {
  return _mm256_add_epi64(_mm256_add_epi64(_mm256_slli_epi64(k, 6), _mm256_slli_epi64(k, 4)), k);
}

}  // namespace

void kan_classify_avx2(std::span<const std::uint64_t> base, std::span<const double> x0,
                       const KanClassifyParams& params, std::span<std::uint8_t> cls,
                       std::span<std::uint64_t> steps) {
  constexpr int kLanes = 4;
  constexpr int kChunk = 32;
  const std::size_t n = base.size();

  // Lane state is kept in arrays between chunks and in registers within one.
  alignas(32) std::array<std::uint64_t, kLanes> lk{};
  alignas(32) std::array<double, kLanes> lx{}, llo{}, lup{}, lres{};
  alignas(32) std::array<std::int64_t, kLanes> lt{};
  std::array<std::size_t, kLanes> owner{};
  std::array<bool, kLanes> busy{};
  std::size_t next = 0;

  auto load = [&](int j) {
    if (next < n) {
      owner[j] = next;
      lk[j] = base[next];
      lx[j] = x0[next];
      llo[j] = lup[j] = lres[j] = 0.0;
      lt[j] = 0;
      busy[j] = true;
      ++next;
    } else {
      busy[j] = false;
      lt[j] = static_cast<std::int64_t>(params.horizon);  // parked lane: inactive
      lres[j] = 0.0;
    }
  };
  for (int j = 0; j < kLanes; ++j) load(j);

  const __m256d radius = _mm256_set1_pd(params.radius);
  const __m256d dwell = _mm256_set1_pd(static_cast<double>(params.dwell));
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d amp = _mm256_set1_pd(0.03125);
  const __m256i horizon = _mm256_set1_epi64x(static_cast<std::int64_t>(params.horizon));
  const __m256i one_i = _mm256_set1_epi64x(1);

  while (busy[0] || busy[1] || busy[2] || busy[3]) {
    __m256i k = _mm256_load_si256(reinterpret_cast<const __m256i*>(lk.data()));
    __m256d x = _mm256_load_pd(lx.data());
    __m256d lo = _mm256_load_pd(llo.data());
    __m256d up = _mm256_load_pd(lup.data());
    __m256d res = _mm256_load_pd(lres.data());
    __m256i t = _mm256_load_si256(reinterpret_cast<const __m256i*>(lt.data()));
    for (int c = 0; c < kChunk; ++c) {
      // active = undecided and t < horizon
      const __m256d undecided = _mm256_cmp_pd(res, zero, _CMP_EQ_OQ);
      const __m256d running = _mm256_castsi256_pd(_mm256_cmpgt_epi64(horizon, t));
      const __m256d active = _mm256_and_pd(undecided, running);
      if (_mm256_movemask_pd(active) == 0) break;

      const __m256d b = _mm256_mul_pd(cos_2pi_poly4(lattice_to_unit4(k)), amp);
      const __m256d xn = _mm256_add_pd(x, _mm256_mul_pd(_mm256_mul_pd(b, x), _mm256_sub_pd(one, x)));
      x = _mm256_blendv_pd(x, xn, active);
      k = _mm256_castpd_si256(
          _mm256_blendv_pd(_mm256_castsi256_pd(k), _mm256_castsi256_pd(times3(k)), active));
      t = _mm256_add_epi64(t, _mm256_and_si256(_mm256_castpd_si256(active), one_i));

      const __m256d in_lo = _mm256_cmp_pd(x, radius, _CMP_LT_OQ);
      const __m256d in_up = _mm256_cmp_pd(_mm256_sub_pd(one, x), radius, _CMP_LT_OQ);
      const __m256d lo_n = _mm256_and_pd(in_lo, _mm256_add_pd(lo, one));
      const __m256d up_n = _mm256_and_pd(in_up, _mm256_add_pd(up, one));
      lo = _mm256_blendv_pd(lo, lo_n, active);
      up = _mm256_blendv_pd(up, up_n, active);
      const __m256d hit_lo = _mm256_and_pd(active, _mm256_cmp_pd(lo, dwell, _CMP_GE_OQ));
      const __m256d hit_up = _mm256_and_pd(active, _mm256_cmp_pd(up, dwell, _CMP_GE_OQ));
      res = _mm256_blendv_pd(res, one, hit_lo);
      res = _mm256_blendv_pd(res, _mm256_set1_pd(2.0), hit_up);
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(lk.data()), k);
    _mm256_store_pd(lx.data(), x);
    _mm256_store_pd(llo.data(), lo);
    _mm256_store_pd(lup.data(), up);
    _mm256_store_pd(lres.data(), res);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lt.data()), t);
    for (int j = 0; j < kLanes; ++j) {
      if (busy[j] && (lres[j] != 0.0 || lt[j] >= static_cast<std::int64_t>(params.horizon))) {
        cls[owner[j]] = static_cast<std::uint8_t>(lres[j]);
        steps[owner[j]] = static_cast<std::uint64_t>(lt[j]);
        load(j);
      }
    }
  }
}

double kan_log_sum_avx2(std::uint64_t base0, std::uint64_t n, double coef) {
  __m256i k = _mm256_set_epi64x(static_cast<std::int64_t>(27 * base0), static_cast<std::int64_t>(9 * base0),
                                static_cast<std::int64_t>(3 * base0), static_cast<std::int64_t>(base0));
  const __m256d c = _mm256_set1_pd(coef);
  const __m256d one = _mm256_set1_pd(1.0);
  alignas(32) std::array<double, 4> sum{}, prod{};
  __m256d p = one;
  const std::uint64_t rounds = n / 4;
  for (std::uint64_t r = 0; r < rounds; ++r) {
    p = _mm256_mul_pd(p, _mm256_add_pd(one, _mm256_mul_pd(c, cos_2pi_poly4(lattice_to_unit4(k)))));
    k = times81(k);
    if ((r + 1) % kLogChunk == 0 || r + 1 == rounds) {
      _mm256_store_pd(prod.data(), p);
      for (int j = 0; j < 4; ++j) sum[j] += std::log(prod[j]);
      p = one;
    }
  }
  alignas(32) std::array<std::uint64_t, 4> kk{};
  _mm256_store_si256(reinterpret_cast<__m256i*>(kk.data()), k);
  return ((sum[0] + sum[1]) + (sum[2] + sum[3])) + kan_log_tail(kk[0], n % 4, coef);
}

void ep_push_avx2(double p, std::span<double> u) {
  const __m256d pv = _mm256_set1_pd(p);
  const __m256d qv = _mm256_set1_pd(1.0 - p);
  std::size_t i = 0;
  for (; i + 4 <= u.size(); i += 4) {
    const __m256d v = _mm256_loadu_pd(u.data() + i);
    const __m256d left = _mm256_div_pd(v, pv);
    const __m256d right = _mm256_div_pd(_mm256_sub_pd(v, pv), qv);
    _mm256_storeu_pd(u.data() + i, _mm256_blendv_pd(right, left, _mm256_cmp_pd(v, pv, _CMP_LT_OQ)));
  }
  ep_push_scalar(p, u.subspan(i));
}

}  // namespace basinlab::simd::detail
