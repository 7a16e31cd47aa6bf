#include <array>
#include <cmath>

#include "basinlab/lattice.hpp"
#include "basinlab/simd/kernels.hpp"
#include "basinlab/trig.hpp"

namespace basinlab::simd::detail {

void kan_classify_scalar(std::span<const std::uint64_t> base, std::span<const double> x0,
                         const KanClassifyParams& params, std::span<std::uint8_t> cls,
                         std::span<std::uint64_t> steps) {
  const double dwell = static_cast<double>(params.dwell);
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::uint64_t k = base[i];
    double x = x0[i];
    double lower = 0.0, upper = 0.0;
    std::uint8_t result = 0;
    std::uint64_t t = 0;
    while (t < params.horizon) {
      const double b = cos_2pi_poly(lattice_to_unit(k)) * 0.03125;
      x = x + b * x * (1.0 - x);
      k = 3 * k;
      ++t;
      lower = x < params.radius ? lower + 1.0 : 0.0;
      upper = (1.0 - x) < params.radius ? upper + 1.0 : 0.0;
      if (lower >= dwell) {
        result = 1;
        break;
      }
      if (upper >= dwell) {
        result = 2;
        break;
      }
    }
    cls[i] = result;
    steps[i] = t;
  }
}

double kan_log_tail(std::uint64_t k, std::uint64_t count, double coef) {
  double sum = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) {
    sum += std::log(1.0 + coef * cos_2pi_poly(lattice_to_unit(k)));
    k = 3 * k;
  }
  return sum;
}

double kan_log_sum_scalar(std::uint64_t base0, std::uint64_t n, double coef) {
  std::array<std::uint64_t, 4> k{base0, 3 * base0, 9 * base0, 27 * base0};
  std::array<double, 4> sum{}, prod{1.0, 1.0, 1.0, 1.0};
  const std::uint64_t rounds = n / 4;
  for (std::uint64_t r = 0; r < rounds; ++r) {
    for (int j = 0; j < 4; ++j) {
      prod[j] = prod[j] * (1.0 + coef * cos_2pi_poly(lattice_to_unit(k[j])));
      k[j] = 81 * k[j];
    }
    if ((r + 1) % kLogChunk == 0 || r + 1 == rounds) {
      for (int j = 0; j < 4; ++j) {
        sum[j] += std::log(prod[j]);
        prod[j] = 1.0;
      }
    }
  }
  return ((sum[0] + sum[1]) + (sum[2] + sum[3])) + kan_log_tail(k[0], n % 4, coef);
}

void ep_push_scalar(double p, std::span<double> u) {
  const double q = 1.0 - p;
  for (double& v : u) v = v < p ? v / p : (v - p) / q;
}

}  // namespace basinlab::simd::detail
