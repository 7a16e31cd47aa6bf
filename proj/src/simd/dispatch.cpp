#include <cstdlib>
#include <stdexcept>
#include <string>

#include "basinlab/simd/kernels.hpp"

namespace basinlab::simd {

std::string backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
#if BASINLAB_HAVE_AVX2
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend active_backend() {
  static const Backend chosen = [] {
    if (const char* env = std::getenv("BASINLAB_SIMD")) {
      const std::string want(env);
      if (want == "scalar") return Backend::Scalar;
      if (want == "avx2") return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
    }
    return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
  }();
  return chosen;
}

namespace {

void require(Backend b) {
  if (!backend_available(b)) throw std::runtime_error("SIMD backend " + backend_name(b) + " is not available");
}

}  // namespace

void kan_classify(Backend b, std::span<const std::uint64_t> base, std::span<const double> x,
                  const KanClassifyParams& params, std::span<std::uint8_t> cls, std::span<std::uint64_t> steps) {
  if (x.size() != base.size() || cls.size() != base.size() || steps.size() != base.size()) {
    throw std::invalid_argument("kan_classify: span sizes differ");
  }
  require(b);
#if BASINLAB_HAVE_AVX2
  if (b == Backend::Avx2) return detail::kan_classify_avx2(base, x, params, cls, steps);
#endif
  detail::kan_classify_scalar(base, x, params, cls, steps);
}

double kan_log_sum(Backend b, std::uint64_t base0, std::uint64_t n, double coef) {
  require(b);
#if BASINLAB_HAVE_AVX2
  if (b == Backend::Avx2) return detail::kan_log_sum_avx2(base0, n, coef);
#endif
  return detail::kan_log_sum_scalar(base0, n, coef);
}

void ep_push(Backend b, double p, std::span<double> u) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ep_push needs p in (0,1)");
  require(b);
#if BASINLAB_HAVE_AVX2
  if (b == Backend::Avx2) return detail::ep_push_avx2(p, u);
#endif
  detail::ep_push_scalar(p, u);
}

}  // namespace basinlab::simd
