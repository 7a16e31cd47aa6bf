#include "basinlab/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace basinlab::stats {

Interval wilson(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  double lo = k == 0 ? 0.0 : std::max(0.0, centre - half);
  double hi = k == n ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double block_stderr(std::span<const double> series, std::size_t blocks) {
  if (blocks < 10) throw std::invalid_argument("block_stderr needs at least 10 blocks");
  const std::size_t len = series.size() / blocks;
  if (len == 0) throw std::invalid_argument("series shorter than the block count");
  std::vector<double> means(blocks);
  for (std::size_t b = 0; b < blocks; ++b) means[b] = mean(series.subspan(b * len, len));
  return stddev(means) / std::sqrt(static_cast<double>(blocks));
}

double binomial_sigma(double p, std::uint64_t n) {
  return n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace basinlab::stats
