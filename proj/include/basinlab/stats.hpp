#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace basinlab::stats {

/// Two-sided normal quantile for 99% confidence.
inline constexpr double kZ99 = 2.5758293035489004;

struct Interval {
  double lo;
  double hi;
};

/// Wilson score interval for k successes out of n at normal quantile z.
Interval wilson(std::uint64_t k, std::uint64_t n, double z = kZ99);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> xs);

/// Standard error of the mean of a correlated series from `blocks` equal
/// consecutive block means (blocks ≥ 10; trailing remainder dropped).
double block_stderr(std::span<const double> series, std::size_t blocks);

/// Binomial standard deviation of a frequency estimate.
double binomial_sigma(double p, std::uint64_t n);

}  // namespace basinlab::stats
