#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "basinlab/maps1d.hpp"
#include "basinlab/simd/kernels.hpp"
#include "basinlab/skew.hpp"
#include "basinlab/stats.hpp"
#include "basinlab/symbolic.hpp"

namespace basinlab::attract {

struct ClassifyParams {
  std::uint64_t horizon = 100000;
  std::uint32_t dwell = 100;
};

struct Classification {
  int id;               // catalog index, -1 when undecided
  std::uint64_t steps;  // steps taken until the decision (or the horizon)
};

/// Steps until some catalog region has held the fiber point for `dwell`
/// consecutive steps (entries are tested in catalog order), or `horizon`.
Classification classify_orbit(const skew::SkewSystem& sys, skew::SystemState st, const ClassifyParams& params);

enum class Coord { Base, X, Y };

struct Axis {
  Coord coord;
  double lo;
  double hi;
  std::size_t cells;
};

/// Zero, one or two axes; coordinates without an axis are drawn from the
/// reference measure.
struct GridSpec {
  std::vector<Axis> axes;
  std::size_t cell_count() const noexcept;
  /// Bounds of cell `cell` along axis `a`.
  std::pair<double, double> bounds(std::size_t cell, std::size_t a) const;
};

std::string coord_name(Coord c);

struct CellCounts {
  std::vector<std::uint64_t> counts;  // per catalog entry
  std::uint64_t undecided = 0;
  std::uint64_t samples = 0;
};

struct BasinReport {
  std::string preset;
  std::uint64_t seed = 0;
  GridSpec grid;
  std::vector<std::string> names;
  std::vector<CellCounts> cells;

  double fraction(std::size_t cell, std::size_t id) const;
  /// Wilson 99% interval for the basin fraction of `id` in `cell`.
  stats::Interval confidence(std::size_t cell, std::size_t id) const;
  /// Sum over cells.
  CellCounts total() const;

  std::string to_csv() const;
  /// One pixel per cell, gray = 254·fraction of the first entry, 255 when
  /// undecided orbits are the majority of the cell.
  std::string to_pgm(bool binary) const;
};

/// Per-cell classification of `samples_per_cell` seeded starts. Kan uses the
/// batched kernel of `backend` (default: the active one); all other presets
/// step orbit by orbit. Deterministic in `seed` for any worker count.
BasinReport basin_grid(const skew::SkewSystem& sys, const GridSpec& grid, std::size_t samples_per_cell,
                       const ClassifyParams& params, std::uint64_t seed, unsigned workers,
                       std::optional<simd::Backend> backend = std::nullopt);

enum class Verdict { Pass, Fail, Inconclusive };
std::string verdict_name(Verdict v);

struct IntermingledVerdict {
  std::vector<Verdict> cells;
  Verdict global;
  double margin;  // smallest 99% lower bound over cells and both entries
};

/// A cell passes when both entries' 99% lower bounds are positive, is
/// inconclusive when it holds no decided orbit, and fails otherwise.
IntermingledVerdict intermingled_verdict(const BasinReport& report, std::size_t a, std::size_t b);

struct LikelyLimit {
  std::vector<std::string> members;
  std::vector<double> frequencies;  // per catalog entry
  double unexplained;               // undecided fraction
  std::uint64_t samples;
};

LikelyLimit likely_limit_estimate(const skew::SkewSystem& sys, std::uint64_t n_samples, const ClassifyParams& params,
                                  std::uint64_t seed, unsigned workers);

struct GraphSample {
  std::size_t depth;
  double X;
  std::vector<double> trace;  // trace[k-1] = f_{ω₋₁} ∘ ... ∘ f_{ω₋ₖ}(l)
};

/// X_l(ω) at depth n. `past` holds ω₋ₙ..ω₋₁ as its last n symbols.
/// Throws NumericalError if the trace increases by more than 1e-12.
GraphSample pullback_graph(const maps1d::Map1D& f0, const maps1d::Map1D& f1, const symbolic::Word& past,
                           std::size_t depth);

/// X_r(ω) at depth n: f⁻¹_{ω₀} ∘ ... ∘ f⁻¹_{ωₙ₋₁}(r), a nondecreasing trace.
/// `future` holds ω₀..ωₙ₋₁ as its first n symbols.
GraphSample pullback_repeller(const maps1d::Map1D& f0, const maps1d::Map1D& f1, const symbolic::Word& future,
                              std::size_t depth);

struct ThicknessEstimate {
  double mean;               // E[X_l] = (ν × λ)(Λ_l)
  double mean_ratio;         // mean / l
  stats::Interval ci;        // 99% normal interval for the mean
  double positive_fraction;  // fraction of words with X_l > 1e-6
  double tail_drift;         // |mean(depth) - mean(depth - 10)|
  bool monotone;             // every trace nonincreasing
  std::vector<double> sorted;  // X_l values, ascending; Φ is their empirical CDF

  /// Φ(x) = fraction of words with X_l ≤ x.
  double distribution(double x) const;
};

/// Monte Carlo over ν_{1/2} words. Requires depth ≥ 40 and throws
/// NumericalError when the mean moves by 1e-4 or more over the last 10 levels.
ThicknessEstimate thickness_estimate(const maps1d::Map1D& f0, const maps1d::Map1D& f1, std::size_t n_words,
                                     std::size_t depth, std::uint64_t seed, unsigned workers);

/// Cylinder [a₀..aₖ] on ω₀..ωₖ times a fiber interval.
struct Ball {
  symbolic::Cylinder cylinder;
  double lo;
  double hi;
};

/// For each ball, searches up to `tries` seeded words ω in the cylinder for a
/// point x of the interval with X_l(ω) + margin < x < X_r(ω) - margin. Free
/// symbols are Bernoulli with P(0) swept from 1/2 toward 1 across tries.
std::vector<bool> complement_density_probe(const maps1d::Map1D& f0, const maps1d::Map1D& f1,
                                           const std::vector<Ball>& balls, std::size_t depth, std::uint64_t seed,
                                           double margin = 1e-6, std::size_t tries = 64);

struct Occupancy {
  std::size_t cells_x = 0;
  std::size_t cells_y = 1;  // 1 for one-dimensional fibers
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> fine_x;  // 2¹⁴ bins along the first fiber coordinate
  std::uint64_t total = 0;

  double mass(std::size_t ix, std::size_t iy = 0) const;
  /// Cells with occupancy fraction above `threshold`.
  std::vector<std::size_t> support(double threshold = 1e-4) const;
  /// Fraction of occupancy in fine bins whose centers lie in (lo, hi).
  double fraction_between(double lo, double hi) const;
};

/// Time-averaged fiber occupancy after burn-in, from starts drawn from the
/// reference measure (fiber x optionally restricted to `x_range`).
Occupancy min_attractor_support(const skew::SkewSystem& sys, std::size_t n_orbits, std::uint64_t n_steps,
                                std::uint64_t burn_in, std::size_t cells, std::uint64_t seed, unsigned workers,
                                std::optional<std::pair<double, double>> x_range = std::nullopt);

}  // namespace basinlab::attract
