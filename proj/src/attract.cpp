#include "basinlab/attract.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "basinlab/errors.hpp"
#include "basinlab/format.hpp"
#include "basinlab/parallel.hpp"
#include "basinlab/rng.hpp"

namespace basinlab::attract {

using skew::SkewSystem;
using skew::SystemState;

Classification classify_orbit(const SkewSystem& sys, SystemState st, const ClassifyParams& params) {
  if (params.dwell < 1 || params.horizon < params.dwell) throw std::invalid_argument("need horizon >= dwell >= 1");
  const auto& catalog = sys.catalog();
  std::vector<std::uint32_t> held(catalog.size(), 0);
  for (std::uint64_t t = 1; t <= params.horizon; ++t) {
    sys.step(st);
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      held[i] = sys.contains(catalog[i], st) ? held[i] + 1 : 0;
      if (held[i] >= params.dwell) return {static_cast<int>(i), t};
    }
  }
  return {-1, params.horizon};
}

std::size_t GridSpec::cell_count() const noexcept {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.cells;
  return n;
}

std::pair<double, double> GridSpec::bounds(std::size_t cell, std::size_t a) const {
  // Axis 0 varies fastest.
  std::size_t idx = cell;
  for (std::size_t k = 0; k < a; ++k) idx /= axes[k].cells;
  idx %= axes[a].cells;
  const auto& ax = axes[a];
  const double w = (ax.hi - ax.lo) / static_cast<double>(ax.cells);
  return {ax.lo + w * static_cast<double>(idx), ax.lo + w * static_cast<double>(idx + 1)};
}

std::string coord_name(Coord c) {
  switch (c) {
    case Coord::Base: return "base";
    case Coord::X: return "x";
    case Coord::Y: return "y";
  }
  return "?";
}

double BasinReport::fraction(std::size_t cell, std::size_t id) const {
  const auto& c = cells.at(cell);
  return c.samples ? static_cast<double>(c.counts.at(id)) / static_cast<double>(c.samples) : 0.0;
}

stats::Interval BasinReport::confidence(std::size_t cell, std::size_t id) const {
  const auto& c = cells.at(cell);
  return stats::wilson(c.counts.at(id), c.samples);
}

CellCounts BasinReport::total() const {
  CellCounts t;
  t.counts.assign(names.size(), 0);
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < names.size(); ++i) t.counts[i] += c.counts[i];
    t.undecided += c.undecided;
    t.samples += c.samples;
  }
  return t;
}

std::string BasinReport::to_csv() const {
  std::ostringstream os;
  os << "# preset=" << preset << " seed=" << seed << " analysis=basin_grid\n";
  os << "cell";
  for (const auto& a : grid.axes) os << ',' << coord_name(a.coord) << "_lo," << coord_name(a.coord) << "_hi";
  os << ",samples,undecided";
  for (const auto& n : names) os << ',' << n << "_count," << n << "_fraction," << n << "_ci_lo," << n << "_ci_hi";
  os << '\n';
  for (std::size_t c = 0; c < cells.size(); ++c) {
    os << c;
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      const auto [lo, hi] = grid.bounds(c, a);
      os << ',' << format_real(lo) << ',' << format_real(hi);
    }
    os << ',' << cells[c].samples << ',' << cells[c].undecided;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto ci = confidence(c, i);
      os << ',' << cells[c].counts[i] << ',' << format_real(fraction(c, i)) << ',' << format_real(ci.lo) << ','
         << format_real(ci.hi);
    }
    os << '\n';
  }
  return os.str();
}

std::string BasinReport::to_pgm(bool binary) const {
  const std::size_t w = grid.axes.empty() ? 1 : grid.axes[0].cells;
  const std::size_t h = grid.axes.size() > 1 ? grid.axes[1].cells : 1;
  std::ostringstream os;
  os << (binary ? "P5" : "P2") << '\n';
  os << "# preset=" << preset << " seed=" << seed << '\n';
  os << "# gray = 254 * fraction(" << (names.empty() ? "" : names[0]) << "), 255 = undecided majority\n";
  os << w << ' ' << h << "\n255\n";
  // Row 0 is the top of the image: highest cells of axis 1 first.
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t iy = h - 1 - row;
    for (std::size_t ix = 0; ix < w; ++ix) {
      const std::size_t c = ix + w * iy;
      const auto& cell = cells[c];
      int gray = 255;
      if (2 * cell.undecided <= cell.samples && cell.samples > 0) {
        gray = static_cast<int>(std::lround(254.0 * fraction(c, 0)));
      }
      if (binary) {
        os.put(static_cast<char>(static_cast<unsigned char>(gray)));
      } else {
        os << gray << (ix + 1 == w ? '\n' : ' ');
      }
    }
  }
  return os.str();
}

namespace {

skew::StartSpec start_for(const GridSpec& grid, std::size_t cell, std::uint64_t key) {
  skew::StartSpec spec;
  for (std::size_t a = 0; a < grid.axes.size(); ++a) {
    const auto [lo, hi] = grid.bounds(cell, a);
    const double v = lo + (hi - lo) * uniform_at(key, 100 + a);
    switch (grid.axes[a].coord) {
      case Coord::Base: spec.base = v; break;
      case Coord::X: spec.x = v; break;
      case Coord::Y: spec.y = v; break;
    }
  }
  return spec;
}

}  // namespace

BasinReport basin_grid(const SkewSystem& sys, const GridSpec& grid, std::size_t samples_per_cell,
                       const ClassifyParams& params, std::uint64_t seed, unsigned workers,
                       std::optional<simd::Backend> backend) {
  if (samples_per_cell == 0) throw std::invalid_argument("basin_grid needs samples_per_cell >= 1");
  if (grid.axes.size() > 2) throw std::invalid_argument("basin_grid supports at most two axes");
  for (const auto& a : grid.axes) {
    if (a.cells == 0 || !(a.hi > a.lo)) throw std::invalid_argument("grid axes need cells >= 1 and hi > lo");
    if (a.coord == Coord::Y && sys.fiber_dim() < 2) throw std::invalid_argument("preset has no y coordinate");
  }
  BasinReport report;
  report.preset = sys.name();
  report.seed = seed;
  report.grid = grid;
  for (const auto& e : sys.catalog()) report.names.push_back(e.name);
  const std::size_t n_cells = grid.cell_count();
  report.cells.assign(n_cells, CellCounts{std::vector<std::uint64_t>(report.names.size(), 0), 0, 0});

  const bool kan_fast = sys.preset() == skew::Preset::Kan;
  const simd::Backend be = backend.value_or(simd::active_backend());

  parallel_for(n_cells, workers, [&](std::size_t cell) {
    CellCounts& out = report.cells[cell];
    out.samples = samples_per_cell;
    std::vector<SystemState> starts(samples_per_cell);
    for (std::size_t s = 0; s < samples_per_cell; ++s) {
      const std::uint64_t key = derive_key(seed, cell, s);
      starts[s] = sys.start_state(key, start_for(grid, cell, key));
    }
    if (kan_fast) {
      std::vector<std::uint64_t> base(samples_per_cell), steps(samples_per_cell);
      std::vector<double> x(samples_per_cell);
      std::vector<std::uint8_t> cls(samples_per_cell);
      for (std::size_t s = 0; s < samples_per_cell; ++s) {
        base[s] = starts[s].base;
        x[s] = starts[s].fiber[0];
      }
      const double radius = sys.catalog()[0].radius;
      simd::kan_classify(be, base, x, {params.horizon, radius, params.dwell}, cls, steps);
      for (auto c : cls) {
        if (c == 0) ++out.undecided; else ++out.counts[c - 1u];
      }
      return;
    }
    for (const auto& st : starts) {
      const auto r = classify_orbit(sys, st, params);
      if (r.id < 0) ++out.undecided; else ++out.counts[static_cast<std::size_t>(r.id)];
    }
  });
  return report;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

IntermingledVerdict intermingled_verdict(const BasinReport& report, std::size_t a, std::size_t b) {
  if (a >= report.names.size() || b >= report.names.size() || a == b) {
    throw std::invalid_argument("intermingled_verdict needs two distinct catalog entries");
  }
  IntermingledVerdict v;
  v.margin = INFINITY;
  bool any_fail = false, any_inconclusive = false;
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    const auto& cell = report.cells[c];
    Verdict cv;
    if (cell.samples == cell.undecided) {
      cv = Verdict::Inconclusive;
      v.margin = 0.0;
    } else {
      const double lo_a = report.confidence(c, a).lo, lo_b = report.confidence(c, b).lo;
      v.margin = std::min({v.margin, lo_a, lo_b});
      // A missing class may hide among undecided orbits, so only a fully
      // decided cell can fail.
      cv = lo_a > 0.0 && lo_b > 0.0 ? Verdict::Pass
           : cell.undecided > 0     ? Verdict::Inconclusive
                                    : Verdict::Fail;
    }
    any_fail = any_fail || cv == Verdict::Fail;
    any_inconclusive = any_inconclusive || cv == Verdict::Inconclusive;
    v.cells.push_back(cv);
  }
  v.global = any_fail ? Verdict::Fail : any_inconclusive ? Verdict::Inconclusive : Verdict::Pass;
  if (report.cells.empty()) {
    v.global = Verdict::Inconclusive;
    v.margin = 0.0;
  }
  return v;
}

LikelyLimit likely_limit_estimate(const SkewSystem& sys, std::uint64_t n_samples, const ClassifyParams& params,
                                  std::uint64_t seed, unsigned workers) {
  if (n_samples < 1000) throw std::invalid_argument("likely_limit_estimate needs n_samples >= 1000");
  const auto report = basin_grid(sys, GridSpec{}, n_samples, params, seed, workers);
  const auto t = report.total();
  LikelyLimit out;
  out.samples = t.samples;
  for (std::size_t i = 0; i < report.names.size(); ++i) {
    const double f = static_cast<double>(t.counts[i]) / static_cast<double>(t.samples);
    out.frequencies.push_back(f);
    if (t.counts[i] > 0) out.members.push_back(report.names[i]);
  }
  out.unexplained = static_cast<double>(t.undecided) / static_cast<double>(t.samples);
  return out;
}

namespace {

const maps1d::Map1D& pick(const maps1d::Map1D& f0, const maps1d::Map1D& f1, int symbol) {
  return symbol == 0 ? f0 : f1;
}

double design_point(const maps1d::Map1D& f1, std::size_t index) {
  if (f1.spec().params.size() < 2) throw std::invalid_argument("pullback needs a pair with designed l, r");
  return f1.spec().params[index];
}

}  // namespace

GraphSample pullback_graph(const maps1d::Map1D& f0, const maps1d::Map1D& f1, const symbolic::Word& past,
                           std::size_t depth) {
  if (past.size() < depth) throw std::invalid_argument("word shorter than depth");
  const double l = design_point(f1, 0);
  GraphSample g{depth, l, {}};
  g.trace.reserve(depth);
  const std::size_t last = past.size();
  for (std::size_t k = 1; k <= depth; ++k) {
    double x = l;
    // f_{ω₋₁} ∘ ... ∘ f_{ω₋ₖ}(l): apply ω₋ₖ first.
    for (std::size_t j = k; j >= 1; --j) x = pick(f0, f1, past.symbols[last - j]).apply(x, 1);
    const double prev = g.trace.empty() ? l : g.trace.back();
    if (x > prev + 1e-12) throw NumericalError("pullback trace increased", x - prev);
    g.trace.push_back(x);
  }
  if (!g.trace.empty()) g.X = g.trace.back();
  return g;
}

GraphSample pullback_repeller(const maps1d::Map1D& f0, const maps1d::Map1D& f1, const symbolic::Word& future,
                              std::size_t depth) {
  if (future.size() < depth) throw std::invalid_argument("word shorter than depth");
  const double r = design_point(f1, 1);
  GraphSample g{depth, r, {}};
  g.trace.reserve(depth);
  for (std::size_t k = 1; k <= depth; ++k) {
    double x = r;
    for (std::size_t j = k; j >= 1; --j) x = pick(f0, f1, future.symbols[j - 1]).apply(x, -1);
    const double prev = g.trace.empty() ? r : g.trace.back();
    if (x < prev - 1e-12) throw NumericalError("repeller trace decreased", prev - x);
    g.trace.push_back(x);
  }
  if (!g.trace.empty()) g.X = g.trace.back();
  return g;
}

namespace {

// X_l along nested depths without the O(n²) trace: evaluate at the requested
// depths only.
double pullback_value(const maps1d::Map1D& f0, const maps1d::Map1D& f1, const symbolic::LazyWord& w, double l,
                      std::size_t depth) {
  double x = l;
  for (std::size_t j = depth; j >= 1; --j) x = pick(f0, f1, w.at(-static_cast<std::int64_t>(j))).apply(x, 1);
  return x;
}

}  // namespace

double ThicknessEstimate::distribution(double x) const {
  if (sorted.empty()) return 0.0;
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

ThicknessEstimate thickness_estimate(const maps1d::Map1D& f0, const maps1d::Map1D& f1, std::size_t n_words,
                                     std::size_t depth, std::uint64_t seed, unsigned workers) {
  if (depth < 40) throw std::invalid_argument("thickness_estimate needs depth >= 40");
  if (n_words < 2) throw std::invalid_argument("thickness_estimate needs at least two words");
  const double l = design_point(f1, 0);
  std::vector<double> values(n_words), shallow(n_words);
  std::vector<char> mono(n_words, 1);
  parallel_for(n_words, workers, [&](std::size_t i) {
    const symbolic::LazyWord w(symbolic::BernoulliSpec::binary(0.5), derive_key(seed, 0x7b1c, i));
    const auto past = w.materialize(-static_cast<std::int64_t>(depth), 0);
    try {
      const auto g = pullback_graph(f0, f1, past, depth);
      values[i] = g.X;
      shallow[i] = g.trace[depth - 11];
    } catch (const NumericalError&) {
      mono[i] = 0;
      values[i] = pullback_value(f0, f1, w, l, depth);
      shallow[i] = pullback_value(f0, f1, w, l, depth - 10);
    }
  });
  ThicknessEstimate est;
  est.mean = stats::mean(values);
  est.mean_ratio = est.mean / l;
  const double half = stats::kZ99 * stats::stddev(values) / std::sqrt(static_cast<double>(n_words));
  est.ci = {est.mean - half, est.mean + half};
  est.positive_fraction =
      static_cast<double>(std::count_if(values.begin(), values.end(), [](double v) { return v > 1e-6; })) /
      static_cast<double>(n_words);
  est.tail_drift = std::fabs(est.mean - stats::mean(shallow));
  est.monotone = std::all_of(mono.begin(), mono.end(), [](char m) { return m != 0; });
  est.sorted = values;
  std::sort(est.sorted.begin(), est.sorted.end());
  if (!(est.tail_drift < 1e-4)) throw NumericalError("pullback tail unstable, increase depth", est.tail_drift);
  return est;
}

std::vector<bool> complement_density_probe(const maps1d::Map1D& f0, const maps1d::Map1D& f1,
                                           const std::vector<Ball>& balls, std::size_t depth, std::uint64_t seed,
                                           double margin, std::size_t tries) {
  const double l = design_point(f1, 0), r = design_point(f1, 1);
  std::vector<bool> out;
  out.reserve(balls.size());
  for (std::size_t b = 0; b < balls.size(); ++b) {
    const auto& ball = balls[b];
    const auto& fixed = ball.cylinder.fixed_symbols.symbols;
    if (fixed.size() > depth) throw std::invalid_argument("cylinder deeper than the probe depth");
    bool found = false;
    for (std::size_t t = 0; t < tries && !found; ++t) {
      // Free symbols are drawn with P(0) swept from 1/2 toward 1: long runs of
      // 0 pull X_l down and push X_r up, widening the gap between graphs.
      const double q = tries > 1 ? 0.5 + 0.49 * static_cast<double>(t) / static_cast<double>(tries - 1) : 0.5;
      const std::uint64_t key = derive_key(seed, b, t);
      const symbolic::LazyWord base(symbolic::BernoulliSpec::binary(q), derive_key(key, 1));
      double xr = r;
      for (std::size_t j = depth; j >= 1; --j) {
        const std::size_t idx = j - 1;
        const int s = idx < fixed.size() ? fixed[idx] : base.at(static_cast<std::int64_t>(idx));
        xr = pick(f0, f1, s).apply(xr, -1);
      }
      const double xl = pullback_value(f0, f1, base, l, depth);
      const double a = std::max(ball.lo, xl + margin), c = std::min(ball.hi, xr - margin);
      found = a < c;
    }
    out.push_back(found);
  }
  return out;
}

double Occupancy::mass(std::size_t ix, std::size_t iy) const {
  return total ? static_cast<double>(counts.at(ix + cells_x * iy)) / static_cast<double>(total) : 0.0;
}

std::vector<std::size_t> Occupancy::support(double threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (total && static_cast<double>(counts[i]) / static_cast<double>(total) > threshold) out.push_back(i);
  }
  return out;
}

double Occupancy::fraction_between(double lo, double hi) const {
  if (!total) return 0.0;
  std::uint64_t inside = 0;
  const double n = static_cast<double>(fine_x.size());
  for (std::size_t i = 0; i < fine_x.size(); ++i) {
    const double center = (static_cast<double>(i) + 0.5) / n;
    if (center > lo && center < hi) inside += fine_x[i];
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

Occupancy min_attractor_support(const SkewSystem& sys, std::size_t n_orbits, std::uint64_t n_steps,
                                std::uint64_t burn_in, std::size_t cells, std::uint64_t seed, unsigned workers,
                                std::optional<std::pair<double, double>> x_range) {
  if (burn_in >= n_steps) throw std::invalid_argument("burn_in must be below n_steps");
  if (cells == 0) throw std::invalid_argument("occupancy needs at least one cell");
  constexpr std::size_t kFine = 1u << 14;
  const std::size_t cy = sys.fiber_dim() == 2 ? cells : 1;
  std::vector<std::vector<std::uint64_t>> part(n_orbits), fine(n_orbits);
  parallel_for(n_orbits, workers, [&](std::size_t i) {
    auto& h = part[i];
    auto& f = fine[i];
    h.assign(cells * cy, 0);
    f.assign(kFine, 0);
    const std::uint64_t key = derive_key(seed, 0x0cc, i);
    skew::StartSpec spec;
    if (x_range) spec.x = x_range->first + (x_range->second - x_range->first) * uniform_at(key, 200);
    SystemState st = sys.start_state(key, spec);
    auto bin = [](double v, std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(v * static_cast<double>(n))); };
    for (std::uint64_t t = 1; t <= n_steps; ++t) {
      sys.step(st);
      if (t <= burn_in) continue;
      const std::size_t ix = bin(st.fiber[0], cells);
      const std::size_t iy = cy > 1 ? bin(st.fiber[1], cy) : 0;
      ++h[ix + cells * iy];
      ++f[bin(st.fiber[0], kFine)];
    }
  });
  Occupancy occ;
  occ.cells_x = cells;
  occ.cells_y = cy;
  occ.counts.assign(cells * cy, 0);
  occ.fine_x.assign(kFine, 0);
  for (std::size_t i = 0; i < n_orbits; ++i) {
    for (std::size_t c = 0; c < occ.counts.size(); ++c) occ.counts[c] += part[i][c];
    for (std::size_t c = 0; c < kFine; ++c) occ.fine_x[c] += fine[i][c];
  }
  for (auto c : occ.counts) occ.total += c;
  return occ;
}

}  // namespace basinlab::attract
