#include <cmath>
#include <vector>

#include "basinlab/attract.hpp"
#include "basinlab/randomwalk.hpp"
#include "basinlab/rng.hpp"
#include "basinlab/stats.hpp"
#include "doctest.h"

using namespace basinlab;
using namespace basinlab::attract;

namespace {

std::size_t index_of(const skew::SkewSystem& sys, const std::string& name) {
  for (std::size_t i = 0; i < sys.catalog().size(); ++i) {
    if (sys.catalog()[i].name == name) return i;
  }
  FAIL("missing catalog entry " << name);
  return 0;
}

BasinReport fake_report(std::vector<CellCounts> cells) {
  BasinReport r;
  r.preset = "test";
  r.names = {"a", "b"};
  r.grid.axes = {{Coord::X, 0.0, 1.0, cells.size()}};
  r.cells = std::move(cells);
  return r;
}

}  // namespace

TEST_CASE("classification of a start already inside the capture region") {
  const auto kan = skew::SkewSystem::build("kan");
  const auto st = kan.start_state(derive_key(1, 1), {{}, 1e-8, {}});
  const auto c = classify_orbit(kan, st, {1000, 100});
  CHECK(c.id == static_cast<int>(index_of(kan, "lower")));
  CHECK(c.steps == 100);
  CHECK_THROWS(classify_orbit(kan, st, {10, 100}));
}

TEST_CASE("roof-coupled flow: every start goes to p_S") {
  const auto sys = skew::SkewSystem::build("flow_example7");
  const auto south = static_cast<int>(index_of(sys, "p_S"));
  for (std::uint64_t k = 0; k < 20; ++k) {
    CHECK(classify_orbit(sys, sys.start_state(derive_key(2, k)), {10000, 100}).id == south);
  }
}

TEST_CASE("thm2 classification frequency matches the absorption oracle") {
  const auto sys = skew::SkewSystem::build("thm2_walk");
  const auto f = maps1d::Map1D::north_south(0.1);
  const auto p = randomwalk::ProbProfile::cosine(0.2);
  const double P = randomwalk::absorption_solve(randomwalk::build_orbit_chain(f, p, 0.25, 50))[50];
  const auto south = static_cast<int>(index_of(sys, "p_S"));
  const std::uint64_t n = 10000;
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < n; ++t) {
    hits += classify_orbit(sys, sys.start_state(derive_key(3, t), {{}, 0.25, {}}), {100000, 100}).id == south;
  }
  CHECK(std::fabs(static_cast<double>(hits) / n - P) < 3 * stats::binomial_sigma(P, n));
}

TEST_CASE("grid geometry") {
  GridSpec g{{{Coord::Base, 0, 1, 4}, {Coord::X, 0.1, 0.9, 2}}};
  CHECK(g.cell_count() == 8);
  CHECK(g.bounds(5, 0).first == 0.25);
  CHECK(g.bounds(5, 1).first == doctest::Approx(0.5));
  CHECK(g.bounds(5, 1).second == doctest::Approx(0.9));
}

TEST_CASE("a one-cell grid equals the global tally") {
  const auto kan = skew::SkewSystem::build("kan");
  GridSpec one{{{Coord::Base, 0, 1, 1}, {Coord::X, 0.1, 0.9, 1}}};
  const auto r = basin_grid(kan, one, 200, {100000, 100}, 5, 1);
  const auto t = r.total();
  CHECK(r.cells.size() == 1);
  CHECK(t.samples == 200);
  CHECK(t.counts[0] + t.counts[1] + t.undecided == 200);
  CHECK(r.cells[0].counts == t.counts);
}

TEST_CASE("Kan fast path agrees with generic stepping") {
  const auto kan = skew::SkewSystem::build("kan");
  GridSpec g{{{Coord::Base, 0, 1, 2}, {Coord::X, 0.1, 0.9, 2}}};
  const auto fast = basin_grid(kan, g, 30, {50000, 100}, 9, 1);
  for (std::size_t cell = 0; cell < 4; ++cell) {
    std::vector<std::uint64_t> counts(2, 0);
    std::uint64_t undecided = 0;
    for (std::size_t s = 0; s < 30; ++s) {
      const std::uint64_t key = derive_key(9, cell, s);
      skew::StartSpec spec;
      spec.base = g.bounds(cell, 0).first + (g.bounds(cell, 0).second - g.bounds(cell, 0).first) * uniform_at(key, 100);
      spec.x = g.bounds(cell, 1).first + (g.bounds(cell, 1).second - g.bounds(cell, 1).first) * uniform_at(key, 101);
      const auto c = classify_orbit(kan, kan.start_state(key, spec), {50000, 100});
      if (c.id < 0) ++undecided; else ++counts[static_cast<std::size_t>(c.id)];
    }
    CHECK(fast.cells[cell].counts == counts);
    CHECK(fast.cells[cell].undecided == undecided);
  }
}

TEST_CASE("basin grids do not depend on the worker count") {
  const auto sys = skew::SkewSystem::build("thick42_walk");
  GridSpec g{{{Coord::X, 0.35, 0.65, 3}}};
  const auto a = basin_grid(sys, g, 60, {2000, 100}, 4, 1);
  const auto b = basin_grid(sys, g, 60, {2000, 100}, 4, 3);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_pgm(true) == b.to_pgm(true));
}

TEST_CASE("roof-coupled flow grid is all p_S and the verdict is a correct negative") {
  const auto sys = skew::SkewSystem::build("flow_example7");
  GridSpec g{{{Coord::X, 0.0, 1.0, 4}}};
  const auto r = basin_grid(sys, g, 50, {10000, 100}, 6, 1);
  const auto south = index_of(sys, "p_S");
  for (const auto& c : r.cells) {
    CHECK(c.counts[south] == c.samples);
    CHECK(c.undecided == 0);
  }
  CHECK(intermingled_verdict(r, 0, 1).global == Verdict::Fail);
}

TEST_CASE("verdict semantics") {
  const auto both = fake_report({{{40, 60}, 0, 100}, {{30, 70}, 0, 100}});
  const auto v = intermingled_verdict(both, 0, 1);
  CHECK(v.global == Verdict::Pass);
  CHECK(v.margin == doctest::Approx(stats::wilson(30, 100).lo));
  // Swapping labels gives the same verdicts.
  const auto w = intermingled_verdict(both, 1, 0);
  CHECK(w.global == v.global);
  CHECK(w.margin == v.margin);

  const auto undecided = fake_report({{{40, 60}, 0, 100}, {{0, 0}, 100, 100}});
  CHECK(intermingled_verdict(undecided, 0, 1).global == Verdict::Inconclusive);
  CHECK(intermingled_verdict(undecided, 0, 1).cells[1] == Verdict::Inconclusive);

  const auto missing = fake_report({{{100, 0}, 0, 100}, {{0, 0}, 100, 100}});
  CHECK(intermingled_verdict(missing, 0, 1).global == Verdict::Fail);
}

TEST_CASE("CSV and PGM layout") {
  const auto r = fake_report({{{40, 60}, 0, 100}, {{10, 10}, 80, 100}});
  const auto csv = r.to_csv();
  CHECK(csv.rfind("# preset=test seed=0", 0) == 0);
  CHECK(csv.find("cell,x_lo,x_hi,samples,undecided,a_count,a_fraction") != std::string::npos);
  CHECK(csv.find(",0.4,") != std::string::npos);  // shortest round-trip form
  const auto ascii = r.to_pgm(false);
  CHECK(ascii.rfind("P2\n", 0) == 0);
  CHECK(ascii.find("2 1\n255\n") != std::string::npos);
  CHECK(ascii.find("102 255\n") != std::string::npos);  // 254·0.4 rounded; undecided-dominated cell
  const auto bin = r.to_pgm(true);
  CHECK(bin.rfind("P5\n", 0) == 0);
  CHECK(static_cast<unsigned char>(bin[bin.size() - 1]) == 255);
  CHECK(static_cast<unsigned char>(bin[bin.size() - 2]) == 102);
}

TEST_CASE("likely limit sets") {
  const auto thm3 = skew::SkewSystem::build("thm3_flowtime");
  const auto lim = likely_limit_estimate(thm3, 1000, {100000, 100}, 7, 1);
  CHECK(lim.members == std::vector<std::string>{"p_N", "p_S"});
  CHECK(lim.unexplained < 0.02);

  const auto thm4 = skew::SkewSystem::build("thm4_multi");
  const auto l4 = likely_limit_estimate(thm4, 1000, {100000, 100}, 8, 1);
  CHECK(l4.members.size() == 4);

  const auto ex7 = skew::SkewSystem::build("flow_example7");
  const auto l7 = likely_limit_estimate(ex7, 1000, {10000, 100}, 9, 1);
  CHECK(l7.members == std::vector<std::string>{"p_S"});
  CHECK_THROWS(likely_limit_estimate(ex7, 10, {10000, 100}, 9, 1));
}

TEST_CASE("pullback graph") {
  const auto f0 = maps1d::Map1D::thick_f0(0.2), f1 = maps1d::Map1D::thick_f1(0.3, 0.7, 1.5);
  const auto empty = pullback_graph(f0, f1, symbolic::Word::parse("0110"), 0);
  CHECK(empty.X == 0.3);
  CHECK(empty.trace.empty());
  const auto last0 = pullback_graph(f0, f1, symbolic::Word::parse("110"), 1);
  CHECK(last0.trace[0] == doctest::Approx(0.258).epsilon(1e-14));
  const auto ones = pullback_graph(f0, f1, symbolic::Word::parse(std::string(30, '1')), 30);
  for (double x : ones.trace) CHECK(x == doctest::Approx(0.3).epsilon(1e-15));

  const symbolic::LazyWord w(symbolic::BernoulliSpec::binary(0.5), 123);
  const auto g = pullback_graph(f0, f1, w.materialize(-60, 0), 60);
  for (std::size_t k = 1; k < g.trace.size(); ++k) CHECK(g.trace[k] <= g.trace[k - 1]);
  CHECK(g.X >= 0.0);
  CHECK(g.X <= 0.3);
}

TEST_CASE("repeller pullback mirrors the attractor side") {
  const auto f0 = maps1d::Map1D::thick_f0(0.1), f1 = maps1d::Map1D::thick_f1(0.3, 0.7, 3.0);
  const auto ones = pullback_repeller(f0, f1, symbolic::Word::parse(std::string(20, '1')), 20);
  CHECK(ones.X == doctest::Approx(0.7));
  const symbolic::LazyWord w(symbolic::BernoulliSpec::binary(0.5), 5);
  const auto g = pullback_repeller(f0, f1, w.materialize(0, 60), 60);
  for (std::size_t k = 1; k < g.trace.size(); ++k) CHECK(g.trace[k] >= g.trace[k - 1]);
  CHECK(g.X >= 0.7);
}

TEST_CASE("thickness of the default pair") {
  const auto f0 = maps1d::Map1D::thick_f0(0.1), f1 = maps1d::Map1D::thick_f1(0.3, 0.7, 3.0);
  const auto est = thickness_estimate(f0, f1, 2000, 60, 11, 1);
  CHECK(est.monotone);
  CHECK(est.positive_fraction >= 0.99);
  CHECK(est.mean_ratio > 0.01);
  CHECK(est.mean_ratio < 0.99);
  CHECK(est.ci.lo > 0.0);
  CHECK(est.ci.hi < 0.3);
  CHECK(est.distribution(0.3) == 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 30; ++i) {
    const double phi = est.distribution(i / 100.0);
    CHECK(phi >= prev);
    prev = phi;
  }
  CHECK_THROWS(thickness_estimate(f0, f1, 100, 20, 11, 1));
}

TEST_CASE("complement density probe") {
  const auto f0 = maps1d::Map1D::thick_f0(0.1), f1 = maps1d::Map1D::thick_f1(0.3, 0.7, 3.0);
  std::vector<Ball> balls{{{symbolic::Word{}}, 0.0, 1.0}, {{symbolic::Word::parse("01")}, 0.4, 0.6}};
  for (int b = 0; b < 100; ++b) {
    const symbolic::LazyWord w(symbolic::BernoulliSpec::binary(0.5), derive_key(12, static_cast<std::uint64_t>(b)));
    const double lo = 0.95 * uniform_at(derive_key(13, static_cast<std::uint64_t>(b)), 0);
    balls.push_back({{w.materialize(0, 5)}, lo, lo + 0.05});
  }
  const auto found = complement_density_probe(f0, f1, balls, 60, 14);
  CHECK(found[0]);
  CHECK(found[1]);
  std::size_t passed = 0;
  for (std::size_t i = 2; i < found.size(); ++i) passed += found[i];
  CHECK(passed >= 99);
}

TEST_CASE("occupancy of the thick42 walk avoids (l, r)") {
  const auto sys = skew::SkewSystem::build("thick42_walk");
  const auto occ = min_attractor_support(sys, 200, 3000, 1000, 20, 15, 1, std::make_pair(0.35, 0.65));
  CHECK(occ.total == 200u * 2000u);
  CHECK(occ.fraction_between(0.3, 0.7) < 0.05);
  CHECK_FALSE(occ.support().empty());
  CHECK_THROWS(min_attractor_support(sys, 10, 100, 100, 20, 15, 1));
}

TEST_CASE("occupancy of the roof-coupled flow sits at p_S") {
  const auto sys = skew::SkewSystem::build("flow_example7");
  // An odd cell count puts p_S in the middle of cell 15.
  const auto occ = min_attractor_support(sys, 20, 400, 200, 31, 16, 1);
  const auto support = occ.support();
  REQUIRE(support.size() == 1);
  CHECK(support[0] == 15);
}
