#include <cmath>
#include <vector>

#include "basinlab/randomwalk.hpp"
#include "basinlab/stats.hpp"
#include "doctest.h"

using namespace basinlab;
using namespace basinlab::randomwalk;

namespace {

DiscreteChain absorbing(std::vector<double> interior_up) {
  DiscreteChain c;
  const std::size_t n = interior_up.size() + 2;
  c.boundary = Boundary::Absorbing;
  c.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.coords[i] = static_cast<double>(i);
  c.up.assign(n, 0.5);
  for (std::size_t i = 0; i < interior_up.size(); ++i) c.up[i + 1] = interior_up[i];
  return c;
}

}  // namespace

TEST_CASE("profiles") {
  const auto p = ProbProfile::cosine(0.2);
  CHECK(p(0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p(0.5) == doctest::Approx(0.7));
  CHECK(p(0.5) > 0.5);
  CHECK(p.signed_prob(-1, 0.5) == doctest::Approx(0.3));
  CHECK_THROWS(ProbProfile::cosine(0.5));
  CHECK_THROWS(ProbProfile::constant(1.0));
  CHECK_THROWS(ProbProfile::piecewise_linear(0.4, 0.3, 0.3, 0.7));
  const auto pl = ProbProfile::piecewise_linear(0.7, 0.3, 0.3, 0.7);
  CHECK(pl(0.1) == 0.7);
  CHECK(pl(0.9) == 0.3);
  CHECK(pl(0.5) == doctest::Approx(0.5));
}

TEST_CASE("walk step consumes one variate and follows p") {
  const auto f = maps1d::Map1D::north_south(0.1);
  CounterStream s(derive_key(1, 2));
  const auto step = walk_step(f, ProbProfile::cosine(0.2), 0.25, s);
  CHECK(s.consumed() == 1);
  CHECK(step.x == doctest::Approx(f.apply(0.25, step.eta)));

  const auto hi = ProbProfile::constant(0.999999);
  CounterStream t(derive_key(1, 3));
  std::uint64_t up = 0;
  const std::uint64_t n = 1000000;
  for (std::uint64_t i = 0; i < n; ++i) up += walk_step(f, hi, 0.25, t).eta > 0;
  CHECK(static_cast<double>(up) / static_cast<double>(n) >= 0.99999);
}

TEST_CASE("cylinder measure zeta") {
  const auto f = maps1d::Map1D::north_south(0.1);
  const std::vector<int> word{1, 1, -1};
  CHECK(zeta_cylinder(f, ProbProfile::constant(0.7), 0.3, word) == doctest::Approx(0.147).epsilon(1e-14));
  CHECK(zeta_cylinder(f, ProbProfile::cosine(0.2), 0.3, std::vector<int>{}) == 1.0);
  CHECK(zeta_cylinder(f, ProbProfile::cosine(0.2), 0.25, std::vector<int>{1}) == doctest::Approx(0.5));
}

TEST_CASE("zeta is a probability on every depth and satisfies its recursion") {
  const auto f = maps1d::Map1D::north_south(0.1);
  const auto p = ProbProfile::cosine(0.2);
  const double x = 0.31;
  for (int k = 1; k <= 12; ++k) {
    double total = 0.0;
    std::vector<int> w(static_cast<std::size_t>(k));
    for (std::uint32_t bits = 0; bits < (1u << k); ++bits) {
      for (int i = 0; i < k; ++i) w[static_cast<std::size_t>(i)] = (bits >> i) & 1u ? 1 : -1;
      total += zeta_cylinder(f, p, x, w);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  }
  const std::vector<int> tail{1, -1, -1, 1};
  for (int a : {-1, 1}) {
    std::vector<int> w{a};
    w.insert(w.end(), tail.begin(), tail.end());
    const double lhs = zeta_cylinder(f, p, x, w);
    const double rhs = p.signed_prob(a, x) * zeta_cylinder(f, p, f.apply(x, a), tail);
    CHECK(std::fabs(lhs - rhs) < 1e-14);
  }
}

TEST_CASE("absorption solve matches gambler's ruin") {
  CHECK(absorption_solve(absorbing({0.5, 0.5, 0.5}))[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(absorption_solve(absorbing({2.0 / 3.0}))[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  const auto P = absorption_solve(absorbing({0.6, 0.6, 0.6, 0.6, 0.6}));
  for (std::size_t i = 1; i < P.size(); ++i) CHECK(P[i] > P[i - 1]);
}

TEST_CASE("absorption solve agrees with Monte Carlo on a 2-site chain") {
  const auto chain = absorbing({0.7, 0.3});
  const double P = absorption_solve(chain)[1];
  // Direct 2x2 solve: P1 = .7 P2, P2 = .3 + .7 P1.
  CHECK(P == doctest::Approx(0.7 * 0.3 / (1 - 0.49)).epsilon(1e-14));
  const auto mc = monte_carlo_chain(chain, 1, 1000000, 17, 1);
  CHECK(std::fabs(mc.frequency() - P) < 3.0 * stats::binomial_sigma(P, mc.trials));
}

TEST_CASE("orbit chains") {
  const auto f = maps1d::Map1D::north_south(0.1);
  const auto c = build_orbit_chain(f, ProbProfile::constant(0.6), 0.25, 3);
  CHECK(c.size() == 7);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) CHECK(c.up[i] == 0.6);
  CHECK(build_orbit_chain(f, ProbProfile::cosine(0.2), 0.25, 1).up[1] == doctest::Approx(0.5));
  CHECK_THROWS(build_orbit_chain(f, ProbProfile::cosine(0.2), 0.5, 3));

  const auto p = ProbProfile::cosine(0.2);
  const double a = absorption_solve(build_orbit_chain(f, p, 0.25, 40))[40];
  const double b = absorption_solve(build_orbit_chain(f, p, 0.25, 60))[60];
  CHECK(std::fabs(a - b) < 1e-3);
}

TEST_CASE("stationary measures on rotation chains") {
  for (double p : {0.5, 0.7}) {
    const auto chain = rotation_chain(ProbProfile::constant(p), 64);
    const auto m = stationary_power_iteration(chain);
    for (double v : m.mass) CHECK(v == doctest::Approx(1.0 / 64).epsilon(1e-12));
    if (p == 0.5) CHECK(m.residual < 1e-14);
  }
  const auto chain = rotation_chain(ProbProfile::cosine(0.2), 64);
  const auto m = stationary_power_iteration(chain);
  const auto tm = transfer(chain, m.mass);
  double l1 = 0.0;
  for (std::size_t i = 0; i < tm.size(); ++i) l1 += std::fabs(tm[i] - m.mass[i]);
  CHECK(l1 < 1e-10);
  double total = 0.0;
  for (double v : m.mass) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stationarity and invariance residuals vanish together") {
  const auto chain = rotation_chain(ProbProfile::cosine(0.2), 64);
  const auto m = stationary_power_iteration(chain);
  const auto good = verify_proposition(chain, m.mass, 3);
  CHECK(good.stat_residual < 1e-10);
  CHECK(good.inv_residual < 1e-10);

  auto bad = m.mass;
  for (std::size_t i = 0; i < bad.size(); ++i) bad[i] *= i % 2 ? 1.05 : 0.95;
  const auto r = verify_proposition(chain, bad, 3);
  CHECK(r.stat_residual > 1e-3);
  CHECK(r.inv_residual > 1e-3);

  const auto sym = rotation_chain(ProbProfile::constant(0.5), 64);
  const std::vector<double> uniform(64, 1.0 / 64);
  const auto u = verify_proposition(sym, uniform, 1);
  CHECK(u.stat_residual < 1e-14);
  CHECK(u.inv_residual < 1e-14);
}

TEST_CASE("orbit Monte Carlo matches the linear solve") {
  const auto f = maps1d::Map1D::north_south(0.1);
  const auto p = ProbProfile::cosine(0.2);
  const double P = absorption_solve(build_orbit_chain(f, p, 0.3, 50))[50];
  const auto mc = monte_carlo_orbit(f, p, 0.3, 50, 100000, 5, 2);
  CHECK(std::fabs(mc.frequency() - P) < 3.0 * stats::binomial_sigma(P, mc.trials));
  // Worker count never changes the tally.
  CHECK(monte_carlo_orbit(f, p, 0.3, 50, 2000, 6, 1).upper == monte_carlo_orbit(f, p, 0.3, 50, 2000, 6, 3).upper);
}
