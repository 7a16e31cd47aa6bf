#include <cmath>
#include <numbers>

#include "basinlab/errors.hpp"
#include "basinlab/maps1d.hpp"
#include "basinlab/rng.hpp"
#include "doctest.h"

using namespace basinlab;
using namespace basinlab::maps1d;

TEST_CASE("north-south map values and derivatives") {
  const auto f = Map1D::north_south(0.1);
  CHECK(f.apply(0.0, 1) == 0.0);
  CHECK(f.apply(0.25, 1) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(f.apply(0.5, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f.deriv(0.0) == doctest::Approx(1.0 + 0.2 * std::numbers::pi));
  CHECK(f.deriv(0.0) > 1.0);
  CHECK(f.deriv(0.5) < 1.0);
  CHECK(f.domain() == Domain::Circle);
}

TEST_CASE("north-south map has exactly the two poles as fixed points") {
  const MapSpec spec = MapSpec::north_south(0.1);
  int sign_changes = 0;
  double prev = eval(spec, 1e-6) - 1e-6;
  for (int i = 1; i < 10000; ++i) {
    const double x = (i + 0.5) / 10000.0;
    const double d = eval(spec, x) - x;
    if ((d > 0) != (prev > 0)) ++sign_changes;
    prev = d;
  }
  CHECK(sign_changes == 1);  // at 1/2; the other zero is 0 ≡ 1
}

TEST_CASE("thick pair values and derivatives") {
  CHECK(Map1D::thick_f1(0.3, 0.7, 1.5).apply(0.3, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(Map1D::thick_f0(0.2).deriv(0.0) == doctest::Approx(0.8));
  CHECK(Map1D::thick_f0(0.2).apply(0.3, 1) == doctest::Approx(0.258));
}

TEST_CASE("PhiShift endpoints stay fixed with positive derivative") {
  const auto phi = Map1D::phi_shift(0.5, 1);
  CHECK(phi.apply(0.0, 1) == 0.0);
  CHECK(phi.apply(1.0, 1) == 1.0);
  CHECK(std::isfinite(phi.deriv(0.0)));
  CHECK(phi.deriv(0.0) > 0.0);
  CHECK(phi.deriv(1.0) > 0.0);
  const auto inv = Map1D::phi_shift(0.5, -1);
  for (double x : {0.1, 0.4, 0.77}) CHECK(inv.apply(phi.apply(x, 1), 1) == doctest::Approx(x).epsilon(1e-14));
}

TEST_CASE("thick pair validation products") {
  const auto rep = validate_thick_pair(MapSpec::thick_f0(0.2), MapSpec::thick_f1(0.3, 0.7, 1.5));
  CHECK(rep.passed());
  bool saw0 = false, saw1 = false;
  for (const auto& c : rep.checks) {
    if (c.name.find("f0'(0) f1'(0) > 1") != std::string::npos) {
      saw0 = true;
      CHECK(c.witness == doctest::Approx(1.052));
    }
    if (c.name.find("f0'(1) f1'(1) < 1") != std::string::npos) {
      saw1 = true;
      CHECK(c.witness == doctest::Approx(0.822));
    }
  }
  CHECK(saw0);
  CHECK(saw1);
}

TEST_CASE("thick pair violation names the derivative-product constraint") {
  const auto rep = validate_thick_pair(MapSpec::thick_f0(0.9), MapSpec::thick_f1(0.3, 0.7, 3.0));
  REQUIRE_FALSE(rep.passed());
  CHECK(std::string(rep.first_failure()->name).find("f0'(0) f1'(0) > 1") != std::string::npos);
}

TEST_CASE("alt pair defaults satisfy both products") {
  const auto rep = validate_alt_pair(MapSpec::alt_f0(0.5, 0.25), MapSpec::alt_f1(0.3, 0.7, 3.0));
  CHECK(rep.passed());
}

TEST_CASE("north-south amplitude at 1/(2π) or more is rejected") {
  CHECK_FALSE(validate_family(MapSpec::north_south(1.0)).passed());
  CHECK_THROWS_AS(Map1D::north_south(1.0), ConstructionError);
  CHECK_THROWS_AS(Map1D::north_south(0.2), ConstructionError);
}

TEST_CASE("inverse round trip for every family") {
  const std::vector<MapSpec> specs{MapSpec::north_south(0.1),       MapSpec::kan_fiber(0.3),
                                   MapSpec::thick_f0(0.1),          MapSpec::thick_f1(0.3, 0.7, 3.0),
                                   MapSpec::alt_f0(0.5, 0.25),      MapSpec::alt_f1(0.3, 0.7, 3.0),
                                   MapSpec::phi_shift(0.5, 1),      MapSpec::phi_shift(0.5, -1)};
  for (const auto& spec : specs) {
    CAPTURE(spec.to_string());
    const Map1D f(spec);
    CounterStream rng(derive_key(11, static_cast<std::uint64_t>(spec.family)));
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform();
      double d = std::fabs(f.apply(f.apply(x, -1), 1) - x);
      if (f.domain() == Domain::Circle) d = std::min(d, 1.0 - d);
      worst = std::max(worst, d);
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("Kan fiber fixes both boundary circles for every base point") {
  for (double u : {0.0, 0.1, 0.25, 0.5, 0.9}) {
    const auto f = Map1D::kan_fiber(u);
    CHECK(f.apply(0.0, 1) == 0.0);
    CHECK(f.apply(1.0, 1) == 1.0);
  }
  CHECK(Map1D::kan_fiber(0.0).apply(0.5, 1) == 0.5078125);
}

TEST_CASE("I_l is forward invariant and I_r backward invariant for the thick pair") {
  const auto f0 = Map1D::thick_f0(0.1), f1 = Map1D::thick_f1(0.3, 0.7, 3.0);
  for (const auto* f : {&f0, &f1}) {
    CHECK(f->apply(0.0, 1) >= 0.0);
    CHECK(f->apply(0.3, 1) <= 0.3);
    CHECK(f->apply(0.7, -1) >= 0.7);
    CHECK(f->apply(1.0, -1) <= 1.0);
  }
}
