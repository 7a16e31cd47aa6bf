#include "basinlab/flows.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "basinlab/errors.hpp"
#include "basinlab/lattice.hpp"
#include "basinlab/trig.hpp"

namespace basinlab::flows {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

void FlowSpec::validate() const {
  if (!(h > 0.0 && h <= 0.1)) throw ConstructionError("0 < h <= 0.1", "integrator substep out of range");
  if (field == Field::TorusGradient) {
    if (!(c_h > 0.0)) throw ConstructionError("c_h > 0", "torus field amplitude must be positive");
    if (!(std::fabs(beta) < 1.0)) throw ConstructionError("|beta| < 1", "torus field asymmetry out of range");
  }
}

std::string FlowSpec::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (field) {
    case Field::CircleGradient: os << "circle_gradient"; break;
    case Field::TorusGradient: os << "torus_gradient(c_h=" << c_h << ",beta=" << beta << ")"; break;
    case Field::LinearTest: os << "linear_test"; break;
  }
  os << " h=" << h;
  return os.str();
}

double field_value(const FlowSpec& spec, double x) noexcept {
  switch (spec.field) {
    case Field::CircleGradient: return kPi * sin_2pi(x);
    case Field::TorusGradient: return spec.c_h * sin_2pi(x) * (1.0 - spec.beta * cos_2pi(x));
    case Field::LinearTest: return -x;
  }
  return 0.0;
}

double field_deriv(const FlowSpec& spec, double x) noexcept {
  switch (spec.field) {
    case Field::CircleGradient: return 2.0 * kPi * kPi * cos_2pi(x);
    case Field::TorusGradient: {
      const double c = cos_2pi(x), s = sin_2pi(x);
      return 2.0 * kPi * spec.c_h * (c * (1.0 - spec.beta * c) + spec.beta * s * s);
    }
    case Field::LinearTest: return -1.0;
  }
  return 0.0;
}

std::uint64_t substeps(const FlowSpec& spec, double t) noexcept {
  if (t == 0.0) return 0;
  return static_cast<std::uint64_t>(std::ceil(std::fabs(t) / spec.h));
}

Tangent integrate_tangent(const FlowSpec& spec, double x, double t) {
  const std::uint64_t n = substeps(spec, t);
  double dx = 1.0;
  if (n == 0) return {x, dx};
  const double dt = t / static_cast<double>(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double k1 = field_value(spec, x);
    const double j1 = field_deriv(spec, x) * dx;
    const double x2 = x + 0.5 * dt * k1;
    const double k2 = field_value(spec, x2);
    const double j2 = field_deriv(spec, x2) * (dx + 0.5 * dt * j1);
    const double x3 = x + 0.5 * dt * k2;
    const double k3 = field_value(spec, x3);
    const double j3 = field_deriv(spec, x3) * (dx + 0.5 * dt * j2);
    const double x4 = x + dt * k3;
    const double k4 = field_value(spec, x4);
    const double j4 = field_deriv(spec, x4) * (dx + dt * j3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    dx += dt / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
  }
  if (spec.field != Field::LinearTest) x = wrap_unit(x);
  return {x, dx};
}

double integrate(const FlowSpec& spec, double x, double t) {
  const std::uint64_t n = substeps(spec, t);
  if (n == 0) return x;
  const double dt = t / static_cast<double>(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double k1 = field_value(spec, x);
    const double k2 = field_value(spec, x + 0.5 * dt * k1);
    const double k3 = field_value(spec, x + 0.5 * dt * k2);
    const double k4 = field_value(spec, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return spec.field == Field::LinearTest ? x : wrap_unit(x);
}

std::array<double, 2> integrate(const FlowSpec& spec, std::array<double, 2> p, double t) {
  // The torus field is a product of two copies of v.
  return {integrate(spec, p[0], t), integrate(spec, p[1], t)};
}

SuspensionPoint SuspensionPoint::from(double v1, double v2, double s) {
  return {unit_to_lattice(v1), unit_to_lattice(v2), wrap_unit(s)};
}

double SuspensionPoint::v1() const noexcept { return lattice_to_unit(a); }
double SuspensionPoint::v2() const noexcept { return lattice_to_unit(b); }

SuspensionPoint suspension_flow(SuspensionPoint pt, double t) {
  const double target = pt.s + t;
  const double crossings = std::floor(target);
  double s = target - crossings;
  if (s >= 1.0) s = 0.0;
  if (std::fabs(crossings) > 1e7) throw std::invalid_argument("suspension time too large");
  auto n = static_cast<std::int64_t>(crossings);
  for (; n > 0; --n) {
    const std::uint64_t a = 2 * pt.a + pt.b, b = pt.a + pt.b;
    pt.a = a;
    pt.b = b;
  }
  for (; n < 0; ++n) {
    const std::uint64_t a = pt.a - pt.b, b = 2 * pt.b - pt.a;
    pt.a = a;
    pt.b = b;
  }
  pt.s = s;
  return pt;
}

double height(double x) noexcept { return 0.5 * (1.0 - cos_2pi(x)); }

double Observable::operator()(const SuspensionPoint& u, double x) const noexcept {
  switch (kind) {
    case Kind::Constant: return a0;
    case Kind::CosineRoof: return a0 + a1 * cos_2pi(u.s);
    case Kind::HeightCoupled: return cos_2pi(u.s) + delta * (height(x) - 0.5);
  }
  return 0.0;
}

std::string Observable::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::Constant: os << "constant(" << a0 << ")"; break;
    case Kind::CosineRoof: os << "cosine_roof(" << a0 << "," << a1 << ")"; break;
    case Kind::HeightCoupled: os << "height_coupled(" << delta << ")"; break;
  }
  return os.str();
}

double base_mean(const Observable& zeta, double x) {
  constexpr int kTorus = 16, kRoof = 256;
  double sum = 0.0;
  for (int i = 0; i < kTorus; ++i) {
    for (int j = 0; j < kTorus; ++j) {
      for (int k = 0; k < kRoof; ++k) {
        const auto u = SuspensionPoint::from((i + 0.5) / kTorus, (j + 0.5) / kTorus, (k + 0.5) / kRoof);
        sum += zeta(u, x);
      }
    }
  }
  return sum / (static_cast<double>(kTorus) * kTorus * kRoof);
}

double tau_accumulate(const Observable& eta, SuspensionPoint pt, double t, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("tau_accumulate needs h > 0");
  const auto n = static_cast<std::uint64_t>(std::ceil(std::fabs(t) / h));
  if (n == 0) return 0.0;
  const double dt = t / static_cast<double>(n);
  double tau = 0.0;
  double left = eta(pt);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double mid = eta(suspension_flow(pt, 0.5 * dt));
    pt = suspension_flow(pt, dt);
    const double right = eta(pt);
    tau += dt / 6.0 * (left + 4.0 * mid + right);
    left = right;
  }
  return tau;
}

CoupledState coupled_step(const Observable& zeta, const FlowSpec& fiber, CoupledState st, double dt) {
  const std::uint64_t n = substeps(fiber, dt);
  if (n == 0) return st;
  const double step = dt / static_cast<double>(n);
  auto rhs = [&](const SuspensionPoint& u, double x) { return zeta(u, x) * field_value(fiber, x); };
  for (std::uint64_t i = 0; i < n; ++i) {
    const SuspensionPoint mid = suspension_flow(st.base, 0.5 * step);
    const SuspensionPoint end = suspension_flow(st.base, step);
    const double k1 = rhs(st.base, st.x);
    const double k2 = rhs(mid, st.x + 0.5 * step * k1);
    const double k3 = rhs(mid, st.x + 0.5 * step * k2);
    const double k4 = rhs(end, st.x + step * k3);
    st.x = wrap_unit(st.x + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    st.base = end;
  }
  return st;
}

std::vector<maps1d::Check> zeta_checks(const Observable& zeta) {
  constexpr int kPhases = 64, kFiber = 64;
  double min_q1 = INFINITY, max_q2 = -INFINITY;
  for (int i = 0; i < kPhases; ++i) {
    const double phase = -0.125 + 0.25 * i / (kPhases - 1);
    for (int j = 0; j < kFiber; ++j) {
      const double x = static_cast<double>(j) / kFiber;
      min_q1 = std::min(min_q1, zeta(SuspensionPoint{0, 0, wrap_unit(phase)}, x));
      max_q2 = std::max(max_q2, zeta(SuspensionPoint{0, 0, wrap_unit(0.5 + phase)}, x));
    }
  }
  const double at_south = base_mean(zeta, 0.5), at_north = base_mean(zeta, 0.0);
  return {
      {"zeta(q1,x) > 0", min_q1 > 0.0, min_q1},
      {"zeta(q2,x) < 0", max_q2 < 0.0, max_q2},
      {"int zeta(u,p_S) > 0", at_south > 0.0, at_south},
      {"int zeta(u,p_N) < 0", at_north < 0.0, at_north},
  };
}

}  // namespace basinlab::flows
