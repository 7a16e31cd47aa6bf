#include "basinlab/skew.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "basinlab/errors.hpp"
#include "basinlab/lattice.hpp"
#include "basinlab/parallel.hpp"
#include "basinlab/randomwalk.hpp"
#include "basinlab/rng.hpp"
#include "basinlab/simd/kernels.hpp"
#include "basinlab/stats.hpp"
#include "basinlab/trig.hpp"

namespace basinlab::skew {

using maps1d::Check;
using maps1d::Map1D;
using maps1d::MapSpec;

// ---------------------------------------------------------------------------
// Preset table

const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> list = {
      {"kan", Preset::Kan, "annulus map x + cos(2πu)/32·x(1-x) over u ↦ 3u; boundary circles attract",
       {{"radius", 1e-6, "capture radius at the boundary circles"}},
       {{"radius", 0.6}}},
      {"thm2_walk", Preset::Thm2Walk, "random walk x ↦ f^{±1}(x) along a north-south circle map",
       {{"a", 0.1, "NorthSouth amplitude, f(x) = x + a sin 2πx"},
        {"b", 0.2, "profile p(x) = 1/2 - b cos 2πx"},
        {"radius", 1e-3, "capture radius at p_N, p_S"}},
       {{"a", 1.0}}},
      {"thm3_flowtime", Preset::Thm3FlowTime, "flow-time fiber φ_{s(u,x)} over u ↦ Lu on the circle",
       {{"L", 3, "base expansion factor", true},
        {"delta", 0.2, "s(u,x) = cos 2πu + δ(h(x) - 1/2)"},
        {"h", 0.01, "RK4 substep"},
        {"radius", 1e-3, "capture radius at p_N, p_S"}},
       {{"delta", -0.2}}},
      {"thm4_multi", Preset::Thm4Multi, "four mutually intermingled sinks on the torus over u ↦ Lu",
       {{"L", 5, "base expansion factor (L ≡ 1 mod 4)", true},
        {"c_h", 3.0, "torus field amplitude"},
        {"beta", 0.8, "torus field asymmetry"},
        {"halfwidth", 0.05, "half-width of the bump intervals J_i"},
        {"h", 0.01, "RK4 substep"},
        {"radius", 1e-3, "capture radius at the sinks"}},
       {{"beta", 0.0}}},
      {"thm5_ifs", Preset::Thm5Ifs, "iterated function system ψ_i = h_i φ_1 h_i⁻¹, equal weights",
       {{"c_h", 3.0, "torus field amplitude"},
        {"beta", 0.8, "torus field asymmetry"},
        {"h", 0.01, "RK4 substep"},
        {"radius", 1e-3, "capture radius at the sinks"}},
       {{"beta", 0.0}}},
      {"thick41", Preset::Thick41, "IFS {f0, f1} with a thick attractor in [0,l]",
       {{"l", 0.3, "designed fixed point of f1"},
        {"r", 0.7, "designed fixed point of f1"},
        {"c0", 0.1, "f0(x) = x - c0 x(1-x)"},
        {"c1", 3.0, "f1(x) = x + c1 x(x-l)(x-r)(1-x)"},
        {"radius", 1e-3, "capture radius at x = 1"}},
       {{"c0", 0.9}}},
      {"thick42_walk", Preset::Thick42Walk, "random walk along orbits of the thick pair, p(x) piecewise linear",
       {{"l", 0.3, "designed fixed point of f1"},
        {"r", 0.7, "designed fixed point of f1"},
        {"c0", 0.1, "f0(x) = x - c0 x(1-x)"},
        {"c1", 3.0, "f1(x) = x + c1 x(x-l)(x-r)(1-x)"},
        {"p_l", 0.7, "forward probability on [0,l]"},
        {"p_r", 0.3, "forward probability on [r,1]"}},
       {{"c0", 0.9}}},
      {"thick431_alt", Preset::Thick431Alt, "walk along the alternative pair composed with φ0/φ1",
       {{"l", 0.3, "fixed point of f1"},
        {"r", 0.7, "tangential fixed point of f1"},
        {"m", 0.5, "fixed point of f0"},
        {"c0", 0.25, "f0(x) = x + c0 x(x-m)(1-x)"},
        {"c1", 3.0, "f1(x) = x - c1 x(x-l)(x-r)²(1-x)"},
        {"c", 0.5, "φ0(x) = x + c x(1-x), φ1 = φ0⁻¹"},
        {"p", 0.7, "probability of a forward step"}},
       {{"c0", 0.9}}},
      {"thick432_product", Preset::Thick432Product, "product of two windowed IFS on the torus with shears",
       {{"alpha", 0.3, "lower end of the invariant interval (window coordinate)"},
        {"beta", 0.7, "upper end of the invariant interval (window coordinate)"},
        {"c0", 0.3, "f0(z) = z - c0 B(z)(z - α)"},
        {"c1", 1.5, "f1(z) = z + c1 B(z)(z - α)(β - z)"},
        {"eps", 0.05, "shear amplitude"},
        {"delta", 0.05, "shear ramp width"},
        {"p", 0.7, "probability of a forward step"}},
       {{"c1", 0.1}}},
      {"flow_example7", Preset::FlowExample7, "time-one map of ẋ = η(u) f(x) over the cat-map suspension",
       {{"a0", 0.2, "η = a0 + a1 cos 2πs"},
        {"a1", 1.0, "η = a0 + a1 cos 2πs"},
        {"h", 0.01, "RK4 substep"},
        {"radius", 1e-3, "capture radius at p_N, p_S"}},
       {{"a0", -0.2}}},
      {"flow_thm8", Preset::FlowThm8, "time-one map of ẋ = ζ(u,x) f(x), ζ = cos 2πs + δ(h(x) - 1/2)",
       {{"delta", 0.2, "coupling to the height function"},
        {"h", 0.01, "RK4 substep"},
        {"radius", 1e-3, "capture radius at p_N, p_S"}},
       {{"delta", -0.2}}},
  };
  return list;
}

const PresetInfo& preset_info(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<std::string> check_param_names(const PresetInfo& info, const ParamMap& params) {
  std::vector<std::string> errors;
  for (const auto& [key, value] : params) {
    auto it = std::find_if(info.params.begin(), info.params.end(), [&](const ParamInfo& p) { return p.name == key; });
    if (it == info.params.end()) {
      errors.push_back("preset " + info.name + " has no parameter '" + key + "'");
    } else if (!std::isfinite(value)) {
      errors.push_back("parameter '" + key + "' must be finite");
    } else if (it->integer && value != std::floor(value)) {
      errors.push_back("parameter '" + key + "' must be an integer");
    }
  }
  return errors;
}

// ---------------------------------------------------------------------------
// Dynamics

namespace {

constexpr double kPi = std::numbers::pi;

inline int binary_symbol(std::uint64_t key, std::int64_t index) noexcept {
  return uniform_at(key, static_cast<std::uint64_t>(index)) < 0.5 ? 0 : 1;
}

inline int quaternary_symbol(std::uint64_t key, std::int64_t index) noexcept {
  return static_cast<int>(uniform_at(key, static_cast<std::uint64_t>(index)) * 4.0);
}

// Sinks of the torus field sit at (1/2,1/2); h_j translate by these.
constexpr std::array<std::array<double, 2>, 4> kTranslations{{{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}}};

std::array<double, 2> translate(const std::array<double, 2>& p, const std::array<double, 2>& t, double sign) {
  return {wrap_unit(p[0] + sign * t[0]), wrap_unit(p[1] + sign * t[1])};
}

double bump(double d, double w) {
  if (d >= w) return 0.0;
  const double q = d / w;
  return std::exp(1.0 - 1.0 / (1.0 - q * q));
}

}  // namespace

class Dynamics {
 public:
  virtual ~Dynamics() = default;
  virtual void step(SystemState& st) const = 0;
  virtual double step_tangent(SystemState&) const {
    throw std::invalid_argument("fiber derivative is not available for this preset");
  }
  virtual double s_value(double, double) const {
    throw std::invalid_argument("preset has no flow-time fiber");
  }
};

namespace {

class KanDyn final : public Dynamics {
 public:
  void step(SystemState& st) const override {
    const double u = lattice_to_unit(st.base);
    st.fiber[0] = fiber_.apply_at(u, st.fiber[0]);
    st.base = 3 * st.base;
    ++st.steps;
  }
  double step_tangent(SystemState& st) const override {
    const double u = lattice_to_unit(st.base);
    const double b = cos_2pi_poly(u) * 0.03125;
    const double d = 1.0 + b * (1.0 - 2.0 * st.fiber[0]);
    step(st);
    return std::log(d);
  }

 private:
  struct Fiber {
    double apply_at(double u, double x) const {
      const double b = cos_2pi_poly(u) * 0.03125;
      return x + b * x * (1.0 - x);
    }
  } fiber_;
};

class Thm2Dyn final : public Dynamics {
 public:
  Thm2Dyn(Map1D f, randomwalk::ProbProfile p) : f_(std::move(f)), p_(std::move(p)) {}
  void step(SystemState& st) const override { advance(st); }
  double step_tangent(SystemState& st) const override {
    const double x = st.fiber[0];
    const int eta = advance(st);
    return std::log(eta > 0 ? f_.deriv(x) : f_.inverse_deriv(x));
  }

 private:
  int advance(SystemState& st) const {
    const double x = st.fiber[0];
    const int eta = uniform_at(st.keys[2], st.steps) < p_(x) ? 1 : -1;
    st.fiber[0] = f_.apply(x, eta);
    st.S += eta;
    ++st.steps;
    return eta;
  }
  Map1D f_;
  randomwalk::ProbProfile p_;
};

class Thm3Dyn final : public Dynamics {
 public:
  Thm3Dyn(std::uint64_t L, double delta, flows::FlowSpec flow) : L_(L), delta_(delta), flow_(flow) {}
  double s_value(double u, double x) const override { return cos_2pi(u) + delta_ * (flows::height(x) - 0.5); }
  void step(SystemState& st) const override {
    const double s = s_value(lattice_to_unit(st.base), st.fiber[0]);
    st.fiber[0] = flows::integrate(flow_, st.fiber[0], s);
    finish(st, s);
  }
  double step_tangent(SystemState& st) const override {
    const double x = st.fiber[0];
    const double s = s_value(lattice_to_unit(st.base), x);
    const auto tg = flows::integrate_tangent(flow_, x, s);
    // d/dx φ_{s(u,x)}(x) = Dφ_s(x) + f(φ_s(x)) ∂s/∂x
    const double ds_dx = delta_ * kPi * sin_2pi(x);
    const double d = tg.dx + flows::field_value(flow_, tg.x) * ds_dx;
    st.fiber[0] = tg.x;
    finish(st, s);
    return std::log(std::fabs(d));
  }

 private:
  void finish(SystemState& st, double s) const {
    st.s_acc += s;
    st.base = L_ * st.base;
    ++st.steps;
  }
  std::uint64_t L_;
  double delta_;
  flows::FlowSpec flow_;
};

/// f_u = h_i ∘ φ_{t(u)} ∘ h_i⁻¹ for u ∈ J_i, identity elsewhere.
class Thm4Dyn final : public Dynamics {
 public:
  Thm4Dyn(std::uint64_t L, double halfwidth, flows::FlowSpec flow) : L_(L), w_(halfwidth), flow_(flow) {}
  void step(SystemState& st) const override { advance(st, false); }
  double step_tangent(SystemState& st) const override { return advance(st, true); }

 private:
  double advance(SystemState& st, bool tangent) const {
    const double u = lattice_to_unit(st.base);
    double lognorm = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double t = bump(circle_distance(u, 0.25 * i), w_);
      if (t <= 0.0) continue;
      const auto q = translate(st.fiber, kTranslations[static_cast<std::size_t>(i)], -1.0);
      std::array<double, 2> moved{};
      if (tangent) {
        const auto tx = flows::integrate_tangent(flow_, q[0], t);
        const auto ty = flows::integrate_tangent(flow_, q[1], t);
        moved = {tx.x, ty.x};
        lognorm = std::log(std::max(std::fabs(tx.dx), std::fabs(ty.dx)));
      } else {
        moved = flows::integrate(flow_, q, t);
      }
      st.fiber = translate(moved, kTranslations[static_cast<std::size_t>(i)], 1.0);
      break;
    }
    st.base = L_ * st.base;
    ++st.steps;
    return lognorm;
  }
  std::uint64_t L_;
  double w_;
  flows::FlowSpec flow_;
};

class Thm5Dyn final : public Dynamics {
 public:
  explicit Thm5Dyn(flows::FlowSpec flow) : flow_(flow) {}
  void step(SystemState& st) const override { advance(st, false); }
  double step_tangent(SystemState& st) const override { return advance(st, true); }

 private:
  double advance(SystemState& st, bool tangent) const {
    const int i = quaternary_symbol(st.keys[0], st.cursor);
    const auto& tr = kTranslations[static_cast<std::size_t>(i)];
    const auto q = translate(st.fiber, tr, -1.0);
    double lognorm = 0.0;
    std::array<double, 2> moved{};
    if (tangent) {
      const auto tx = flows::integrate_tangent(flow_, q[0], 1.0);
      const auto ty = flows::integrate_tangent(flow_, q[1], 1.0);
      moved = {tx.x, ty.x};
      lognorm = std::log(std::max(std::fabs(tx.dx), std::fabs(ty.dx)));
    } else {
      moved = flows::integrate(flow_, q, 1.0);
    }
    st.fiber = translate(moved, tr, 1.0);
    ++st.cursor;
    ++st.steps;
    return lognorm;
  }
  flows::FlowSpec flow_;
};

class Thick41Dyn final : public Dynamics {
 public:
  Thick41Dyn(Map1D f0, Map1D f1) : f_{std::move(f0), std::move(f1)} {}
  void step(SystemState& st) const override { advance(st); }
  double step_tangent(SystemState& st) const override {
    const double x = st.fiber[0];
    const int w = advance(st);
    return std::log(f_[static_cast<std::size_t>(w)].deriv(x));
  }

 private:
  int advance(SystemState& st) const {
    const int w = binary_symbol(st.keys[0], st.cursor);
    st.fiber[0] = f_[static_cast<std::size_t>(w)].apply(st.fiber[0], 1);
    ++st.cursor;
    ++st.steps;
    return w;
  }
  std::array<Map1D, 2> f_;
};

/// Walk along orbits of F(ω,x) = (σω, f_{ω₀}(x)): a forward step applies
/// f_{ω₀} and shifts left, a backward step applies f_{ω₋₁}⁻¹ and shifts right.
class WalkCore {
 public:
  WalkCore(Map1D f0, Map1D f1) : f_{std::move(f0), std::move(f1)} {}
  double move(SystemState& st, int eta, double x, double* deriv = nullptr) const {
    if (eta > 0) {
      const auto& f = f_[static_cast<std::size_t>(binary_symbol(st.keys[0], st.cursor))];
      if (deriv) *deriv = f.deriv(x);
      ++st.cursor;
      return f.apply(x, 1);
    }
    --st.cursor;
    const auto& f = f_[static_cast<std::size_t>(binary_symbol(st.keys[0], st.cursor))];
    if (deriv) *deriv = f.inverse_deriv(x);
    return f.apply(x, -1);
  }

 private:
  std::array<Map1D, 2> f_;
};

class Thick42Dyn final : public Dynamics {
 public:
  Thick42Dyn(Map1D f0, Map1D f1, randomwalk::ProbProfile p) : core_(std::move(f0), std::move(f1)), p_(std::move(p)) {}
  void step(SystemState& st) const override { advance(st, nullptr); }
  double step_tangent(SystemState& st) const override {
    double d = 1.0;
    advance(st, &d);
    return std::log(d);
  }

 private:
  void advance(SystemState& st, double* d) const {
    const double x = st.fiber[0];
    const int eta = uniform_at(st.keys[2], st.steps) < p_(x) ? 1 : -1;
    st.fiber[0] = core_.move(st, eta, x, d);
    st.S += eta;
    ++st.steps;
  }
  WalkCore core_;
  randomwalk::ProbProfile p_;
};

class Thick431Dyn final : public Dynamics {
 public:
  Thick431Dyn(Map1D f0, Map1D f1, Map1D phi0, Map1D phi1, double p)
      : core_(std::move(f0), std::move(f1)), phi_{std::move(phi0), std::move(phi1)}, p_(p) {}
  void step(SystemState& st) const override { advance(st, nullptr); }
  double step_tangent(SystemState& st) const override {
    double d = 1.0;
    advance(st, &d);
    return std::log(d);
  }

 private:
  void advance(SystemState& st, double* d) const {
    const int eta = uniform_at(st.keys[2], st.steps) < p_ ? 1 : -1;
    const auto& phi = phi_[static_cast<std::size_t>(binary_symbol(st.keys[3], static_cast<std::int64_t>(st.steps)))];
    const double y = core_.move(st, eta, st.fiber[0], d);
    if (d) *d *= phi.deriv(y);
    st.fiber[0] = phi.apply(y, 1);
    st.S += eta;
    ++st.steps;
  }
  WalkCore core_;
  std::array<Map1D, 2> phi_;
  double p_;
};

/// Ingredient map on the circle: identity outside the window [a, b]; inside,
/// in the window coordinate z = (x - a)/(b - a),
///   f0(z) = z - c0 B(z)(z - α),  f1(z) = z + c1 B(z)(z - α)(β - z),
/// with B(z) = 16 z²(1 - z)².
class WindowMap {
 public:
  WindowMap(int which, double alpha, double beta, double c) : which_(which), alpha_(alpha), beta_(beta), c_(c) {}

  double local(double z) const noexcept { return z + c_ * B(z) * shape(z); }
  double local_deriv(double z) const noexcept {
    return 1.0 + c_ * (dB(z) * shape(z) + B(z) * dshape(z));
  }
  double local_inverse(double y) const {
    if (y <= 0.0 || y >= 1.0) return y;
    double lo = 0.0, hi = 1.0, z = y;
    for (int it = 0; it < 100; ++it) {
      const double r = local(z) - y;
      if (std::fabs(r) <= 1e-15) return z;
      if (r > 0.0) hi = z; else lo = z;
      double next = z - r / local_deriv(z);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      z = next;
      if (hi - lo < 1e-16) return z;
    }
    return z;
  }

  double eval(double x, double a, double b) const {
    if (x <= a || x >= b) return x;
    return a + (b - a) * local((x - a) / (b - a));
  }
  double inverse(double x, double a, double b) const {
    if (x <= a || x >= b) return x;
    return a + (b - a) * local_inverse((x - a) / (b - a));
  }
  double deriv(double x, double a, double b) const {
    if (x <= a || x >= b) return 1.0;
    return local_deriv((x - a) / (b - a));
  }

 private:
  static double B(double z) noexcept { return 16.0 * z * z * (1.0 - z) * (1.0 - z); }
  static double dB(double z) noexcept { return 32.0 * z * (1.0 - z) * (1.0 - 2.0 * z); }
  double shape(double z) const noexcept { return which_ == 0 ? -(z - alpha_) : (z - alpha_) * (beta_ - z); }
  double dshape(double z) const noexcept { return which_ == 0 ? -1.0 : (beta_ - z) - (z - alpha_); }
  int which_;
  double alpha_, beta_, c_;
};

constexpr std::array<std::array<double, 2>, 2> kWindows{{{0.05, 0.45}, {0.55, 0.95}}};

class Thick432Dyn final : public Dynamics {
 public:
  Thick432Dyn(double alpha, double beta, double c0, double c1, double eps, double delta, double p)
      : f_{WindowMap(0, alpha, beta, c0), WindowMap(1, alpha, beta, c1)}, eps_(eps), delta_(delta), p_(p) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double a = kWindows[i][0], w = kWindows[i][1] - kWindows[i][0];
      inner_[i] = {a + w * alpha, a + w * beta};
    }
  }

  static double circle_eval(const WindowMap& m, double x, int power) {
    for (const auto& win : kWindows) {
      if (x > win[0] && x < win[1]) return power > 0 ? m.eval(x, win[0], win[1]) : m.inverse(x, win[0], win[1]);
    }
    return x;
  }
  const std::array<std::array<double, 2>, 2>& inner() const noexcept { return inner_; }

  /// ρ = d²/(d² + δ²), d the circle distance to the invariant intervals.
  double rho(double v) const noexcept {
    double d = 1.0;
    for (const auto& I : inner_) {
      if (v >= I[0] && v <= I[1]) return 0.0;
      d = std::min({d, circle_distance(v, I[0]), circle_distance(v, I[1])});
    }
    return d * d / (d * d + delta_ * delta_);
  }

  void step(SystemState& st) const override {
    const int xi = quaternary_symbol(st.keys[3], static_cast<std::int64_t>(st.steps));
    const int eta = uniform_at(st.keys[2], st.steps) < p_ ? 1 : -1;
    double x = st.fiber[0], y = st.fiber[1];
    if (eta > 0) {
      x = circle_eval(f_[static_cast<std::size_t>(binary_symbol(st.keys[0], st.cursor))], x, 1);
      y = circle_eval(f_[static_cast<std::size_t>(binary_symbol(st.keys[1], st.cursor))], y, 1);
      ++st.cursor;
    } else {
      --st.cursor;
      x = circle_eval(f_[static_cast<std::size_t>(binary_symbol(st.keys[0], st.cursor))], x, -1);
      y = circle_eval(f_[static_cast<std::size_t>(binary_symbol(st.keys[1], st.cursor))], y, -1);
    }
    switch (xi) {
      case 0: x = wrap_unit(x + eps_ * rho(y)); break;
      case 1: x = wrap_unit(x - eps_ * rho(y)); break;
      case 2: y = wrap_unit(y + eps_ * rho(x)); break;
      default: y = wrap_unit(y - eps_ * rho(x)); break;
    }
    st.fiber = {x, y};
    st.S += eta;
    ++st.steps;
  }

  const std::array<WindowMap, 2>& maps() const noexcept { return f_; }

 private:
  std::array<WindowMap, 2> f_;
  std::array<std::array<double, 2>, 2> inner_{};
  double eps_, delta_, p_;
};

class CoupledDyn final : public Dynamics {
 public:
  CoupledDyn(flows::Observable zeta, flows::FlowSpec flow) : zeta_(zeta), flow_(flow) {}
  void step(SystemState& st) const override {
    auto next = flows::coupled_step(zeta_, flow_, {st.suspension, st.fiber[0]}, 1.0);
    st.suspension = next.base;
    st.fiber[0] = next.x;
    ++st.steps;
  }

 private:
  flows::Observable zeta_;
  flows::FlowSpec flow_;
};

// ---------------------------------------------------------------------------
// Construction

struct Built {
  std::shared_ptr<const Dynamics> dyn;
  std::vector<CatalogEntry> catalog;
  std::vector<Check> checks;
};

void add_report(std::vector<Check>& out, const maps1d::ValidationReport& r) {
  for (const auto& c : r.checks) out.push_back({r.family + ": " + c.name, c.pass, c.witness});
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

CatalogEntry point(std::string name, double x, double y, double radius) {
  CatalogEntry e;
  e.name = std::move(name);
  e.kind = CatalogEntry::Kind::Point;
  e.center = {x, y};
  e.radius = radius;
  return e;
}

CatalogEntry box(std::string name, double x_lo, double x_hi, double y_lo = 0.0, double y_hi = 1.0) {
  CatalogEntry e;
  e.name = std::move(name);
  e.kind = CatalogEntry::Kind::Box;
  e.box = {x_lo, x_hi, y_lo, y_hi};
  return e;
}

flows::FlowSpec flow_spec(flows::Field field, const ParamMap& p) {
  flows::FlowSpec fs;
  fs.field = field;
  fs.h = p.at("h");
  if (field == flows::Field::TorusGradient) {
    fs.c_h = p.at("c_h");
    fs.beta = p.at("beta");
  }
  return fs;
}

bool lattice_fixed(double q, std::uint64_t L) {
  const std::uint64_t k = unit_to_lattice(q);
  return L * k == k;
}

/// log‖Dφ_t‖ at a torus point for the product field (diagonal Jacobian).
double torus_lognorm(const flows::FlowSpec& fs, const std::array<double, 2>& p, double t) {
  const auto tx = flows::integrate_tangent(fs, p[0], t);
  const auto ty = flows::integrate_tangent(fs, p[1], t);
  return std::log(std::max(std::fabs(tx.dx), std::fabs(ty.dx)));
}

std::array<double, 2> sink(int j) { return translate({0.5, 0.5}, kTranslations[static_cast<std::size_t>(j)], 1.0); }

Built build_kan(const ParamMap& p) {
  Built b;
  b.dyn = std::make_shared<KanDyn>();
  const double radius = p.at("radius");
  b.checks.push_back({"0 < radius < 1/2", radius > 0.0 && radius < 0.5, radius});
  b.catalog = {point("lower", 0.0, 0.0, radius), point("upper", 1.0, 0.0, radius)};
  return b;
}

Built build_thm2(const ParamMap& p) {
  Built b;
  const auto spec = MapSpec::north_south(p.at("a"));
  add_report(b.checks, maps1d::validate_family(spec));
  const double pb = p.at("b");
  b.checks.push_back({"b in (0,1/2)", pb > 0.0 && pb < 0.5, pb});
  if (!all_pass(b.checks)) return b;
  auto prof = randomwalk::ProbProfile::cosine(pb);
  b.checks.push_back({"p(p_S) > 1/2", prof(0.5) > 0.5, prof(0.5)});
  b.checks.push_back({"p(p_N) < 1/2", prof(0.0) < 0.5, prof(0.0)});
  b.dyn = std::make_shared<Thm2Dyn>(Map1D(spec), prof);
  b.catalog = {point("p_N", 0.0, 0.0, p.at("radius")), point("p_S", 0.5, 0.0, p.at("radius"))};
  return b;
}

Built build_thm3(const ParamMap& p) {
  Built b;
  const auto L = static_cast<std::uint64_t>(p.at("L"));
  const double delta = p.at("delta");
  const auto fs = flow_spec(flows::Field::CircleGradient, p);
  fs.validate();
  b.checks.push_back({"L >= 2", p.at("L") >= 2.0, p.at("L")});
  b.checks.push_back({"q_1 = 1/2 fixed by E_L", lattice_fixed(0.5, L), 0.5});
  b.checks.push_back({"q_2 = 0 fixed by E_L", lattice_fixed(0.0, L), 0.0});
  auto dyn = std::make_shared<Thm3Dyn>(L, delta, fs);
  double max_q1 = -INFINITY, min_q2 = INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    max_q1 = std::max(max_q1, dyn->s_value(0.5, x));
    min_q2 = std::min(min_q2, dyn->s_value(0.0, x));
  }
  b.checks.push_back({"s(q_1,x) < 0", max_q1 < 0.0, max_q1});
  b.checks.push_back({"s(q_2,x) > 0", min_q2 > 0.0, min_q2});
  double int_n = 0.0, int_s = 0.0;
  constexpr int kQuad = 4096;
  for (int i = 0; i < kQuad; ++i) {
    const double u = (i + 0.5) / kQuad;
    int_n += dyn->s_value(u, 0.0);
    int_s += dyn->s_value(u, 0.5);
  }
  int_n /= kQuad;
  int_s /= kQuad;
  b.checks.push_back({"int s(u,p_N) du < 0", int_n < 0.0, int_n});
  b.checks.push_back({"int s(u,p_S) du > 0", int_s > 0.0, int_s});
  b.dyn = dyn;
  b.catalog = {point("p_N", 0.0, 0.0, p.at("radius")), point("p_S", 0.5, 0.0, p.at("radius"))};
  return b;
}

std::vector<CatalogEntry> sink_catalog(double radius) {
  std::vector<CatalogEntry> c;
  for (int j = 0; j < 4; ++j) {
    const auto s = sink(j);
    c.push_back(point("s" + std::to_string(j + 1), s[0], s[1], radius));
  }
  return c;
}

Built build_thm4(const ParamMap& p) {
  Built b;
  const auto L = static_cast<std::uint64_t>(p.at("L"));
  const double w = p.at("halfwidth");
  const auto fs = flow_spec(flows::Field::TorusGradient, p);
  fs.validate();
  b.checks.push_back({"L >= 2", p.at("L") >= 2.0, p.at("L")});
  for (int i = 0; i < 4; ++i) {
    b.checks.push_back({"q_" + std::to_string(i + 1) + " fixed by E_L", lattice_fixed(0.25 * i, L), 0.25 * i});
  }
  b.checks.push_back({"J_i disjoint (0 < halfwidth < 1/8)", w > 0.0 && w < 0.125, w});
  if (!all_pass(b.checks)) return b;
  // ∫ log‖Df_u(s_i)‖ du: f_u is the identity off ⋃J_j, so only the bumps count.
  constexpr int kQuad = 200;
  for (int i = 0; i < 4; ++i) {
    double integral = 0.0;
    for (int j = 0; j < 4; ++j) {
      const auto q = translate(sink(i), kTranslations[static_cast<std::size_t>(j)], -1.0);
      for (int k = 0; k < kQuad; ++k) {
        const double offset = -w + 2.0 * w * (k + 0.5) / kQuad;
        const double t = bump(std::fabs(offset), w);
        if (t > 0.0) integral += torus_lognorm(fs, q, t) * (2.0 * w / kQuad);
      }
    }
    b.checks.push_back({"int log|Df_u(s_" + std::to_string(i + 1) + ")| du < 0", integral < 0.0, integral});
  }
  b.dyn = std::make_shared<Thm4Dyn>(L, w, fs);
  b.catalog = sink_catalog(p.at("radius"));
  return b;
}

Built build_thm5(const ParamMap& p) {
  Built b;
  const auto fs = flow_spec(flows::Field::TorusGradient, p);
  fs.validate();
  for (int j = 0; j < 4; ++j) {
    double avg = 0.0;
    for (int i = 0; i < 4; ++i) {
      avg += 0.25 * torus_lognorm(fs, translate(sink(j), kTranslations[static_cast<std::size_t>(i)], -1.0), 1.0);
    }
    b.checks.push_back({"(1/k) sum_i log|Dpsi_i(s_" + std::to_string(j + 1) + ")| < 0", avg < 0.0, avg});
  }
  b.dyn = std::make_shared<Thm5Dyn>(fs);
  b.catalog = sink_catalog(p.at("radius"));
  return b;
}

Built build_thick41(const ParamMap& p, bool walk) {
  Built b;
  const auto s0 = MapSpec::thick_f0(p.at("c0"));
  const auto s1 = MapSpec::thick_f1(p.at("l"), p.at("r"), p.at("c1"));
  add_report(b.checks, maps1d::validate_thick_pair(s0, s1));
  const double l = p.at("l"), r = p.at("r");
  if (walk) {
    const double pl = p.at("p_l"), pr = p.at("p_r");
    b.checks.push_back({"p_l in (1/2,1)", pl > 0.5 && pl < 1.0, pl});
    b.checks.push_back({"p_r in (0,1/2)", pr > 0.0 && pr < 0.5, pr});
  }
  if (!all_pass(b.checks)) return b;
  if (walk) {
    b.dyn = std::make_shared<Thick42Dyn>(Map1D(s0), Map1D(s1),
                                         randomwalk::ProbProfile::piecewise_linear(p.at("p_l"), p.at("p_r"), l, r));
    b.catalog = {box("Lambda_l", 0.0, l), box("Lambda_r", r, 1.0)};
  } else {
    b.dyn = std::make_shared<Thick41Dyn>(Map1D(s0), Map1D(s1));
    b.catalog = {box("Lambda_l", 0.0, l), point("one", 1.0, 0.0, p.at("radius"))};
  }
  return b;
}

Built build_thick431(const ParamMap& p) {
  Built b;
  const auto s0 = MapSpec::alt_f0(p.at("m"), p.at("c0"));
  const auto s1 = MapSpec::alt_f1(p.at("l"), p.at("r"), p.at("c1"));
  add_report(b.checks, maps1d::validate_alt_pair(s0, s1));
  const auto phi0 = MapSpec::phi_shift(p.at("c"), 1), phi1 = MapSpec::phi_shift(p.at("c"), -1);
  add_report(b.checks, maps1d::validate_family(phi0));
  add_report(b.checks, maps1d::validate_family(phi1));
  const double pp = p.at("p");
  b.checks.push_back({"p in (1/2,1)", pp > 0.5 && pp < 1.0, pp});
  if (!all_pass(b.checks)) return b;
  b.dyn = std::make_shared<Thick431Dyn>(Map1D(s0), Map1D(s1), Map1D(phi0), Map1D(phi1), pp);
  b.catalog = {box("Lambda_l", 0.0, p.at("l")), box("Lambda_r", p.at("r"), 1.0)};
  return b;
}

Built build_thick432(const ParamMap& p) {
  Built b;
  const double alpha = p.at("alpha"), beta = p.at("beta"), c0 = p.at("c0"), c1 = p.at("c1");
  const double eps = p.at("eps"), delta = p.at("delta"), pp = p.at("p");
  b.checks.push_back({"0 < alpha < beta < 1", alpha > 0.0 && alpha < beta && beta < 1.0, beta - alpha});
  b.checks.push_back({"c0 > 0", c0 > 0.0, c0});
  b.checks.push_back({"c1 > 0", c1 > 0.0, c1});
  b.checks.push_back({"eps > 0", eps > 0.0, eps});
  b.checks.push_back({"delta > 0", delta > 0.0, delta});
  b.checks.push_back({"p in (1/2,1)", pp > 0.5 && pp < 1.0, pp});
  if (!all_pass(b.checks)) return b;
  auto dyn = std::make_shared<Thick432Dyn>(alpha, beta, c0, c1, eps, delta, pp);
  const auto& f = dyn->maps();
  double min_d0 = INFINITY, min_d1 = INFINITY;
  for (int i = 0; i <= 10000; ++i) {
    const double z = i / 10000.0;
    min_d0 = std::min(min_d0, f[0].local_deriv(z));
    min_d1 = std::min(min_d1, f[1].local_deriv(z));
  }
  b.checks.push_back({"f0' > 0 on window", min_d0 > 0.0, min_d0});
  b.checks.push_back({"f1' > 0 on window", min_d1 > 0.0, min_d1});
  const double prod = f[0].local_deriv(alpha) * f[1].local_deriv(alpha);
  b.checks.push_back({"f0'(alpha) f1'(alpha) > 1", prod > 1.0, prod});
  const double top = std::max(f[0].local(beta), f[1].local(beta));
  const double bottom = std::min(f[0].local(alpha), f[1].local(alpha));
  b.checks.push_back({"[alpha,beta] maps into itself", top <= beta && bottom >= alpha, top});
  b.dyn = dyn;
  const auto& I = dyn->inner();
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      b.catalog.push_back(
          box("box" + std::to_string(i + 1) + std::to_string(j + 1), I[i][0], I[i][1], I[j][0], I[j][1]));
    }
  }
  return b;
}

Built build_flow(const ParamMap& p, bool thm8) {
  Built b;
  const auto fs = flow_spec(flows::Field::CircleGradient, p);
  fs.validate();
  flows::Observable zeta;
  if (thm8) {
    zeta = flows::Observable::height_coupled(p.at("delta"));
    auto cs = flows::zeta_checks(zeta);
    b.checks.insert(b.checks.end(), cs.begin(), cs.end());
  } else {
    zeta = flows::Observable::cosine_roof(p.at("a0"), p.at("a1"));
    const double mean = flows::base_mean(zeta);
    b.checks.push_back({"int eta dlambda > 0", mean > 0.0, mean});
  }
  b.dyn = std::make_shared<CoupledDyn>(zeta, fs);
  b.catalog = {point("p_N", 0.0, 0.0, p.at("radius")), point("p_S", 0.5, 0.0, p.at("radius"))};
  return b;
}

Built build_preset(Preset preset, const ParamMap& p) {
  try {
    switch (preset) {
      case Preset::Kan: return build_kan(p);
      case Preset::Thm2Walk: return build_thm2(p);
      case Preset::Thm3FlowTime: return build_thm3(p);
      case Preset::Thm4Multi: return build_thm4(p);
      case Preset::Thm5Ifs: return build_thm5(p);
      case Preset::Thick41: return build_thick41(p, false);
      case Preset::Thick42Walk: return build_thick41(p, true);
      case Preset::Thick431Alt: return build_thick431(p);
      case Preset::Thick432Product: return build_thick432(p);
      case Preset::FlowExample7: return build_flow(p, false);
      case Preset::FlowThm8: return build_flow(p, true);
    }
  } catch (const ConstructionError& e) {
    Built b;
    b.checks.push_back({e.hypothesis(), false, NAN});
    return b;
  }
  return {};
}

ParamMap merged(const PresetInfo& info, const ParamMap& overrides) {
  if (auto errors = check_param_names(info, overrides); !errors.empty()) throw ConfigError(errors);
  ParamMap full;
  for (const auto& p : info.params) full[p.name] = p.default_value;
  for (const auto& [k, v] : overrides) full[k] = v;
  return full;
}

}  // namespace

// ---------------------------------------------------------------------------
// SkewSystem

std::vector<Check> SkewSystem::hypothesis_checks(const std::string& preset, const ParamMap& params) {
  const auto& info = preset_info(preset);
  return build_preset(info.preset, merged(info, params)).checks;
}

SkewSystem SkewSystem::build(const std::string& preset, const ParamMap& params) {
  const auto& info = preset_info(preset);
  SkewSystem sys;
  sys.preset_ = info.preset;
  sys.name_ = info.name;
  sys.params_ = merged(info, params);
  Built b = build_preset(info.preset, sys.params_);
  for (const auto& c : b.checks) {
    if (!c.pass) {
      std::ostringstream os;
      os.precision(6);
      os << "preset " << info.name << " violates the hypothesis (witness " << c.witness << ")";
      throw ConstructionError(c.name, os.str());
    }
  }
  sys.dyn_ = std::move(b.dyn);
  sys.catalog_ = std::move(b.catalog);
  sys.checks_ = std::move(b.checks);

  // Point attractors must be fixed by one full step from any base state.
  for (const auto& e : sys.catalog_) {
    if (e.kind != CatalogEntry::Kind::Point) continue;
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 16; ++k) {
      SystemState st = sys.start_state(derive_key(0xca7a1060ULL, k), {});
      st.fiber = e.center;
      sys.step(st);
      for (int d = 0; d < sys.fiber_dim(); ++d) {
        const double diff = sys.fiber_circle() ? circle_distance(st.fiber[static_cast<std::size_t>(d)], e.center[static_cast<std::size_t>(d)])
                                               : std::fabs(st.fiber[static_cast<std::size_t>(d)] - e.center[static_cast<std::size_t>(d)]);
        worst = std::max(worst, diff);
      }
    }
    sys.checks_.push_back({"catalog " + e.name + " invariant", worst <= 1e-9, worst});
    if (worst > 1e-9) throw ConstructionError("catalog " + e.name + " invariant", "moved by " + std::to_string(worst));
  }
  return sys;
}

double SkewSystem::param(const std::string& key) const {
  auto it = params_.find(key);
  if (it == params_.end()) throw std::invalid_argument("preset " + name_ + " has no parameter '" + key + "'");
  return it->second;
}

BaseKind SkewSystem::base_kind() const noexcept {
  switch (preset_) {
    case Preset::Kan:
    case Preset::Thm3FlowTime:
    case Preset::Thm4Multi:
      return BaseKind::Expanding;
    case Preset::Thm2Walk:
    case Preset::Thick42Walk:
    case Preset::Thick431Alt:
    case Preset::Thick432Product:
      return BaseKind::Walk;
    case Preset::Thm5Ifs:
    case Preset::Thick41:
      return BaseKind::Shift;
    case Preset::FlowExample7:
    case Preset::FlowThm8:
      return BaseKind::Suspension;
  }
  return BaseKind::Shift;
}

int SkewSystem::fiber_dim() const noexcept {
  return preset_ == Preset::Thm4Multi || preset_ == Preset::Thm5Ifs || preset_ == Preset::Thick432Product ? 2 : 1;
}

bool SkewSystem::fiber_circle() const noexcept {
  switch (preset_) {
    case Preset::Kan:
    case Preset::Thick41:
    case Preset::Thick42Walk:
    case Preset::Thick431Alt:
      return false;
    default:
      return true;
  }
}

SystemState SkewSystem::start_state(std::uint64_t key, const StartSpec& spec) const {
  SystemState st;
  for (std::size_t i = 0; i < st.keys.size(); ++i) st.keys[i] = derive_key(key, i + 1);
  // Pinned base coordinates keep a little key-dependent noise below 2⁻⁵⁴ so
  // distinct samples in one cell never share an orbit.
  st.base = spec.base ? (unit_to_lattice(*spec.base) ^ (bits_at(key, 0) & 0x3ff)) : bits_at(key, 0);
  st.suspension = flows::SuspensionPoint::from(uniform_at(key, 1), uniform_at(key, 2),
                                               spec.base ? *spec.base : uniform_at(key, 3));
  st.fiber[0] = spec.x ? *spec.x : uniform_at(key, 4);
  st.fiber[1] = fiber_dim() == 2 ? (spec.y ? *spec.y : uniform_at(key, 5)) : 0.0;
  return st;
}

void SkewSystem::step(SystemState& st) const { dyn_->step(st); }
double SkewSystem::step_tangent(SystemState& st) const { return dyn_->step_tangent(st); }
double SkewSystem::s_value(double u, double x) const { return dyn_->s_value(u, x); }

bool SkewSystem::contains(const CatalogEntry& e, const SystemState& st) const noexcept {
  const int dim = fiber_dim();
  if (e.kind == CatalogEntry::Kind::Box) {
    if (st.fiber[0] < e.box[0] || st.fiber[0] > e.box[1]) return false;
    return dim == 1 || (st.fiber[1] >= e.box[2] && st.fiber[1] <= e.box[3]);
  }
  for (int d = 0; d < dim; ++d) {
    const auto i = static_cast<std::size_t>(d);
    const double dist = fiber_circle() ? circle_distance(st.fiber[i], e.center[i]) : std::fabs(st.fiber[i] - e.center[i]);
    if (!(dist < e.radius)) return false;
  }
  return true;
}

int SkewSystem::locate(const SystemState& st) const noexcept {
  for (std::size_t i = 0; i < catalog_.size(); ++i) {
    if (contains(catalog_[i], st)) return static_cast<int>(i);
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Diagnostics

namespace {

constexpr std::size_t kBlocks = 100;

LyapunovEstimate from_blocks(const std::vector<double>& block_sums, std::uint64_t block_len, std::uint64_t n) {
  std::vector<double> means(block_sums.size());
  double total = 0.0;
  for (std::size_t i = 0; i < block_sums.size(); ++i) {
    means[i] = block_sums[i] / static_cast<double>(block_len);
    total += block_sums[i];
  }
  const double se = stats::stddev(means) / std::sqrt(static_cast<double>(means.size()));
  return {total / static_cast<double>(block_len * block_sums.size()), se, n};
}

}  // namespace

LyapunovEstimate fiber_lyapunov(const SkewSystem& sys, std::size_t entry, std::uint64_t n, std::uint64_t seed) {
  if (n < 1000) throw std::invalid_argument("fiber_lyapunov needs n >= 1000");
  if (entry >= sys.catalog().size()) throw std::invalid_argument("catalog entry out of range");
  const auto& e = sys.catalog()[entry];
  if (e.kind != CatalogEntry::Kind::Point) throw std::invalid_argument("fiber_lyapunov needs a point attractor");
  const std::uint64_t block_len = n / kBlocks;
  std::vector<double> sums(kBlocks, 0.0);
  SystemState st = sys.start_state(derive_key(seed, 0x1e7a), {});
  st.fiber = e.center;
  if (sys.preset() == Preset::Kan) {
    // log(1 ± cos(2πu)/32): +1 at the lower circle, -1 at the upper.
    const double coef = e.center[0] == 0.0 ? 0.03125 : -0.03125;
    const auto backend = simd::active_backend();
    std::uint64_t k = st.base;
    // 3^block_len mod 2⁶⁴ by squaring.
    std::uint64_t advance = 1;
    for (std::uint64_t base = 3, exp = block_len; exp; exp >>= 1, base *= base) {
      if (exp & 1) advance *= base;
    }
    for (std::size_t b = 0; b < kBlocks; ++b) {
      sums[b] = simd::kan_log_sum(backend, k, block_len, coef);
      k *= advance;
    }
    return from_blocks(sums, block_len, block_len * kBlocks);
  }
  for (std::size_t b = 0; b < kBlocks; ++b) {
    for (std::uint64_t i = 0; i < block_len; ++i) sums[b] += sys.step_tangent(st);
  }
  return from_blocks(sums, block_len, block_len * kBlocks);
}

LyapunovEstimate ep_lyapunov(double p, std::uint64_t n, std::uint64_t seed) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ep_lyapunov needs p in (0,1)");
  if (n < 1000) throw std::invalid_argument("ep_lyapunov needs n >= 1000");
  const std::uint64_t block_len = n / kBlocks;
  const double left = -std::log(p), right = -std::log(1.0 - p);
  std::vector<double> sums(kBlocks, 0.0);
  double u = uniform_at(derive_key(seed, 0xe9), 0);
  for (std::size_t b = 0; b < kBlocks; ++b) {
    for (std::uint64_t i = 0; i < block_len; ++i) {
      sums[b] += u < p ? left : right;
      u = symbolic::ep_apply(p, u);
    }
  }
  return from_blocks(sums, block_len, block_len * kBlocks);
}

std::pair<symbolic::Word, symbolic::Word> chi_apply(const symbolic::Word& eta, const symbolic::Word& omega) {
  const int eta0 = eta.at(0) == 1 ? 1 : -1;
  return {symbolic::shift_word(eta, 1), symbolic::shift_word(omega, eta0)};
}

std::array<double, 4> j_apply(double p, const std::array<double, 4>& pt) {
  const auto [x, y] = symbolic::baker_apply(p, pt[0], pt[1], 1);
  const auto [u, v] = symbolic::baker_apply(0.5, pt[2], pt[3], pt[0] < p ? 1 : -1);
  return {x, y, u, v};
}

double birkhoff_dispersion(const std::function<Point4(const Point4&)>& map,
                           const std::function<double(const Point4&)>& observable, std::size_t starts,
                           std::uint64_t n, std::uint64_t seed, unsigned workers) {
  if (starts < 2 || n == 0) throw std::invalid_argument("birkhoff_dispersion needs starts >= 2 and n >= 1");
  std::vector<double> averages(starts);
  parallel_for(starts, workers, [&](std::size_t i) {
    const std::uint64_t key = derive_key(seed, i);
    Point4 pt{uniform_at(key, 0), uniform_at(key, 1), uniform_at(key, 2), uniform_at(key, 3)};
    double sum = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
      sum += observable(pt);
      pt = map(pt);
    }
    averages[i] = sum / static_cast<double>(n);
  });
  return stats::stddev(averages);
}

}  // namespace basinlab::skew
