#include "basinlab/maps1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "basinlab/errors.hpp"
#include "basinlab/trig.hpp"

namespace basinlab::maps1d {

namespace {

constexpr int kGridPoints = 10000;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// x + b·x(1-x) and its exact inverse; ThickF0, KanFiber and PhiShift are all
// of this form.
double logistic_shift(double b, double x) { return x + b * x * (1.0 - x); }
double logistic_shift_deriv(double b, double x) { return 1.0 + b * (1.0 - 2.0 * x); }
double logistic_shift_inverse(double b, double y) {
  const double a = 1.0 + b;
  return 2.0 * y / (a + std::sqrt(a * a - 4.0 * b * y));
}

double kan_amplitude(double u) { return cos_2pi_poly(u) * 0.03125; }

std::size_t expected_params(Family f) {
  switch (f) {
    case Family::NorthSouth:
    case Family::KanFiber:
    case Family::ThickF0:
      return 1;
    case Family::AltF0:
    case Family::PhiShift:
      return 2;
    case Family::ThickF1:
    case Family::AltF1:
      return 3;
  }
  return 0;
}

struct Interval {
  double lo, hi;
};

class ReportBuilder {
 public:
  explicit ReportBuilder(std::string family) { report_.family = std::move(family); }
  void check(std::string name, bool pass, double witness) {
    report_.checks.push_back({std::move(name), pass, witness});
  }
  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
};

void check_monotone(ReportBuilder& rb, const MapSpec& s) {
  // The circle family is monotone on its lift x + a·sin(2πx).
  auto lift = [&](double x) { return s.family == Family::NorthSouth ? x + s.params[0] * sin_2pi(x) : eval(s, x); };
  double min_deriv = INFINITY;
  double min_gap = INFINITY;
  double prev = lift(0.0);
  for (int i = 0; i <= kGridPoints; ++i) {
    const double x = static_cast<double>(i) / kGridPoints;
    min_deriv = std::min(min_deriv, eval_deriv(s, x));
    if (i > 0) {
      const double y = lift(x);
      min_gap = std::min(min_gap, y - prev);
      prev = y;
    }
  }
  rb.check("derivative > 0 on grid", min_deriv > 0.0, min_deriv);
  rb.check("strictly increasing on grid", min_gap > 0.0, min_gap);
}

void check_fixed(ReportBuilder& rb, const MapSpec& s, double p, const std::string& label) {
  double img = eval(s, p);
  double err = s.family == Family::NorthSouth ? circle_distance(img, p) : std::fabs(img - p);
  rb.check("f(" + label + ") = " + label, err <= 1e-14, err);
}

/// f(x) - x has sign `sign` on every grid point strictly inside `iv`.
void check_sign(ReportBuilder& rb, const MapSpec& s, Interval iv, int sign, const std::string& label) {
  double worst = INFINITY;  // min over grid of sign·(f(x) - x)
  for (int i = 1; i < kGridPoints; ++i) {
    const double x = static_cast<double>(i) / kGridPoints;
    if (x <= iv.lo + 1e-12 || x >= iv.hi - 1e-12) continue;
    double d = s.family == Family::NorthSouth ? s.params[0] * sin_2pi(x) : eval(s, x) - x;
    worst = std::min(worst, sign * d);
  }
  rb.check(std::string(sign > 0 ? "f(x) > x on " : "f(x) < x on ") + label, worst > 0.0, worst);
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::NorthSouth: return "NorthSouth";
    case Family::KanFiber: return "KanFiber";
    case Family::ThickF0: return "ThickF0";
    case Family::ThickF1: return "ThickF1";
    case Family::AltF0: return "AltF0";
    case Family::AltF1: return "AltF1";
    case Family::PhiShift: return "PhiShift";
  }
  return "?";
}

std::string MapSpec::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << family_name(family) << '(';
  for (std::size_t i = 0; i < params.size(); ++i) os << (i ? "," : "") << params[i];
  os << ')';
  return os.str();
}

bool ValidationReport::passed() const noexcept { return first_failure() == nullptr; }

const Check* ValidationReport::first_failure() const noexcept {
  for (const auto& c : checks) {
    if (!c.pass) return &c;
  }
  return nullptr;
}

std::string ValidationReport::render() const {
  std::ostringstream os;
  os.precision(6);
  os << family << ":\n";
  for (const auto& c : checks) {
    os << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << " (witness " << c.witness << ")\n";
  }
  return os.str();
}

void ValidationReport::append(const ValidationReport& other) {
  for (const auto& c : other.checks) checks.push_back({other.family + ": " + c.name, c.pass, c.witness});
}

double eval(const MapSpec& s, double x) {
  const auto& p = s.params;
  switch (s.family) {
    case Family::NorthSouth: return wrap_unit(x + p[0] * sin_2pi(x));
    case Family::KanFiber: return logistic_shift(kan_amplitude(p[0]), x);
    case Family::ThickF0: return logistic_shift(-p[0], x);
    case Family::ThickF1: return x + p[2] * x * (x - p[0]) * (x - p[1]) * (1.0 - x);
    case Family::AltF0: return x + p[1] * x * (x - p[0]) * (1.0 - x);
    case Family::AltF1: {
      const double t = x - p[1];
      return x - p[2] * x * (x - p[0]) * t * t * (1.0 - x);
    }
    case Family::PhiShift:
      return p[1] > 0 ? logistic_shift(p[0], x) : logistic_shift_inverse(p[0], x);
  }
  return x;
}

double eval_deriv(const MapSpec& s, double x) {
  const auto& p = s.params;
  switch (s.family) {
    case Family::NorthSouth: return 1.0 + kTwoPi * p[0] * cos_2pi(x);
    case Family::KanFiber: return logistic_shift_deriv(kan_amplitude(p[0]), x);
    case Family::ThickF0: return logistic_shift_deriv(-p[0], x);
    case Family::ThickF1: {
      const double l = p[0], r = p[1];
      const double g = (x - l) * (x - r) * (1.0 - x) + x * (x - r) * (1.0 - x) + x * (x - l) * (1.0 - x) -
                       x * (x - l) * (x - r);
      return 1.0 + p[2] * g;
    }
    case Family::AltF0: {
      const double m = p[0];
      return 1.0 + p[1] * ((x - m) * (1.0 - x) + x * (1.0 - x) - x * (x - m));
    }
    case Family::AltF1: {
      const double l = p[0], t = x - p[1];
      const double g = (x - l) * t * t * (1.0 - x) + x * t * t * (1.0 - x) + 2.0 * x * (x - l) * t * (1.0 - x) -
                       x * (x - l) * t * t;
      return 1.0 - p[2] * g;
    }
    case Family::PhiShift:
      if (p[1] > 0) return logistic_shift_deriv(p[0], x);
      return 1.0 / logistic_shift_deriv(p[0], logistic_shift_inverse(p[0], x));
  }
  return 1.0;
}

double eval_inverse(const MapSpec& s, double y) {
  const auto& p = s.params;
  switch (s.family) {
    case Family::KanFiber: return logistic_shift_inverse(kan_amplitude(p[0]), y);
    case Family::ThickF0: return logistic_shift_inverse(-p[0], y);
    case Family::PhiShift: return p[1] > 0 ? logistic_shift_inverse(p[0], y) : logistic_shift(p[0], y);
    default: break;
  }

  // Safeguarded Newton on a monotone function. The circle family is solved on
  // its lift x + a·sin(2πx), which stays within a of the identity.
  const bool circle = s.family == Family::NorthSouth;
  auto lift = [&](double x) { return circle ? x + p[0] * sin_2pi(x) : eval(s, x); };
  double lo = circle ? y - p[0] : 0.0;
  double hi = circle ? y + p[0] : 1.0;
  if (!circle && (y <= 0.0 || y >= 1.0)) return y;
  double x = y;
  for (int it = 0; it < 60; ++it) {
    const double g = lift(x) - y;
    if (g == 0.0) break;
    (g > 0.0 ? hi : lo) = x;
    double next = x - g / eval_deriv(s, x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - x);
    x = next;
    if (step <= 4e-16 * std::max(1.0, std::fabs(x))) break;
  }
  const double residual = std::fabs(lift(x) - y);
  if (residual > 1e-12) throw NumericalError("inverse of " + s.to_string() + " did not converge", residual);
  return circle ? wrap_unit(x) : x;
}

ValidationReport validate_family(const MapSpec& s) {
  ReportBuilder rb(s.to_string());
  const bool count_ok = s.params.size() == expected_params(s.family);
  rb.check("parameter count", count_ok, static_cast<double>(s.params.size()));
  if (!count_ok) return rb.take();
  for (double v : s.params) {
    if (!std::isfinite(v)) {
      rb.check("finite parameters", false, v);
      return rb.take();
    }
  }

  const auto& p = s.params;
  bool ranges_ok = true;
  auto range = [&](const std::string& name, bool ok, double witness) {
    rb.check(name, ok, witness);
    ranges_ok = ranges_ok && ok;
  };
  switch (s.family) {
    case Family::NorthSouth: range("a in (0, 1/(2pi))", p[0] > 0.0 && p[0] < 1.0 / kTwoPi, p[0]); break;
    case Family::KanFiber: break;
    case Family::ThickF0: range("c0 in (0,1)", p[0] > 0.0 && p[0] < 1.0, p[0]); break;
    case Family::ThickF1:
    case Family::AltF1:
      range("0 < l < r < 1", p[0] > 0.0 && p[0] < p[1] && p[1] < 1.0, p[1] - p[0]);
      range("c1 > 0", p[2] > 0.0, p[2]);
      break;
    case Family::AltF0:
      range("m in (0,1)", p[0] > 0.0 && p[0] < 1.0, p[0]);
      range("c0 > 0", p[1] > 0.0, p[1]);
      break;
    case Family::PhiShift:
      range("c in (0,1)", p[0] > 0.0 && p[0] < 1.0, p[0]);
      range("sign is +1 or -1", p[1] == 1.0 || p[1] == -1.0, p[1]);
      break;
  }

  check_monotone(rb, s);
  if (!ranges_ok) return rb.take();

  switch (s.family) {
    case Family::NorthSouth:
      check_fixed(rb, s, 0.0, "0");
      check_fixed(rb, s, 0.5, "1/2");
      check_sign(rb, s, {0.0, 0.5}, +1, "(0,1/2)");
      check_sign(rb, s, {0.5, 1.0}, -1, "(1/2,1)");
      rb.check("f'(p_N) > 1", eval_deriv(s, 0.0) > 1.0, eval_deriv(s, 0.0));
      rb.check("f'(p_S) < 1", eval_deriv(s, 0.5) < 1.0, eval_deriv(s, 0.5));
      break;
    case Family::KanFiber:
      check_fixed(rb, s, 0.0, "0");
      check_fixed(rb, s, 1.0, "1");
      break;
    case Family::ThickF0:
      check_fixed(rb, s, 0.0, "0");
      check_fixed(rb, s, 1.0, "1");
      check_sign(rb, s, {0.0, 1.0}, -1, "(0,1)");
      break;
    case Family::ThickF1:
      check_fixed(rb, s, 0.0, "0");
      check_fixed(rb, s, p[0], "l");
      check_fixed(rb, s, p[1], "r");
      check_fixed(rb, s, 1.0, "1");
      check_sign(rb, s, {0.0, p[0]}, +1, "(0,l)");
      check_sign(rb, s, {p[0], p[1]}, -1, "(l,r)");
      check_sign(rb, s, {p[1], 1.0}, +1, "(r,1)");
      break;
    case Family::AltF0:
      check_fixed(rb, s, 0.0, "0");
      check_fixed(rb, s, p[0], "m");
      check_fixed(rb, s, 1.0, "1");
      check_sign(rb, s, {0.0, p[0]}, -1, "(0,m)");
      check_sign(rb, s, {p[0], 1.0}, +1, "(m,1)");
      break;
    case Family::AltF1:
      check_fixed(rb, s, 0.0, "0");
      check_fixed(rb, s, p[0], "l");
      check_fixed(rb, s, p[1], "r");
      check_fixed(rb, s, 1.0, "1");
      check_sign(rb, s, {0.0, p[0]}, +1, "(0,l)");
      check_sign(rb, s, {p[0], p[1]}, -1, "(l,r)");
      check_sign(rb, s, {p[1], 1.0}, -1, "(r,1)");
      break;
    case Family::PhiShift:
      check_fixed(rb, s, 0.0, "0");
      check_fixed(rb, s, 1.0, "1");
      check_sign(rb, s, {0.0, 1.0}, p[1] > 0 ? +1 : -1, "(0,1)");
      break;
  }
  return rb.take();
}

ValidationReport validate_thick_pair(const MapSpec& f0, const MapSpec& f1) {
  ReportBuilder rb("thick pair " + f0.to_string() + " + " + f1.to_string());
  ValidationReport out = rb.take();
  const bool families_ok = f0.family == Family::ThickF0 && f1.family == Family::ThickF1;
  out.checks.push_back({"families are ThickF0 + ThickF1", families_ok, 0.0});
  if (!families_ok) return out;
  auto r0 = validate_family(f0);
  auto r1 = validate_family(f1);
  out.append(r0);
  out.append(r1);
  if (!r0.passed() || !r1.passed()) return out;

  const double l = f1.params[0], r = f1.params[1];
  const double prod0 = eval_deriv(f0, 0.0) * eval_deriv(f1, 0.0);
  const double prod1 = eval_deriv(f0, 1.0) * eval_deriv(f1, 1.0);
  out.checks.push_back({"f0'(0) f1'(0) > 1", prod0 > 1.0, prod0});
  out.checks.push_back({"f0'(1) f1'(1) < 1", prod1 < 1.0, prod1});
  const double img_l = std::max(eval(f0, l), eval(f1, l));
  out.checks.push_back({"I_l = [0,l] maps into itself", img_l <= l && eval(f0, 0.0) == 0.0, img_l});
  const double pre_r = std::min(eval_inverse(f0, r), eval_inverse(f1, r));
  out.checks.push_back({"I_r = [r,1] maps into itself under inverses", pre_r >= r, pre_r});
  return out;
}

ValidationReport validate_alt_pair(const MapSpec& f0, const MapSpec& f1) {
  ValidationReport out;
  out.family = "alt pair " + f0.to_string() + " + " + f1.to_string();
  const bool families_ok = f0.family == Family::AltF0 && f1.family == Family::AltF1;
  out.checks.push_back({"families are AltF0 + AltF1", families_ok, 0.0});
  if (!families_ok) return out;
  auto r0 = validate_family(f0);
  auto r1 = validate_family(f1);
  out.append(r0);
  out.append(r1);
  if (!r0.passed() || !r1.passed()) return out;

  const double m = f0.params[0], l = f1.params[0], r = f1.params[1];
  out.checks.push_back({"l < m < r", l < m && m < r, m});
  const double prod0 = eval_deriv(f0, 0.0) * eval_deriv(f1, 0.0);
  const double prod1 = eval_deriv(f0, 1.0) * eval_deriv(f1, 1.0);
  out.checks.push_back({"f0'(0) f1'(0) > 1", prod0 > 1.0, prod0});
  out.checks.push_back({"f0'(1) f1'(1) > 1", prod1 > 1.0, prod1});
  const double img_l = std::max(eval(f0, l), eval(f1, l));
  out.checks.push_back({"I_l = [0,l] maps into itself", img_l <= l, img_l});
  const double img_r = std::min(eval(f0, r), eval(f1, r));
  out.checks.push_back({"I_r = [r,1] maps into itself", img_r >= r, img_r});
  return out;
}

Map1D::Map1D(MapSpec spec) : spec_(std::move(spec)), report_(validate_family(spec_)) {
  if (const Check* bad = report_.first_failure()) {
    throw ConstructionError(bad->name, spec_.to_string() + " (witness " + std::to_string(bad->witness) + ")");
  }
}

Domain Map1D::domain() const noexcept {
  return spec_.family == Family::NorthSouth ? Domain::Circle : Domain::Interval;
}

double Map1D::apply(double x, int power) const {
  if (power == 1) return eval(spec_, x);
  if (power == -1) return eval_inverse(spec_, x);
  throw std::invalid_argument("power must be +1 or -1");
}

double Map1D::deriv(double x) const { return eval_deriv(spec_, x); }

}  // namespace basinlab::maps1d
