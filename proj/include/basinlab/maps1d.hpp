#pragma once

#include <string>
#include <vector>

namespace basinlab::maps1d {

enum class Family { NorthSouth, KanFiber, ThickF0, ThickF1, AltF0, AltF1, PhiShift };
enum class Domain { Interval, Circle };

std::string family_name(Family f);

/// Family identifier plus its numeric parameters, in the order
///   NorthSouth(a) KanFiber(u) ThickF0(c0) ThickF1(l,r,c1) AltF0(m,c0)
///   AltF1(l,r,c1) PhiShift(c,sign)
struct MapSpec {
  Family family;
  std::vector<double> params;

  static MapSpec north_south(double a) { return {Family::NorthSouth, {a}}; }
  static MapSpec kan_fiber(double u) { return {Family::KanFiber, {u}}; }
  static MapSpec thick_f0(double c0) { return {Family::ThickF0, {c0}}; }
  static MapSpec thick_f1(double l, double r, double c1) { return {Family::ThickF1, {l, r, c1}}; }
  static MapSpec alt_f0(double m, double c0) { return {Family::AltF0, {m, c0}}; }
  static MapSpec alt_f1(double l, double r, double c1) { return {Family::AltF1, {l, r, c1}}; }
  static MapSpec phi_shift(double c, int sign) { return {Family::PhiShift, {c, static_cast<double>(sign)}}; }

  std::string to_string() const;
};

struct Check {
  std::string name;
  bool pass;
  double witness;
};

struct ValidationReport {
  std::string family;
  std::vector<Check> checks;

  bool passed() const noexcept;
  /// First failed check, or nullptr.
  const Check* first_failure() const noexcept;
  std::string render() const;
  void append(const ValidationReport& other);
};

/// Single-map checks: parameter ranges, strict monotonicity on a 10⁴-point
/// grid, designed fixed points and the sign pattern of f(x) - x.
ValidationReport validate_family(const MapSpec& spec);

/// Pair checks for the thick attractor/repeller IFS: both single-map reports,
/// f0'(0)f1'(0) > 1, f0'(1)f1'(1) < 1, and I_l, I_r endpoint images.
ValidationReport validate_thick_pair(const MapSpec& f0, const MapSpec& f1);

/// Pair checks for the two-thick-attractor IFS: derivative products > 1 at both
/// ends, I_l forward invariant, I_r forward invariant.
ValidationReport validate_alt_pair(const MapSpec& f0, const MapSpec& f1);

/// A validated orientation-preserving diffeomorphism of [0,1] or ℝ/ℤ.
class Map1D {
 public:
  /// Throws ConstructionError naming the first failed check.
  explicit Map1D(MapSpec spec);

  static Map1D north_south(double a) { return Map1D(MapSpec::north_south(a)); }
  static Map1D kan_fiber(double u) { return Map1D(MapSpec::kan_fiber(u)); }
  static Map1D thick_f0(double c0) { return Map1D(MapSpec::thick_f0(c0)); }
  static Map1D thick_f1(double l, double r, double c1) { return Map1D(MapSpec::thick_f1(l, r, c1)); }
  static Map1D alt_f0(double m, double c0) { return Map1D(MapSpec::alt_f0(m, c0)); }
  static Map1D alt_f1(double l, double r, double c1) { return Map1D(MapSpec::alt_f1(l, r, c1)); }
  static Map1D phi_shift(double c, int sign) { return Map1D(MapSpec::phi_shift(c, sign)); }

  /// power = +1 evaluates the map, -1 its inverse.
  double apply(double x, int power) const;
  double deriv(double x) const;
  /// Derivative of the inverse map at x.
  double inverse_deriv(double x) const { return 1.0 / deriv(apply(x, -1)); }

  const MapSpec& spec() const noexcept { return spec_; }
  Family family() const noexcept { return spec_.family; }
  Domain domain() const noexcept;
  const ValidationReport& report() const noexcept { return report_; }

 private:
  MapSpec spec_;
  ValidationReport report_;
};

// Raw family formulas. No validation; used by the validators and by callers
// that already hold a validated spec.
double eval(const MapSpec& spec, double x);
double eval_deriv(const MapSpec& spec, double x);
/// Inverse by closed form (quadratic families) or safeguarded Newton
/// (tolerance 1e-12, at most 60 iterations). Throws NumericalError.
double eval_inverse(const MapSpec& spec, double y);

}  // namespace basinlab::maps1d
