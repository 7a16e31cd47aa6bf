#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "basinlab/maps1d.hpp"

namespace basinlab::flows {

/// Named vector fields.
///   CircleGradient  ẋ = π sin 2πx on ℝ/ℤ   (p_N = 0 repelling, p_S = 1/2 attracting)
///   TorusGradient   (ẋ, ẏ) = (v(x), v(y)),  v(x) = c_h sin 2πx (1 - β cos 2πx)
///   LinearTest      ẋ = -x on ℝ
enum class Field { CircleGradient, TorusGradient, LinearTest };

struct FlowSpec {
  Field field = Field::CircleGradient;
  double h = 0.01;     // fixed RK4 substep, (0, 0.1]
  double c_h = 3.0;    // torus field amplitude
  double beta = 0.8;   // torus field asymmetry, |β| < 1

  /// Throws ConstructionError on an out-of-range step or parameter.
  void validate() const;
  std::string to_string() const;
};

/// Scalar field value and its derivative. For TorusGradient these are the
/// per-coordinate v and v'.
double field_value(const FlowSpec& spec, double x) noexcept;
double field_deriv(const FlowSpec& spec, double x) noexcept;

/// Number of RK4 substeps used for time t: ceil(|t| / h).
std::uint64_t substeps(const FlowSpec& spec, double t) noexcept;

/// φ_t(x) for the scalar fields (circle results wrapped into [0,1)).
double integrate(const FlowSpec& spec, double x, double t);
/// φ_t for TorusGradient.
std::array<double, 2> integrate(const FlowSpec& spec, std::array<double, 2> p, double t);

struct Tangent {
  double x;
  double dx;  // ∂φ_t/∂x
};
/// φ_t(x) together with its spatial derivative (variational equation).
Tangent integrate_tangent(const FlowSpec& spec, double x, double t);

/// Point of the suspension 𝕋³ of the cat map A = (2,1;1,1). Torus
/// coordinates live on the lattice 2⁻⁶⁴ℤ/ℤ so A and A⁻¹ act exactly.
struct SuspensionPoint {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  double s = 0.0;  // roof coordinate in [0,1)

  static SuspensionPoint from(double v1, double v2, double s);
  double v1() const noexcept;
  double v2() const noexcept;
  bool operator==(const SuspensionPoint&) const = default;
};

/// Roof advances at unit speed; each crossing of s = 1 applies A, each
/// crossing of s = 0 backwards applies A⁻¹.
SuspensionPoint suspension_flow(SuspensionPoint pt, double t);

/// Observables on 𝕋³ (and the fiber, for the height-coupled kind).
///   Constant       c
///   CosineRoof     a0 + a1 cos 2πs
///   HeightCoupled  cos 2πs + δ (h(x) - 1/2),  h(x) = (1 - cos 2πx)/2
struct Observable {
  enum class Kind { Constant, CosineRoof, HeightCoupled };
  Kind kind = Kind::Constant;
  double a0 = 1.0;
  double a1 = 0.0;
  double delta = 0.0;

  static Observable constant(double c) { return {Kind::Constant, c, 0.0, 0.0}; }
  static Observable cosine_roof(double a0, double a1) { return {Kind::CosineRoof, a0, a1, 0.0}; }
  static Observable height_coupled(double delta) { return {Kind::HeightCoupled, 0.0, 1.0, delta}; }

  double operator()(const SuspensionPoint& u, double x = 0.5) const noexcept;
  std::string to_string() const;
};

/// Height function h(x) = (1 - cos 2πx)/2 with h(p_N) = 0, h(p_S) = 1.
double height(double x) noexcept;

/// ∫ ζ(u, x) dλ(u) over 𝕋³ by midpoint quadrature (16 × 16 × 256 cells).
double base_mean(const Observable& zeta, double x = 0.5);

/// τ(t) = ∫₀ᵗ η(ψ_s(pt)) ds, composite Simpson on the substep grid.
double tau_accumulate(const Observable& eta, SuspensionPoint pt, double t, double h = 0.01);

struct CoupledState {
  SuspensionPoint base;
  double x = 0.0;
};

/// Advances the base by the suspension flow and the fiber by ẋ = ζ(u,x) f(x)
/// (f the circle field) with shared RK4 substeps of `fiber.h`.
CoupledState coupled_step(const Observable& zeta, const FlowSpec& fiber, CoupledState st, double dt);

/// Hypothesis checks for a coupled system: ζ > 0 on the arc q₁ (roof phases
/// |s| ≤ 1/8 over the fixed point of A) and ζ < 0 on the arc q₂ (|s - 1/2| ≤
/// 1/8), each on a 64 × 64 sample of (phase, x); quadrature signs
/// ∫ζ(u,p_S)dλ > 0 > ∫ζ(u,p_N)dλ.
std::vector<maps1d::Check> zeta_checks(const Observable& zeta);

}  // namespace basinlab::flows
