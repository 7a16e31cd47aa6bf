#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "basinlab/maps1d.hpp"
#include "basinlab/rng.hpp"

namespace basinlab::randomwalk {

/// Position-dependent probability p(x) of the step η = +1.
class ProbProfile {
 public:
  enum class Kind { Constant, Cosine, PiecewiseLinear };

  static ProbProfile constant(double p);
  /// p(x) = 1/2 - b·cos(2πx), b ∈ (0, 1/2).
  static ProbProfile cosine(double b);
  /// p_l on [0,l], p_r on [r,1], linear in between; p_l > 1/2 > p_r.
  static ProbProfile piecewise_linear(double p_l, double p_r, double l, double r);

  double operator()(double x) const noexcept;
  /// p_{+1}(x) = p(x), p_{-1}(x) = 1 - p(x).
  double signed_prob(int eta, double x) const noexcept {
    const double p = (*this)(x);
    return eta > 0 ? p : 1.0 - p;
  }
  Kind kind() const noexcept { return kind_; }
  std::string to_string() const;

 private:
  ProbProfile(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}
  Kind kind_;
  std::vector<double> params_;
};

struct Step {
  int eta;
  double x;
};

/// One step of x_{n+1} = f^{η_n}(x_n); consumes exactly one uniform variate.
Step walk_step(const maps1d::Map1D& f, const ProbProfile& p, double x, CounterStream& stream);

/// ζ_x([a_0 ... a_k]) for a sign word (entries ±1).
double zeta_cylinder(const maps1d::Map1D& f, const ProbProfile& p, double x, std::span<const int> signs);

enum class Boundary { Absorbing, Cyclic };

/// Nearest-neighbour chain. up[i] is the weight from site i toward i+1; the
/// remaining 1 - up[i] goes toward i-1. With absorbing boundary the first and
/// last sites are traps.
struct DiscreteChain {
  std::vector<double> coords;
  std::vector<double> up;
  Boundary boundary = Boundary::Absorbing;

  std::size_t size() const noexcept { return coords.size(); }
};

/// Sites f^n(x0), n ∈ [-M, M], absorbing ends. Site index of x0 is M.
DiscreteChain build_orbit_chain(const maps1d::Map1D& f, const ProbProfile& p, double x0, int M);

/// Cyclic chain on coordinates i/N where f acts as the rotation i -> i+1.
DiscreteChain rotation_chain(const ProbProfile& p, std::size_t sites);

/// Probability of absorption at the last site from every site (P[0] = 0,
/// P[last] = 1), by a tridiagonal solve.
std::vector<double> absorption_solve(const DiscreteChain& chain);

/// One application of the discretized stationarity operator,
///   (Tm)(i) = up[i-1]·m(i-1) + (1 - up[i+1])·m(i+1)   (cyclic indices).
std::vector<double> transfer(const DiscreteChain& chain, std::span<const double> m);

struct StationaryMeasure {
  std::vector<double> mass;
  double residual;  // ||Tm - m||_1
  std::size_t sweeps;
};

/// Fixed point of `transfer` on a cyclic chain. Iterates the lazy operator
/// (m + Tm)/2, which has the same fixed points and does not oscillate on
/// bipartite cycles. Throws NumericalError if the residual stays above `tol`.
StationaryMeasure stationary_power_iteration(const DiscreteChain& chain, double tol = 1e-12,
                                             std::size_t max_sweeps = 100000);

struct PropositionResiduals {
  double stat_residual;  // L1 defect of the stationarity equation
  double inv_residual;   // max |μ_m(G⁻¹(C×I)) - μ_m(C×I)| over cylinders of depth ≤ d and sites I
};

/// Checks both sides of "m stationary ⇔ μ_m invariant" on a cyclic chain.
/// μ_m on product sets is evaluated exactly through the ζ recursion.
PropositionResiduals verify_proposition(const DiscreteChain& chain, std::span<const double> m, int depth);

struct AbsorptionEstimate {
  std::uint64_t upper = 0;   // absorbed at the last site / +M end
  std::uint64_t trials = 0;
  double frequency() const noexcept { return trials ? static_cast<double>(upper) / static_cast<double>(trials) : 0.0; }
};

/// Monte Carlo on the chain itself: walk from `start` until absorbed.
AbsorptionEstimate monte_carlo_chain(const DiscreteChain& chain, std::size_t start, std::uint64_t trials,
                                     std::uint64_t seed, unsigned workers = 1);

/// Monte Carlo with walk_step on the map: the orbit index n is tracked
/// alongside x and the walk stops when |n| reaches M.
AbsorptionEstimate monte_carlo_orbit(const maps1d::Map1D& f, const ProbProfile& p, double x0, int M,
                                     std::uint64_t trials, std::uint64_t seed, unsigned workers = 1);

}  // namespace basinlab::randomwalk
