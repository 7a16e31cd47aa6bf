#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "basinlab/flows.hpp"
#include "basinlab/maps1d.hpp"
#include "basinlab/symbolic.hpp"

namespace basinlab::skew {

enum class Preset {
  Kan,
  Thm2Walk,
  Thm3FlowTime,
  Thm4Multi,
  Thm5Ifs,
  Thick41,
  Thick42Walk,
  Thick431Alt,
  Thick432Product,
  FlowExample7,
  FlowThm8,
};

using ParamMap = std::map<std::string, double>;

struct ParamInfo {
  std::string name;
  double default_value;
  std::string help;
  bool integer = false;
};

struct PresetInfo {
  std::string name;
  Preset preset;
  std::string summary;
  std::vector<ParamInfo> params;
  /// Parameter overrides under which a construction check must fail.
  ParamMap counterexample;
};

const std::vector<PresetInfo>& presets();
/// Throws std::invalid_argument for an unknown name.
const PresetInfo& preset_info(const std::string& name);
/// Problems with a parameter map (unknown keys, non-integers); empty if fine.
std::vector<std::string> check_param_names(const PresetInfo& info, const ParamMap& params);

/// A candidate attractor: a fiber point with capture radius, or a fiber box.
struct CatalogEntry {
  enum class Kind { Point, Box };
  std::string name;
  Kind kind = Kind::Point;
  std::array<double, 2> center{};
  double radius = 1e-3;
  std::array<double, 4> box{};  // x_lo, x_hi, y_lo, y_hi
};

enum class BaseKind { Expanding, Walk, Shift, Suspension };

/// Everything one trajectory needs. Random symbols are pure functions of the
/// stream keys and an index, so a state is self-contained and copyable.
struct SystemState {
  std::uint64_t base = 0;              // expanding base, u = base / 2⁶⁴
  flows::SuspensionPoint suspension{};  // suspension base
  std::array<double, 2> fiber{};
  std::int64_t cursor = 0;             // position of ω₀ in the two-sided word(s)
  std::uint64_t steps = 0;
  std::int64_t S = 0;                  // Σ η over consumed signs
  double s_acc = 0.0;                  // Σ s(u_k, x_k) for flow-time fibers
  std::array<std::uint64_t, 4> keys{};  // ω, ζ, η, ξ streams
};

/// Coordinates that may be pinned when creating a start state; the rest are
/// drawn uniformly from the key.
struct StartSpec {
  std::optional<double> base;  // u for expanding bases, roof phase s for suspensions
  std::optional<double> x;
  std::optional<double> y;
};

struct LyapunovEstimate {
  double value;
  double stderr_;
  std::uint64_t n;
};

class Dynamics;

class SkewSystem {
 public:
  /// Builds a preset with defaults overridden by `params`. Runs every
  /// construction check and throws ConstructionError naming the first one
  /// that fails; std::invalid_argument for unknown names.
  static SkewSystem build(const std::string& preset, const ParamMap& params = {});
  /// Same checks without throwing.
  static std::vector<maps1d::Check> hypothesis_checks(const std::string& preset, const ParamMap& params = {});

  Preset preset() const noexcept { return preset_; }
  const std::string& name() const noexcept { return name_; }
  const ParamMap& params() const noexcept { return params_; }
  double param(const std::string& key) const;
  const std::vector<CatalogEntry>& catalog() const noexcept { return catalog_; }
  const std::vector<maps1d::Check>& checks() const noexcept { return checks_; }
  BaseKind base_kind() const noexcept;
  int fiber_dim() const noexcept;
  bool fiber_circle() const noexcept;

  SystemState start_state(std::uint64_t key, const StartSpec& spec = {}) const;
  void step(SystemState& st) const;
  /// One step; returns log|D_x f| of the fiber map used (log operator norm
  /// for two-dimensional fibers). Not available for the coupled-flow presets.
  double step_tangent(SystemState& st) const;

  /// Index of the catalog entry containing the fiber point, or -1.
  int locate(const SystemState& st) const noexcept;
  bool contains(const CatalogEntry& e, const SystemState& st) const noexcept;

  /// Designed flow time s(u,x) (thm3_flowtime only).
  double s_value(double u, double x) const;

 private:
  SkewSystem() = default;

  Preset preset_{};
  std::string name_;
  ParamMap params_;
  std::vector<CatalogEntry> catalog_;
  std::vector<maps1d::Check> checks_;
  std::shared_ptr<const Dynamics> dyn_;
};

/// Birkhoff average of the log fiber derivative at catalog entry `entry`
/// (a fiber-invariant point) over n steps from a seeded base point; stderr
/// from 100 block means. Kan uses the vectorized log-sum kernel.
LyapunovEstimate fiber_lyapunov(const SkewSystem& sys, std::size_t entry, std::uint64_t n, std::uint64_t seed);

/// Birkhoff average of log|E_p'| along a seeded floating-point E_p orbit.
LyapunovEstimate ep_lyapunov(double p, std::uint64_t n, std::uint64_t seed);

/// χ(η, ω) = (ση, σ^{η₀}ω); η symbols 1 and 0 stand for +1 and -1.
std::pair<symbolic::Word, symbolic::Word> chi_apply(const symbolic::Word& eta, const symbolic::Word& omega);

/// J(x,y,u,v) = (B_p(x,y), B_{1/2}^{±1}(u,v)), forward when x < p.
std::array<double, 4> j_apply(double p, const std::array<double, 4>& pt);

using Point4 = std::array<double, 4>;
/// Standard deviation across `starts` seeded uniform starts of the n-step
/// Birkhoff averages of `observable` under `map`.
double birkhoff_dispersion(const std::function<Point4(const Point4&)>& map,
                           const std::function<double(const Point4&)>& observable, std::size_t starts,
                           std::uint64_t n, std::uint64_t seed, unsigned workers = 1);

}  // namespace basinlab::skew
