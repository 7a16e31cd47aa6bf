#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace basinlab {

/// A system or map could not be built because a required hypothesis failed.
/// `hypothesis()` names the violated inequality.
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(std::string hypothesis, const std::string& detail)
      : std::runtime_error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// Iterative numerics failed (inverse evaluation, stationary iteration).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Configuration problems, all of them at once.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors, bool construction = false)
      : std::runtime_error(join(errors)), errors_(std::move(errors)), construction_(construction) {}
  const std::vector<std::string>& errors() const noexcept { return errors_; }
  /// True when the only problems are failed construction hypotheses.
  bool construction() const noexcept { return construction_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out;
    for (const auto& e : errors) {
      if (!out.empty()) out += "; ";
      out += e;
    }
    return out;
  }
  std::vector<std::string> errors_;
  bool construction_ = false;
};

}  // namespace basinlab
