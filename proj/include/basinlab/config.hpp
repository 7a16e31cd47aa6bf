#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "basinlab/attract.hpp"
#include "basinlab/maps1d.hpp"
#include "basinlab/skew.hpp"

namespace basinlab::config {

enum class Analysis { BasinGrid, Lyapunov, Walk, Stationary, Thickness, Flow, LimitSet };

std::string analysis_name(Analysis a);

/// Sectioned key/value text:
///
///   # comment            ; comment
///   [section]
///   key = value
///
/// Keys are unique within a section. Values run to end of line with
/// surrounding whitespace trimmed.
using Sections = std::map<std::string, std::map<std::string, std::string>>;
/// Throws ConfigError listing every syntax problem.
Sections parse_ini(const std::string& text);

struct RunConfig {
  std::string preset;
  skew::ParamMap params;  // explicit overrides only
  Analysis analysis = Analysis::BasinGrid;
  attract::GridSpec grid;
  std::uint64_t samples = 200;
  std::uint64_t horizon = 100000;
  std::uint32_t dwell = 100;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  unsigned workers = 0;  // 0 = all available
  bool pgm_binary = true;

  // [analysis] options; which ones apply depends on the analysis.
  std::vector<std::string> pair;          // basin_grid: entries compared for intermingledness
  std::uint64_t steps = 100000;           // lyapunov, limitset
  std::vector<double> starts{0.25};       // walk
  int chain_sites = 50;                   // walk: M
  std::vector<int> drift_sites{40, 60};   // walk
  bool oracle = true;                     // walk
  std::size_t sites = 64;                 // stationary
  int cylinder_depth = 3;                 // stationary
  std::size_t pullback_depth = 60;        // thickness
  std::string profile = "preset";         // stationary: preset | constant | cosine
  double profile_param = 0.5;             // constant p or cosine b
  std::uint64_t words = 10000;            // thickness
  std::size_t probe_balls = 0;            // thickness
  double margin = 1e-6;                   // thickness probe
  double flow_time = 100.0;               // flow
  double tau_time = 10000.0;              // flow
  std::uint64_t burn_in = 1000;           // limitset
  std::size_t orbits = 100;               // limitset occupancy orbits
  std::size_t cells = 32;                 // limitset occupancy cells per fiber axis
  double threshold = 1e-4;                // limitset occupancy threshold

  /// Construction checks evaluated while parsing (all passed).
  std::vector<maps1d::Check> checks;
  /// The document as given.
  std::string source;
};

/// Parses and validates. Throws ConfigError with every problem found; the
/// error's construction() flag is set when the document is otherwise fine
/// and only preset hypotheses fail.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace basinlab::config
