#include "basinlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "basinlab/errors.hpp"

namespace basinlab::config {

std::string analysis_name(Analysis a) {
  switch (a) {
    case Analysis::BasinGrid: return "basin_grid";
    case Analysis::Lyapunov: return "lyapunov";
    case Analysis::Walk: return "walk";
    case Analysis::Stationary: return "stationary";
    case Analysis::Thickness: return "thickness";
    case Analysis::Flow: return "flow";
    case Analysis::LimitSet: return "limitset";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

/// Field readers append to `errors` and leave the target untouched on failure.
class Reader {
 public:
  Reader(const std::string& section, std::map<std::string, std::string> values, std::vector<std::string>& errors)
      : section_(section), values_(std::move(values)), errors_(errors) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string* raw(const std::string& key) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  void text(const std::string& key, std::string& out, bool required = false) {
    if (const auto* v = raw(key)) {
      out = *v;
    } else if (required) {
      errors_.push_back("[" + section_ + "] missing required key '" + key + "'");
    }
  }

  template <class T>
  void unsigned_int(const std::string& key, T& out, std::uint64_t min = 0,
                    std::uint64_t max = UINT64_MAX) {
    const auto* v = raw(key);
    if (!v) return;
    std::uint64_t parsed = 0;
    if (!parse_u64(*v, parsed)) {
      bad(key, *v, "a non-negative integer");
    } else if (parsed < min || parsed > max) {
      bad(key, *v, "an integer in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
    } else {
      out = static_cast<T>(parsed);
    }
  }

  void real(const std::string& key, double& out, double lo = -INFINITY, double hi = INFINITY, bool open = false) {
    const auto* v = raw(key);
    if (!v) return;
    double parsed = 0;
    if (!parse_real(*v, parsed)) {
      bad(key, *v, "a real number");
    } else if (open ? !(parsed > lo && parsed < hi) : !(parsed >= lo && parsed <= hi)) {
      std::ostringstream os;
      os << "a real number in " << (open ? "(" : "[") << lo << ", " << hi << (open ? ")" : "]");
      bad(key, *v, os.str());
    } else {
      out = parsed;
    }
  }

  void boolean(const std::string& key, bool& out) {
    const auto* v = raw(key);
    if (!v) return;
    if (*v == "true" || *v == "yes" || *v == "1") {
      out = true;
    } else if (*v == "false" || *v == "no" || *v == "0") {
      out = false;
    } else {
      bad(key, *v, "true or false");
    }
  }

  /// Keys present but never read.
  void report_unknown(const std::string& hint = "") {
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) errors_.push_back("[" + section_ + "] unknown key '" + k + "'" + hint);
    }
  }

  void bad(const std::string& key, const std::string& value, const std::string& expected) {
    errors_.push_back("[" + section_ + "] " + key + " = '" + value + "': expected " + expected);
  }

  static bool parse_u64(const std::string& s, std::uint64_t& out) {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
  }

  static bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    is >> out;
    return !is.fail() && is.eof() && std::isfinite(out);
  }

 private:
  std::string section_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
  std::vector<std::string>& errors_;
};

bool parse_coord(const std::string& s, attract::Coord& c) {
  if (s == "base" || s == "u" || s == "s") {
    c = attract::Coord::Base;
  } else if (s == "x") {
    c = attract::Coord::X;
  } else if (s == "y") {
    c = attract::Coord::Y;
  } else {
    return false;
  }
  return true;
}

const std::map<std::string, Analysis>& analysis_names() {
  static const std::map<std::string, Analysis> m{
      {"basin_grid", Analysis::BasinGrid}, {"lyapunov", Analysis::Lyapunov},   {"walk", Analysis::Walk},
      {"stationary", Analysis::Stationary}, {"thickness", Analysis::Thickness}, {"flow", Analysis::Flow},
      {"limitset", Analysis::LimitSet}};
  return m;
}

bool flow_preset(skew::Preset p) { return p == skew::Preset::FlowExample7 || p == skew::Preset::FlowThm8; }

/// Presets an analysis can run on; empty means any.
std::string compatibility_error(Analysis a, skew::Preset p) {
  using skew::Preset;
  switch (a) {
    case Analysis::Lyapunov:
      if (flow_preset(p)) return "lyapunov is not available for the coupled-flow presets";
      break;
    case Analysis::Walk:
      if (p != Preset::Thm2Walk) return "walk needs preset thm2_walk";
      break;
    case Analysis::Stationary:
      if (p != Preset::Thm2Walk && p != Preset::Thick42Walk) return "stationary needs preset thm2_walk or thick42_walk";
      break;
    case Analysis::Thickness:
      if (p != Preset::Thick41 && p != Preset::Thick42Walk) return "thickness needs preset thick41 or thick42_walk";
      break;
    case Analysis::Flow:
      if (!flow_preset(p)) return "flow needs preset flow_example7 or flow_thm8";
      break;
    default:
      break;
  }
  return {};
}

}  // namespace

Sections parse_ini(const std::string& text) {
  Sections out;
  std::vector<std::string> errors;
  std::istringstream is(text);
  std::string line, section;
  bool in_section = false;
  for (int lineno = 1; std::getline(is, line); ++lineno) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        errors.push_back(where + "malformed section header");
        continue;
      }
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      in_section = true;
      out[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    if (!in_section) {
      errors.push_back(where + "key outside of any section");
      continue;
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) {
      errors.push_back(where + "empty key");
      continue;
    }
    if (!out[section].emplace(key, value).second) {
      errors.push_back(where + "duplicate key '" + key + "' in [" + section + "]");
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.source = text;
  auto sections = parse_ini(text);
  std::vector<std::string> errors;

  for (const auto& [name, values] : sections) {
    if (name != "run" && name != "preset" && name != "grid" && name != "analysis") {
      errors.push_back("unknown section [" + name + "]");
    }
  }

  Reader run("run", sections["run"], errors);
  run.text("preset", cfg.preset, true);
  std::string analysis = "basin_grid";
  run.text("analysis", analysis);
  const auto an = analysis_names().find(analysis);
  const bool analysis_ok = an != analysis_names().end();
  if (analysis_ok) {
    cfg.analysis = an->second;
  } else {
    run.bad("analysis", analysis, "one of basin_grid, lyapunov, walk, stationary, thickness, flow, limitset");
  }
  run.unsigned_int("seed", cfg.seed);
  run.unsigned_int("samples", cfg.samples, 1);
  run.unsigned_int("horizon", cfg.horizon, 1);
  run.unsigned_int("dwell", cfg.dwell, 1, UINT32_MAX);
  run.unsigned_int("workers", cfg.workers, 0, 4096);
  run.text("output", cfg.output_dir);
  std::string pgm = "binary";
  run.text("pgm", pgm);
  if (pgm == "binary" || pgm == "ascii") {
    cfg.pgm_binary = pgm == "binary";
  } else {
    run.bad("pgm", pgm, "binary or ascii");
  }
  if (cfg.dwell > cfg.horizon) errors.push_back("[run] dwell must not exceed horizon");
  run.report_unknown();

  // Preset and parameters.
  const skew::PresetInfo* info = nullptr;
  if (!cfg.preset.empty()) {
    try {
      info = &skew::preset_info(cfg.preset);
    } catch (const std::invalid_argument&) {
      std::string names;
      for (const auto& p : skew::presets()) names += (names.empty() ? "" : ", ") + p.name;
      errors.push_back("[run] unknown preset '" + cfg.preset + "' (known: " + names + ")");
    }
  }
  Reader preset("preset", sections["preset"], errors);
  if (info) {
    for (const auto& pi : info->params) {
      if (!preset.has(pi.name)) continue;
      double v = pi.default_value;
      preset.real(pi.name, v);
      cfg.params[pi.name] = v;
    }
    preset.report_unknown(" for preset " + info->name);
    for (const auto& e : skew::check_param_names(*info, cfg.params)) errors.push_back("[preset] " + e);
  }

  // Grid axes: axisN = coord lo hi cells.
  Reader grid("grid", sections["grid"], errors);
  for (int i = 0; i < 2; ++i) {
    const std::string key = "axis" + std::to_string(i);
    const auto* v = grid.raw(key);
    if (!v) continue;
    std::istringstream is(*v);
    is.imbue(std::locale::classic());
    std::string coord;
    attract::Axis ax{};
    std::string rest;
    if (!(is >> coord >> ax.lo >> ax.hi >> ax.cells) || (is >> rest) || !parse_coord(coord, ax.coord)) {
      grid.bad(key, *v, "'<base|x|y> <lo> <hi> <cells>'");
      continue;
    }
    if (!(ax.hi > ax.lo) || ax.lo < 0.0 || ax.hi > 1.0 || ax.cells == 0 || ax.cells > 4096) {
      grid.bad(key, *v, "0 <= lo < hi <= 1 and 1 <= cells <= 4096");
      continue;
    }
    if (info && ax.coord == attract::Coord::Y) {
      const auto sys_dim = info->preset == skew::Preset::Thm4Multi || info->preset == skew::Preset::Thm5Ifs ||
                                   info->preset == skew::Preset::Thick432Product
                               ? 2
                               : 1;
      if (sys_dim < 2) grid.bad(key, *v, "a fiber coordinate of preset " + info->name + " (no y)");
    }
    cfg.grid.axes.push_back(ax);
  }
  if (grid.has("axis1") && !grid.has("axis0")) errors.push_back("[grid] axis1 given without axis0");
  grid.report_unknown();

  // Analysis options.
  Reader opt("analysis", sections["analysis"], errors);
  if (analysis_ok) {
    switch (cfg.analysis) {
      case Analysis::BasinGrid: {
        std::string pair;
        opt.text("pair", pair);
        if (!pair.empty()) cfg.pair = split(pair, ',');
        if (!cfg.pair.empty() && cfg.pair.size() != 2) opt.bad("pair", pair, "two catalog entry names");
        if (cfg.grid.axes.empty()) errors.push_back("[grid] basin_grid needs at least axis0");
        break;
      }
      case Analysis::Lyapunov:
        opt.unsigned_int("steps", cfg.steps, 100);
        break;
      case Analysis::Walk: {
        std::string starts;
        opt.text("starts", starts);
        if (!starts.empty()) {
          cfg.starts.clear();
          for (const auto& s : split(starts, ',')) {
            double v = 0;
            if (!Reader::parse_real(s, v) || !(v > 0.0 && v < 1.0) || v == 0.5) {
              opt.bad("starts", starts, "a comma-separated list of points in (0,1) other than 0.5");
              cfg.starts.clear();
              break;
            }
            cfg.starts.push_back(v);
          }
        }
        opt.unsigned_int("sites", cfg.chain_sites, 2, 1000);
        std::string drift;
        opt.text("drift_sites", drift);
        if (!drift.empty()) {
          const auto parts = split(drift, ',');
          std::uint64_t a = 0, b = 0;
          if (parts.size() != 2 || !Reader::parse_u64(parts[0], a) || !Reader::parse_u64(parts[1], b) || a < 2 ||
              b > 1000 || a >= b) {
            opt.bad("drift_sites", drift, "'M1, M2' with 2 <= M1 < M2 <= 1000");
          } else {
            cfg.drift_sites = {static_cast<int>(a), static_cast<int>(b)};
          }
        }
        opt.boolean("oracle", cfg.oracle);
        break;
      }
      case Analysis::Stationary:
        opt.unsigned_int("sites", cfg.sites, 3, 100000);
        opt.unsigned_int("depth", cfg.cylinder_depth, 0, 12);
        opt.text("profile", cfg.profile);
        if (cfg.profile == "constant") {
          opt.real("p", cfg.profile_param, 0.0, 1.0, true);
        } else if (cfg.profile == "cosine") {
          cfg.profile_param = 0.2;
          opt.real("b", cfg.profile_param, 0.0, 0.5, true);
        } else if (cfg.profile != "preset") {
          opt.bad("profile", cfg.profile, "preset, constant or cosine");
        }
        break;
      case Analysis::Thickness:
        opt.unsigned_int("words", cfg.words, 2);
        opt.unsigned_int("depth", cfg.pullback_depth, 40, 100000);
        opt.unsigned_int("probe_balls", cfg.probe_balls, 0, 1000000);
        opt.real("margin", cfg.margin, 0.0, 0.5);
        break;
      case Analysis::Flow:
        opt.real("t", cfg.flow_time, 0.0, 1e6, true);
        opt.real("tau_t", cfg.tau_time, 0.0, 1e7, true);
        break;
      case Analysis::LimitSet:
        opt.unsigned_int("steps", cfg.steps, 2);
        opt.unsigned_int("burn_in", cfg.burn_in);
        opt.unsigned_int("orbits", cfg.orbits, 1, 10000000);
        opt.unsigned_int("cells", cfg.cells, 1, 4096);
        opt.real("threshold", cfg.threshold, 0.0, 1.0);
        if (cfg.burn_in >= cfg.steps) errors.push_back("[analysis] burn_in must be below steps");
        if (cfg.samples < 1000) errors.push_back("[run] limitset needs samples >= 1000");
        break;
    }
    opt.report_unknown(" for analysis " + analysis_name(cfg.analysis));
    if (info) {
      const auto why = compatibility_error(cfg.analysis, info->preset);
      if (!why.empty()) errors.push_back("[run] " + why);
    }
  }

  if (!errors.empty()) throw ConfigError(errors);

  // Construction hypotheses, run only for otherwise valid documents.
  std::vector<std::string> failed;
  cfg.checks = skew::SkewSystem::hypothesis_checks(cfg.preset, cfg.params);
  for (const auto& c : cfg.checks) {
    if (!c.pass) {
      std::ostringstream os;
      os << "hypothesis '" << c.name << "' fails for preset " << cfg.preset << " (witness " << c.witness << ")";
      failed.push_back(os.str());
    }
  }
  if (!failed.empty()) throw ConfigError(failed, true);

  if (cfg.analysis == Analysis::BasinGrid) {
    const auto sys = skew::SkewSystem::build(cfg.preset, cfg.params);
    std::vector<std::string> names;
    for (const auto& e : sys.catalog()) names.push_back(e.name);
    if (cfg.pair.empty()) {
      cfg.pair = {names.at(0), names.at(1)};
    } else {
      for (const auto& p : cfg.pair) {
        if (std::find(names.begin(), names.end(), p) == names.end()) {
          errors.push_back("[analysis] pair entry '" + p + "' is not in the catalog of " + cfg.preset);
        }
      }
      if (cfg.pair[0] == cfg.pair[1]) errors.push_back("[analysis] pair entries must differ");
    }
    if (cfg.samples < 50) errors.push_back("[run] basin_grid needs samples >= 50");
  }
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace basinlab::config
