// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "basinlab/attract.hpp"
#include "basinlab/errors.hpp"
#include "basinlab/flows.hpp"
#include "basinlab/maps1d.hpp"
#include "basinlab/parallel.hpp"
#include "basinlab/randomwalk.hpp"
#include "basinlab/rng.hpp"
#include "basinlab/skew.hpp"
#include "basinlab/stats.hpp"
#include "basinlab/symbolic.hpp"

using namespace basinlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t index_of(const skew::SkewSystem& sys, const std::string& name) {
  for (std::size_t i = 0; i < sys.catalog().size(); ++i) {
    if (sys.catalog()[i].name == name) return i;
  }
  throw std::runtime_error("missing catalog entry " + name);
}

// Every count of n uniform points in `counts.size()` equal cells within 4σ.
bool grid_uniform(const std::vector<std::uint64_t>& counts, std::uint64_t n, double& worst_z) {
  const double p = 1.0 / static_cast<double>(counts.size());
  const double mean = static_cast<double>(n) * p;
  const double sigma = std::sqrt(mean * (1.0 - p));
  worst_z = 0.0;
  for (auto c : counts) worst_z = std::max(worst_z, std::fabs(static_cast<double>(c) - mean) / sigma);
  return worst_z < 4.0;
}

double circle_dist(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

unsigned workers() { return default_workers(); }

// 1. Kan basins are intermingled on a 16 x 16 grid.
Outcome kan_intermingled() {
  const auto sys = skew::SkewSystem::build("kan", {{"radius", 1e-6}});
  attract::GridSpec grid{{{attract::Coord::Base, 0.0, 1.0, 16}, {attract::Coord::X, 0.1, 0.9, 16}}};
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = attract::basin_grid(sys, grid, 200, {100000, 100}, 1, workers());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto v = attract::intermingled_verdict(report, index_of(sys, "lower"), index_of(sys, "upper"));
  const bool ok = v.global == attract::Verdict::Pass && v.margin >= 0.01;
  return {ok, "verdict " + attract::verdict_name(v.global) + ", margin " + fmt("%.4f", v.margin) + " (>= 0.01), " +
                  fmt("%.1f s", secs) + " on " + std::to_string(workers()) + " worker(s)"};
}

// 2. thm2 walk classification against the absorbing orbit chain.
Outcome thm2_oracle() {
  const auto sys = skew::SkewSystem::build("thm2_walk");
  const auto f = maps1d::Map1D::north_south(0.1);
  const auto p = randomwalk::ProbProfile::cosine(0.2);
  const double x0 = 0.25;
  const std::uint64_t trials = 10000;
  auto solve = [&](int M) {
    return randomwalk::absorption_solve(randomwalk::build_orbit_chain(f, p, x0, M))[static_cast<std::size_t>(M)];
  };
  const double P = solve(50);
  const double drift = std::fabs(solve(60) - solve(40));
  const double sigma = stats::binomial_sigma(P, trials);

  const std::size_t south = index_of(sys, "p_S");
  std::vector<int> ids(trials);
  skew::StartSpec spec;
  spec.x = x0;
  parallel_for(trials, workers(), [&](std::size_t t) {
    ids[t] = attract::classify_orbit(sys, sys.start_state(derive_key(2, 0xb5, t), spec), {100000, 100}).id;
  });
  const auto hits = static_cast<double>(std::count(ids.begin(), ids.end(), static_cast<int>(south)));
  const double freq = hits / static_cast<double>(trials);
  const auto orbit = randomwalk::monte_carlo_orbit(f, p, x0, 50, trials, 3, workers());
  const double z_basin = (freq - P) / sigma, z_orbit = (orbit.frequency() - P) / sigma;
  const bool ok = std::fabs(z_basin) < 3 && std::fabs(z_orbit) < 3 && drift < 1e-3;
  return {ok, "P=" + fmt("%.5f", P) + ", basin frequency " + fmt("%.5f", freq) + " (z=" + fmt("%.2f", z_basin) +
                  "), orbit-chain frequency " + fmt("%.5f", orbit.frequency()) + " (z=" + fmt("%.2f", z_orbit) +
                  "), drift M=40->60 " + fmt("%.2e", drift)};
}

// 3. Stationarity of m and invariance of the induced measure hold together.
Outcome proposition() {
  bool ok = true;
  std::ostringstream d;
  for (const auto& [name, prof] : {std::pair{"Constant(0.5)", randomwalk::ProbProfile::constant(0.5)},
                                   std::pair{"Cosine(0.2)", randomwalk::ProbProfile::cosine(0.2)}}) {
    const auto chain = randomwalk::rotation_chain(prof, 64);
    const auto m = randomwalk::stationary_power_iteration(chain);
    const auto good = randomwalk::verify_proposition(chain, m.mass, 3);
    auto bad = m.mass;
    for (std::size_t i = 0; i < bad.size(); ++i) bad[i] *= i % 2 ? 1.01 : 0.99;
    const auto r = randomwalk::verify_proposition(chain, bad, 3);
    ok = ok && good.stat_residual < 1e-12 && good.inv_residual < 1e-10 && r.stat_residual > 1e-4 &&
         r.inv_residual > 1e-4;
    d << name << ": stat " << fmt("%.1e", good.stat_residual) << " inv " << fmt("%.1e", good.inv_residual)
      << ", perturbed " << fmt("%.1e", r.stat_residual) << "/" << fmt("%.1e", r.inv_residual) << "; ";
  }
  std::string s = d.str();
  s.resize(s.size() - 2);
  return {ok, s};
}

// 4. Fiber Lyapunov exponents against their analytic values.
Outcome lyapunov() {
  const auto thm3 = skew::SkewSystem::build("thm3_flowtime");
  const auto a = skew::fiber_lyapunov(thm3, index_of(thm3, "p_S"), 100000, 1);
  const double a_ref = -2 * std::numbers::pi * std::numbers::pi * 0.1;
  const bool ok_a = std::fabs(a.value - a_ref) <= 0.05 * std::fabs(a_ref);

  const auto kan = skew::SkewSystem::build("kan");
  const auto b = skew::fiber_lyapunov(kan, index_of(kan, "lower"), 10000000, 1);
  const double b_ref = std::log((1 + std::sqrt(1 - 1.0 / 1024)) / 2);
  const bool ok_b = std::fabs(b.value - b_ref) <= 3 * b.stderr_;

  const auto c = skew::ep_lyapunov(1.0 / 3.0, 1000000, 1);
  const double c_ref = 0.6365;
  const bool ok_c = std::fabs(c.value - c_ref) <= 0.02 * c_ref;
  return {ok_a && ok_b && ok_c, "thm3 p_S " + fmt("%.4f", a.value) + " vs " + fmt("%.4f", a_ref) + " (5%); Kan " +
                                    fmt("%.4e", b.value) + " vs " + fmt("%.4e", b_ref) + " (|d|=" +
                                    fmt("%.2e", std::fabs(b.value - b_ref)) + ", 3se=" + fmt("%.2e", 3 * b.stderr_) +
                                    "); E_1/3 " + fmt("%.4f", c.value) + " vs 0.6365 (2%)"};
}

// 5. Pullback thickness of the default pair.
Outcome thickness() {
  const auto sys = skew::SkewSystem::build("thick41");
  const double l = sys.param("l");
  const auto f0 = maps1d::Map1D::thick_f0(sys.param("c0"));
  const auto f1 = maps1d::Map1D::thick_f1(l, sys.param("r"), sys.param("c1"));
  const auto e60 = attract::thickness_estimate(f0, f1, 10000, 60, 5, workers());
  const auto e120 = attract::thickness_estimate(f0, f1, 10000, 120, 5, workers());
  const double stable = std::fabs(e120.mean - e60.mean);
  const bool ok = e60.positive_fraction >= 0.99 && stable <= 1e-4 && e60.ci.lo > 0.0 && e60.ci.hi < l &&
                  e60.monotone && e120.monotone;
  return {ok, "positive " + fmt("%.4f", e60.positive_fraction) + ", mean " + fmt("%.5f", e60.mean) + " (depth 120: " +
                  fmt("%.5f", e120.mean) + ", |d|=" + fmt("%.1e", stable) + "), 99% CI [" + fmt("%.5f", e60.ci.lo) +
                  ", " + fmt("%.5f", e60.ci.hi) + "] in (0, " + fmt("%.2f", l) + "), monotone " +
                  (e60.monotone && e120.monotone ? "yes" : "no")};
}

// 6. Thick42 walk: little time in (l, r), both thick attractors everywhere.
Outcome thick42() {
  const auto sys = skew::SkewSystem::build("thick42_walk", {{"p_l", 0.7}, {"p_r", 0.3}});
  const double l = sys.param("l"), r = sys.param("r");
  const auto occ = attract::min_attractor_support(sys, 10000, 2000, 1000, 64, 6, workers(), std::make_pair(0.35, 0.65));
  const double inside = occ.fraction_between(l, r);

  attract::GridSpec grid{{{attract::Coord::X, 0.35, 0.65, 6}}};
  const auto report = attract::basin_grid(sys, grid, 1667, {2000, 100}, 6, workers());
  const std::size_t il = index_of(sys, "Lambda_l"), ir = index_of(sys, "Lambda_r");
  double min_l = 1.0, min_r = 1.0;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    min_l = std::min(min_l, report.fraction(c, il));
    min_r = std::min(min_r, report.fraction(c, ir));
  }
  const bool ok = inside < 0.05 && min_l >= 0.02 && min_r >= 0.02;
  return {ok, "occupancy in (l,r) " + fmt("%.4f", inside) + " (< 0.05); min cell frequency Lambda_l " +
                  fmt("%.3f", min_l) + ", Lambda_r " + fmt("%.3f", min_r) + " (>= 0.02) over 6 cells of width 0.05"};
}

// 7. Flow layer: time change, tau rate, volume.
Outcome flow_layer() {
  const auto sys = skew::SkewSystem::build("flow_example7");
  const flows::FlowSpec fiber{flows::Field::CircleGradient, sys.param("h")};
  const auto eta = flows::Observable::cosine_roof(sys.param("a0"), sys.param("a1"));
  CounterStream rng(derive_key(7, 1));
  // By t=100 every start has settled at p_S; t=3 also checks orbits in transit.
  double worst = 0.0, worst_transit = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto base = flows::SuspensionPoint::from(rng.uniform(), rng.uniform(), rng.uniform());
    const double x0 = rng.uniform();
    for (double t : {3.0, 100.0}) {
      const double direct = flows::coupled_step(eta, fiber, {base, x0}, t).x;
      const double changed = flows::integrate(fiber, x0, flows::tau_accumulate(eta, base, t, fiber.h));
      double& w = t < 100.0 ? worst_transit : worst;
      w = std::max(w, circle_dist(direct, changed));
    }
  }
  const double T = 10000.0;
  const double rate = flows::tau_accumulate(eta, flows::SuspensionPoint::from(0.1, 0.2, 0.3), T, fiber.h) / T;
  const double mean = flows::base_mean(eta);
  const double rel = std::fabs(rate - mean) / std::fabs(mean);

  CounterStream vol(derive_key(7, 2));
  std::vector<std::uint64_t> counts(64, 0);
  const std::uint64_t n = 1000000;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto q =
        flows::suspension_flow(flows::SuspensionPoint::from(vol.uniform(), vol.uniform(), vol.uniform()), 10.0);
    ++counts[static_cast<std::size_t>(q.v1() * 4) + 4 * static_cast<std::size_t>(q.v2() * 4) +
             16 * static_cast<std::size_t>(q.s * 4)];
  }
  double z = 0.0;
  const bool vol_ok = grid_uniform(counts, n, z);
  const bool ok = worst < 1e-4 && worst_transit < 1e-4 && rel < 0.02 && vol_ok;
  return {ok, "time change max error " + fmt("%.2e", worst) + " at t=100 (" + fmt("%.2e", worst_transit) +
                  " at t=3) over 100 starts; tau rate " +
                  fmt("%.5f", rate) + " vs " + fmt("%.5f", mean) + " (" + fmt("%.2f%%", 100 * rel) +
                  "); volume worst |z| " + fmt("%.2f", z)};
}

// 8. Lebesgue invariance of the base models and ergodicity of J.
Outcome measure_models() {
  const std::uint64_t n = 1000000;
  CounterStream rng(derive_key(8, 1));
  std::vector<std::uint64_t> baker(64, 0), ep(16, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto [w, y] = symbolic::baker_apply(0.3, rng.uniform(), rng.uniform(), 1);
    ++baker[static_cast<std::size_t>(w * 8) + 8 * static_cast<std::size_t>(y * 8)];
    ++ep[static_cast<std::size_t>(symbolic::ep_apply(0.3, rng.uniform()) * 16)];
  }
  double zb = 0.0, ze = 0.0;
  const bool ok_b = grid_uniform(baker, n, zb);
  const bool ok_e = grid_uniform(ep, n, ze);
  auto J = [](const skew::Point4& p) { return skew::j_apply(0.6, p); };
  const double disp = skew::birkhoff_dispersion(
      J, [](const skew::Point4& p) { return p[0] < 0.6 ? 1.0 : 0.0; }, 50, 100000, 8, workers());
  return {ok_b && ok_e && disp < 0.01, "baker worst |z| " + fmt("%.2f", zb) + ", E_p worst |z| " + fmt("%.2f", ze) +
                                            " (< 4); J dispersion " + fmt("%.2e", disp) + " (< 0.01)"};
}

// 9. Construction gates for every preset.
Outcome construction_gates() {
  std::vector<std::string> bad;
  for (const auto& p : skew::presets()) {
    bool defaults_pass = true, counter_fails = false, throws = false;
    for (const auto& c : skew::SkewSystem::hypothesis_checks(p.name)) defaults_pass = defaults_pass && c.pass;
    for (const auto& c : skew::SkewSystem::hypothesis_checks(p.name, p.counterexample)) {
      counter_fails = counter_fails || !c.pass;
    }
    try {
      (void)skew::SkewSystem::build(p.name, p.counterexample);
    } catch (const ConstructionError&) {
      throws = true;
    }
    if (!defaults_pass || !counter_fails || !throws || p.counterexample.empty()) bad.push_back(p.name);
  }
  std::string d = std::to_string(skew::presets().size()) + " presets";
  if (!bad.empty()) {
    d += "; wrong gates:";
    for (const auto& b : bad) d += " " + b;
  }
  return {bad.empty(), d};
}

// 10. CLI outputs are byte-identical across repeats and worker counts.
int sh(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const auto root = fs::temp_directory_path() / ("basinlab_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::vector<std::string> mismatched;
  std::size_t compared = 0;
  for (const std::string name : {"kan_small", "thm2_walk"}) {
    const std::string text = slurp(fs::path(BASINLAB_CONFIGS) / (name + ".ini"));
    std::vector<fs::path> outs;
    for (const auto& [tag, w] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"c", 2}}) {
      std::string cfg = text;
      cfg.replace(cfg.find("[run]"), 5, "[run]\nworkers = " + std::to_string(w));
      const auto path = root / (name + "_" + tag + ".ini");
      std::ofstream(path) << cfg;
      outs.push_back(root / (name + "_" + tag));
      const int code = sh(std::string(BASINLAB_CLI) + " run " + path.string() + " --out " + outs.back().string());
      if (code != 0) return {false, name + " run exited with " + std::to_string(code)};
    }
    for (const auto& entry : fs::directory_iterator(outs[0])) {
      const auto file = entry.path().filename();
      const auto ext = file.extension();
      if (ext != ".csv" && ext != ".pgm") continue;
      ++compared;
      const auto ref = slurp(outs[0] / file);
      if (ref != slurp(outs[1] / file) || ref != slurp(outs[2] / file)) mismatched.push_back(name + "/" + file.string());
    }
  }
  fs::remove_all(root);
  std::string d = std::to_string(compared) + " CSV/PGM files compared over 2 repeats and 1 vs 2 workers";
  for (const auto& m : mismatched) d += "; differs: " + m;
  return {mismatched.empty() && compared > 0, d};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{kan_intermingled, thm2_oracle,    proposition,
                                                       lyapunov,         thickness,      thick42,
                                                       flow_layer,       measure_models, construction_gates,
                                                       reproducibility};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu: %s\n", o.pass ? "PASS" : "FAIL", i + 1, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
