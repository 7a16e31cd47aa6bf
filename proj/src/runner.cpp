#include "basinlab/runner.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "basinlab/attract.hpp"
#include "basinlab/errors.hpp"
#include "basinlab/flows.hpp"
#include "basinlab/format.hpp"
#include "basinlab/output.hpp"
#include "basinlab/parallel.hpp"
#include "basinlab/randomwalk.hpp"
#include "basinlab/rng.hpp"
#include "basinlab/simd/kernels.hpp"
#include "basinlab/stats.hpp"

#ifndef BASINLAB_VERSION
#define BASINLAB_VERSION "unknown"
#endif

namespace basinlab::runner {

using config::Analysis;
using config::RunConfig;
using nlohmann::json;

namespace {

std::string csv_comment(const RunConfig& cfg) {
  return "# preset=" + cfg.preset + " seed=" + std::to_string(cfg.seed) +
         " analysis=" + config::analysis_name(cfg.analysis) + "\n";
}

std::size_t catalog_index(const skew::SkewSystem& sys, const std::string& name) {
  const auto& cat = sys.catalog();
  for (std::size_t i = 0; i < cat.size(); ++i) {
    if (cat[i].name == name) return i;
  }
  throw std::invalid_argument("no catalog entry named " + name);
}

struct Context {
  const RunConfig& cfg;
  unsigned workers;
  output::OutputSet& out;
  std::ostringstream& log;
  json& summary;
};

int run_basin_grid(Context& c, const skew::SkewSystem& sys) {
  const auto& cfg = c.cfg;
  const auto report =
      attract::basin_grid(sys, cfg.grid, cfg.samples, {cfg.horizon, cfg.dwell}, cfg.seed, c.workers);
  const auto a = catalog_index(sys, cfg.pair[0]), b = catalog_index(sys, cfg.pair[1]);
  const auto verdict = attract::intermingled_verdict(report, a, b);
  c.out.write("basin.csv", report.to_csv());
  c.out.write("basin.pgm", report.to_pgm(cfg.pgm_binary));
  const auto total = report.total();
  json counts = json::object();
  for (std::size_t i = 0; i < report.names.size(); ++i) counts[report.names[i]] = total.counts[i];
  std::size_t passing = 0;
  for (auto v : verdict.cells) passing += v == attract::Verdict::Pass;
  c.summary["verdict"] = attract::verdict_name(verdict.global);
  c.summary["margin"] = verdict.margin;
  c.summary["pair"] = cfg.pair;
  c.summary["cells_passing"] = passing;
  c.summary["cells"] = verdict.cells.size();
  c.summary["counts"] = counts;
  c.summary["undecided"] = total.undecided;
  c.summary["samples"] = total.samples;
  c.log << "intermingled verdict for " << cfg.pair[0] << "/" << cfg.pair[1] << ": "
        << attract::verdict_name(verdict.global) << " (margin " << format_real(verdict.margin) << ", " << passing
        << "/" << verdict.cells.size() << " cells pass)\n";
  return verdict.global == attract::Verdict::Inconclusive ? kInconclusive : kOk;
}

int run_lyapunov(Context& c, const skew::SkewSystem& sys) {
  std::ostringstream csv;
  csv << csv_comment(c.cfg) << "entry,exponent,stderr,steps,ci99_lo,ci99_hi\n";
  json rows = json::array();
  for (std::size_t i = 0; i < sys.catalog().size(); ++i) {
    const auto& e = sys.catalog()[i];
    if (e.kind != skew::CatalogEntry::Kind::Point) continue;
    const auto est = skew::fiber_lyapunov(sys, i, c.cfg.steps, c.cfg.seed);
    const double half = stats::kZ99 * est.stderr_;
    csv << e.name << ',' << format_real(est.value) << ',' << format_real(est.stderr_) << ',' << est.n << ','
        << format_real(est.value - half) << ',' << format_real(est.value + half) << '\n';
    rows.push_back({{"entry", e.name}, {"exponent", est.value}, {"stderr", est.stderr_}});
    c.log << "fiber exponent at " << e.name << ": " << format_real(est.value) << " ± " << format_real(est.stderr_)
          << "\n";
  }
  c.out.write("lyapunov.csv", csv.str());
  c.summary["exponents"] = rows;
  return kOk;
}

int run_walk(Context& c, const skew::SkewSystem& sys) {
  const auto& cfg = c.cfg;
  const auto f = maps1d::Map1D::north_south(sys.param("a"));
  const auto p = randomwalk::ProbProfile::cosine(sys.param("b"));
  const std::size_t south = catalog_index(sys, "p_S");
  std::ostringstream csv;
  csv << csv_comment(cfg) << "x0,trials,mc_orbit_frequency,mc_basin_frequency,mc_undecided,mc_sigma";
  if (cfg.oracle) csv << ",solve_sites,solve_probability,solve_drift,z_orbit,z_basin";
  csv << '\n';
  json rows = json::array();
  for (std::size_t k = 0; k < cfg.starts.size(); ++k) {
    const double x0 = cfg.starts[k];
    const std::uint64_t seed = derive_key(cfg.seed, 0x3a1c, k);
    const auto orbit = randomwalk::monte_carlo_orbit(f, p, x0, cfg.chain_sites, cfg.samples, seed, c.workers);
    std::vector<int> ids(cfg.samples);
    skew::StartSpec spec;
    spec.x = x0;
    parallel_for(cfg.samples, c.workers, [&](std::size_t t) {
      const auto st = sys.start_state(derive_key(seed, 0xb5, t), spec);
      ids[t] = attract::classify_orbit(sys, st, {cfg.horizon, cfg.dwell}).id;
    });
    std::uint64_t hits = 0, undecided = 0;
    for (int id : ids) {
      hits += id == static_cast<int>(south);
      undecided += id < 0;
    }
    const double n = static_cast<double>(cfg.samples);
    const double basin = static_cast<double>(hits) / n;
    json row{{"x0", x0}, {"mc_orbit_frequency", orbit.frequency()}, {"mc_basin_frequency", basin},
             {"mc_undecided", undecided}};
    csv << format_real(x0) << ',' << cfg.samples << ',' << format_real(orbit.frequency()) << ','
        << format_real(basin) << ',' << undecided;
    if (cfg.oracle) {
      auto solve = [&](int M) {
        return randomwalk::absorption_solve(randomwalk::build_orbit_chain(f, p, x0, M))[static_cast<std::size_t>(M)];
      };
      const double P = solve(cfg.chain_sites);
      const double drift = std::fabs(solve(cfg.drift_sites[1]) - solve(cfg.drift_sites[0]));
      const double sigma = stats::binomial_sigma(P, cfg.samples);
      const double z_orbit = sigma > 0 ? (orbit.frequency() - P) / sigma : 0.0;
      const double z_basin = sigma > 0 ? (basin - P) / sigma : 0.0;
      csv << ',' << format_real(sigma) << ',' << cfg.chain_sites << ',' << format_real(P) << ','
          << format_real(drift) << ',' << format_real(z_orbit) << ',' << format_real(z_basin);
      row["solve_probability"] = P;
      row["solve_drift"] = drift;
      row["z_basin"] = z_basin;
      c.log << "x0=" << format_real(x0) << ": P=" << format_real(P) << " basin frequency " << format_real(basin)
            << " (z=" << format_real(z_basin) << "), drift " << format_real(drift) << "\n";
    } else {
      csv << ',' << format_real(stats::binomial_sigma(basin, cfg.samples));
    }
    csv << '\n';
    rows.push_back(row);
  }
  c.out.write("walk.csv", csv.str());
  c.summary["starts"] = rows;
  return kOk;
}

randomwalk::ProbProfile stationary_profile(const RunConfig& cfg, const skew::SkewSystem& sys) {
  if (cfg.profile == "constant") return randomwalk::ProbProfile::constant(cfg.profile_param);
  if (cfg.profile == "cosine") return randomwalk::ProbProfile::cosine(cfg.profile_param);
  if (sys.preset() == skew::Preset::Thm2Walk) return randomwalk::ProbProfile::cosine(sys.param("b"));
  return randomwalk::ProbProfile::piecewise_linear(sys.param("p_l"), sys.param("p_r"), sys.param("l"),
                                                   sys.param("r"));
}

int run_stationary(Context& c, const skew::SkewSystem& sys) {
  const auto profile = stationary_profile(c.cfg, sys);
  const auto chain = randomwalk::rotation_chain(profile, c.cfg.sites);
  const auto m = randomwalk::stationary_power_iteration(chain);
  const auto res = randomwalk::verify_proposition(chain, m.mass, c.cfg.cylinder_depth);
  std::ostringstream csv;
  csv << csv_comment(c.cfg) << "site,coordinate,mass\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    csv << i << ',' << format_real(chain.coords[i]) << ',' << format_real(m.mass[i]) << '\n';
  }
  c.out.write("stationary.csv", csv.str());
  c.summary["profile"] = profile.to_string();
  c.summary["sweeps"] = m.sweeps;
  c.summary["stat_residual"] = res.stat_residual;
  c.summary["inv_residual"] = res.inv_residual;
  c.log << "stationary measure for " << profile.to_string() << " on " << chain.size() << " sites: " << m.sweeps
        << " sweeps, stationarity residual " << format_real(res.stat_residual) << ", invariance residual "
        << format_real(res.inv_residual) << " (cylinders of depth <= " << c.cfg.cylinder_depth << ")\n";
  return kOk;
}

int run_thickness(Context& c, const skew::SkewSystem& sys) {
  const auto& cfg = c.cfg;
  const auto f0 = maps1d::Map1D::thick_f0(sys.param("c0"));
  const auto f1 = maps1d::Map1D::thick_f1(sys.param("l"), sys.param("r"), sys.param("c1"));
  const auto est = attract::thickness_estimate(f0, f1, cfg.words, cfg.pullback_depth, cfg.seed, c.workers);
  std::ostringstream csv;
  csv << csv_comment(cfg) << "rank,x_l,distribution\n";
  for (std::size_t i = 0; i < est.sorted.size(); ++i) {
    csv << i << ',' << format_real(est.sorted[i]) << ',' << format_real(est.distribution(est.sorted[i])) << '\n';
  }
  c.out.write("thickness.csv", csv.str());
  c.summary["mean"] = est.mean;
  c.summary["mean_ratio"] = est.mean_ratio;
  c.summary["ci99"] = {est.ci.lo, est.ci.hi};
  c.summary["positive_fraction"] = est.positive_fraction;
  c.summary["tail_drift"] = est.tail_drift;
  c.summary["monotone"] = est.monotone;
  c.log << "thickness: E[X_l] = " << format_real(est.mean) << " (ratio to l " << format_real(est.mean_ratio)
        << "), positive fraction " << format_real(est.positive_fraction) << ", tail drift "
        << format_real(est.tail_drift) << "\n";

  if (cfg.probe_balls > 0) {
    std::vector<attract::Ball> balls;
    const std::uint64_t key = derive_key(cfg.seed, 0xba11);
    for (std::size_t b = 0; b < cfg.probe_balls; ++b) {
      const symbolic::LazyWord w(symbolic::BernoulliSpec::binary(0.5), derive_key(key, b, 1));
      const double lo = 0.95 * uniform_at(derive_key(key, b, 2), 0);
      balls.push_back({{w.materialize(0, 5)}, lo, lo + 0.05});
    }
    const auto found = attract::complement_density_probe(f0, f1, balls, cfg.pullback_depth, cfg.seed, cfg.margin);
    std::ostringstream probe;
    probe << csv_comment(cfg) << "ball,cylinder,lo,hi,found\n";
    std::size_t passed = 0;
    for (std::size_t b = 0; b < balls.size(); ++b) {
      passed += found[b];
      probe << b << ',' << balls[b].cylinder.fixed_symbols.to_string() << ',' << format_real(balls[b].lo) << ','
            << format_real(balls[b].hi) << ',' << (found[b] ? 1 : 0) << '\n';
    }
    c.out.write("probe.csv", probe.str());
    c.summary["probe_passed"] = passed;
    c.summary["probe_balls"] = balls.size();
  }
  return kOk;
}

double circle_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

int run_flow(Context& c, const skew::SkewSystem& sys) {
  const auto& cfg = c.cfg;
  const flows::FlowSpec fiber{flows::Field::CircleGradient, sys.param("h")};
  const bool example7 = sys.preset() == skew::Preset::FlowExample7;
  const auto zeta = example7 ? flows::Observable::cosine_roof(sys.param("a0"), sys.param("a1"))
                             : flows::Observable::height_coupled(sys.param("delta"));
  std::ostringstream csv;
  csv << csv_comment(cfg) << "start,v1,v2,s,x0,t,x_coupled";
  if (example7) csv << ",tau,x_time_changed,error";
  csv << '\n';
  std::vector<double> errors(cfg.samples), endpoints(cfg.samples), taus(cfg.samples);
  std::vector<flows::SuspensionPoint> bases(cfg.samples);
  std::vector<double> x0s(cfg.samples);
  parallel_for(cfg.samples, c.workers, [&](std::size_t i) {
    const std::uint64_t key = derive_key(cfg.seed, 0xf10, i);
    bases[i] = flows::SuspensionPoint::from(uniform_at(key, 0), uniform_at(key, 1), uniform_at(key, 2));
    x0s[i] = uniform_at(key, 3);
    endpoints[i] = flows::coupled_step(zeta, fiber, {bases[i], x0s[i]}, cfg.flow_time).x;
    if (example7) {
      taus[i] = flows::tau_accumulate(zeta, bases[i], cfg.flow_time, fiber.h);
      errors[i] = circle_distance(endpoints[i], flows::integrate(fiber, x0s[i], taus[i]));
    }
  });
  double max_error = 0.0;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    csv << i << ',' << format_real(bases[i].v1()) << ',' << format_real(bases[i].v2()) << ','
        << format_real(bases[i].s) << ',' << format_real(x0s[i]) << ',' << format_real(cfg.flow_time) << ','
        << format_real(endpoints[i]);
    if (example7) {
      csv << ',' << format_real(taus[i]) << ',' << format_real(flows::integrate(fiber, x0s[i], taus[i])) << ','
          << format_real(errors[i]);
      max_error = std::max(max_error, errors[i]);
    }
    csv << '\n';
  }
  c.out.write("flow.csv", csv.str());
  if (example7) {
    const double tau_long = flows::tau_accumulate(zeta, bases[0], cfg.tau_time, fiber.h);
    const double quad = flows::base_mean(zeta);
    c.summary["time_change_max_error"] = max_error;
    c.summary["tau_rate"] = tau_long / cfg.tau_time;
    c.summary["eta_mean_quadrature"] = quad;
    c.log << "time change identity: max error " << format_real(max_error) << " over " << cfg.samples
          << " starts; tau(T)/T = " << format_real(tau_long / cfg.tau_time) << " vs quadrature "
          << format_real(quad) << "\n";
  } else {
    c.summary["zeta_mean_p_S"] = flows::base_mean(zeta, 0.5);
    c.summary["zeta_mean_p_N"] = flows::base_mean(zeta, 0.0);
    c.log << "zeta base means: p_S " << format_real(flows::base_mean(zeta, 0.5)) << ", p_N "
          << format_real(flows::base_mean(zeta, 0.0)) << "\n";
  }
  return kOk;
}

int run_limitset(Context& c, const skew::SkewSystem& sys) {
  const auto& cfg = c.cfg;
  const auto lim = attract::likely_limit_estimate(sys, cfg.samples, {cfg.horizon, cfg.dwell}, cfg.seed, c.workers);
  const auto occ = attract::min_attractor_support(sys, cfg.orbits, cfg.steps, cfg.burn_in, cfg.cells,
                                                  derive_key(cfg.seed, 0x0cc), c.workers);
  std::ostringstream csv;
  csv << csv_comment(cfg) << "entry,frequency\n";
  for (std::size_t i = 0; i < lim.frequencies.size(); ++i) {
    csv << sys.catalog()[i].name << ',' << format_real(lim.frequencies[i]) << '\n';
  }
  csv << "unexplained," << format_real(lim.unexplained) << '\n';
  c.out.write("limitset.csv", csv.str());

  std::ostringstream occ_csv;
  occ_csv << csv_comment(cfg) << "ix,iy,x_lo,x_hi,y_lo,y_hi,mass,support\n";
  const auto support = occ.support(cfg.threshold);
  for (std::size_t iy = 0; iy < occ.cells_y; ++iy) {
    for (std::size_t ix = 0; ix < occ.cells_x; ++ix) {
      const double wx = 1.0 / static_cast<double>(occ.cells_x), wy = 1.0 / static_cast<double>(occ.cells_y);
      const double mass = occ.mass(ix, iy);
      occ_csv << ix << ',' << iy << ',' << format_real(wx * static_cast<double>(ix)) << ','
              << format_real(wx * static_cast<double>(ix + 1)) << ',' << format_real(wy * static_cast<double>(iy))
              << ',' << format_real(wy * static_cast<double>(iy + 1)) << ',' << format_real(mass) << ','
              << (mass > cfg.threshold ? 1 : 0) << '\n';
    }
  }
  c.out.write("occupancy.csv", occ_csv.str());
  c.summary["members"] = lim.members;
  c.summary["unexplained"] = lim.unexplained;
  c.summary["support_cells"] = support.size();
  c.log << "likely limit set: {";
  for (std::size_t i = 0; i < lim.members.size(); ++i) c.log << (i ? ", " : "") << lim.members[i];
  c.log << "}, unexplained " << format_real(lim.unexplained) << "; occupancy support " << support.size()
        << " cells\n";
  return kOk;
}

json config_echo(const RunConfig& cfg, const skew::SkewSystem& sys) {
  json grid = json::array();
  for (const auto& a : cfg.grid.axes) {
    grid.push_back({{"coord", attract::coord_name(a.coord)}, {"lo", a.lo}, {"hi", a.hi}, {"cells", a.cells}});
  }
  return {{"text", cfg.source},           {"preset", cfg.preset},   {"params", sys.params()},
          {"analysis", config::analysis_name(cfg.analysis)},        {"seed", cfg.seed},
          {"samples", cfg.samples},       {"horizon", cfg.horizon}, {"dwell", cfg.dwell},
          {"grid", grid}};
}

}  // namespace

RunResult run(const RunConfig& cfg, unsigned workers) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sys = skew::SkewSystem::build(cfg.preset, cfg.params);
  output::OutputSet out(cfg.output_dir);
  std::ostringstream log;
  log << "basinlab " << BASINLAB_VERSION << " " << config::analysis_name(cfg.analysis) << " preset=" << cfg.preset
      << " seed=" << cfg.seed << "\n";
  for (const auto& ch : sys.checks()) {
    log << "check " << (ch.pass ? "pass" : "FAIL") << ": " << ch.name << " (witness " << format_real(ch.witness)
        << ")\n";
  }
  RunResult result;
  Context ctx{cfg, workers, out, log, result.summary};
  switch (cfg.analysis) {
    case Analysis::BasinGrid: result.exit_code = run_basin_grid(ctx, sys); break;
    case Analysis::Lyapunov: result.exit_code = run_lyapunov(ctx, sys); break;
    case Analysis::Walk: result.exit_code = run_walk(ctx, sys); break;
    case Analysis::Stationary: result.exit_code = run_stationary(ctx, sys); break;
    case Analysis::Thickness: result.exit_code = run_thickness(ctx, sys); break;
    case Analysis::Flow: result.exit_code = run_flow(ctx, sys); break;
    case Analysis::LimitSet: result.exit_code = run_limitset(ctx, sys); break;
  }
  out.write("run.log", log.str());

  json checks = json::array();
  for (const auto& ch : sys.checks()) checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"witness", ch.witness}});
  json manifest{{"version", BASINLAB_VERSION},
                {"config", config_echo(cfg, sys)},
                {"checks", checks},
                {"results", result.summary},
                {"exit_code", result.exit_code},
                {"workers", workers},
                {"simd", simd::backend_name(simd::active_backend())},
                {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  out.write_manifest(std::move(manifest));
  result.manifest_path = (out.dir() / "manifest.json").string();
  return result;
}

int exit_code_for(const std::exception& e) {
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) return ce->construction() ? kConstruction : kUsage;
  if (dynamic_cast<const ConstructionError*>(&e)) return kConstruction;
  if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
  return kUsage;
}

}  // namespace basinlab::runner
