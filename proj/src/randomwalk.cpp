#include "basinlab/randomwalk.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "basinlab/errors.hpp"
#include "basinlab/parallel.hpp"
#include "basinlab/trig.hpp"

namespace basinlab::randomwalk {

ProbProfile ProbProfile::constant(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConstructionError("profile range", "Constant(p) needs p in (0,1)");
  return ProbProfile(Kind::Constant, {p});
}

ProbProfile ProbProfile::cosine(double b) {
  if (!(b > 0.0 && b < 0.5)) throw ConstructionError("profile range", "Cosine(b) needs b in (0,1/2)");
  return ProbProfile(Kind::Cosine, {b});
}

ProbProfile ProbProfile::piecewise_linear(double p_l, double p_r, double l, double r) {
  if (!(p_l > 0.5 && p_l < 1.0)) throw ConstructionError("p_l > 1/2", "PiecewiseLinear needs p_l in (1/2,1)");
  if (!(p_r > 0.0 && p_r < 0.5)) throw ConstructionError("p_r < 1/2", "PiecewiseLinear needs p_r in (0,1/2)");
  if (!(l > 0.0 && l < r && r < 1.0)) throw ConstructionError("0 < l < r < 1", "PiecewiseLinear breakpoints");
  return ProbProfile(Kind::PiecewiseLinear, {p_l, p_r, l, r});
}

double ProbProfile::operator()(double x) const noexcept {
  switch (kind_) {
    case Kind::Constant: return params_[0];
    case Kind::Cosine: return 0.5 - params_[0] * cos_2pi(x);
    case Kind::PiecewiseLinear: {
      const double pl = params_[0], pr = params_[1], l = params_[2], r = params_[3];
      if (x <= l) return pl;
      if (x >= r) return pr;
      return pl + (pr - pl) * (x - l) / (r - l);
    }
  }
  return 0.5;
}

std::string ProbProfile::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Constant: os << "Constant(" << params_[0] << ")"; break;
    case Kind::Cosine: os << "Cosine(" << params_[0] << ")"; break;
    case Kind::PiecewiseLinear:
      os << "PiecewiseLinear(" << params_[0] << "," << params_[1] << "," << params_[2] << "," << params_[3] << ")";
      break;
  }
  return os.str();
}

Step walk_step(const maps1d::Map1D& f, const ProbProfile& p, double x, CounterStream& stream) {
  const int eta = stream.uniform() < p(x) ? 1 : -1;
  return {eta, f.apply(x, eta)};
}

double zeta_cylinder(const maps1d::Map1D& f, const ProbProfile& p, double x, std::span<const int> signs) {
  double prob = 1.0;
  for (int a : signs) {
    if (a != 1 && a != -1) throw std::invalid_argument("sign words take values -1 and +1");
    prob *= p.signed_prob(a, x);
    x = f.apply(x, a);
  }
  return prob;
}

DiscreteChain build_orbit_chain(const maps1d::Map1D& f, const ProbProfile& p, double x0, int M) {
  if (M < 1) throw std::invalid_argument("orbit chain needs M >= 1");
  const double moved = f.domain() == maps1d::Domain::Circle ? circle_distance(f.apply(x0, 1), x0)
                                                           : std::fabs(f.apply(x0, 1) - x0);
  if (moved < 1e-9) throw std::invalid_argument("orbit chain start is (numerically) a fixed point");
  const std::size_t n = 2 * static_cast<std::size_t>(M) + 1;
  DiscreteChain chain;
  chain.coords.resize(n);
  chain.boundary = Boundary::Absorbing;
  chain.coords[static_cast<std::size_t>(M)] = x0;
  for (int k = 1; k <= M; ++k) {
    chain.coords[static_cast<std::size_t>(M + k)] = f.apply(chain.coords[static_cast<std::size_t>(M + k - 1)], 1);
    chain.coords[static_cast<std::size_t>(M - k)] = f.apply(chain.coords[static_cast<std::size_t>(M - k + 1)], -1);
  }
  chain.up.resize(n);
  for (std::size_t i = 0; i < n; ++i) chain.up[i] = p(chain.coords[i]);
  return chain;
}

DiscreteChain rotation_chain(const ProbProfile& p, std::size_t sites) {
  if (sites < 3) throw std::invalid_argument("rotation chain needs at least 3 sites");
  DiscreteChain chain;
  chain.boundary = Boundary::Cyclic;
  chain.coords.resize(sites);
  chain.up.resize(sites);
  for (std::size_t i = 0; i < sites; ++i) {
    chain.coords[i] = static_cast<double>(i) / static_cast<double>(sites);
    chain.up[i] = p(chain.coords[i]);
  }
  return chain;
}

std::vector<double> absorption_solve(const DiscreteChain& chain) {
  if (chain.boundary != Boundary::Absorbing) throw std::invalid_argument("absorption_solve needs absorbing ends");
  const std::size_t n = chain.size();
  if (n < 3) throw std::invalid_argument("absorption_solve needs an interior site");
  // Interior rows: -(1-p_k) P(k-1) + P(k) - p_k P(k+1) = 0, P(0) = 0, P(n-1) = 1.
  const std::size_t m = n - 2;
  std::vector<double> sub(m), diag(m, 1.0), sup(m), rhs(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double pk = chain.up[j + 1];
    if (!(pk > 0.0 && pk < 1.0)) throw std::invalid_argument("interior weights must lie in (0,1)");
    sub[j] = -(1.0 - pk);
    sup[j] = -pk;
  }
  rhs[m - 1] = chain.up[n - 2];  // p_{n-2}·P(n-1)
  // Thomas algorithm; the system is diagonally dominant so no pivoting.
  for (std::size_t j = 1; j < m; ++j) {
    const double w = sub[j] / diag[j - 1];
    diag[j] -= w * sup[j - 1];
    rhs[j] -= w * rhs[j - 1];
  }
  std::vector<double> P(n);
  P[0] = 0.0;
  P[n - 1] = 1.0;
  P[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t j = m - 1; j-- > 0;) P[j + 1] = (rhs[j] - sup[j] * P[j + 2]) / diag[j];
  return P;
}

std::vector<double> transfer(const DiscreteChain& chain, std::span<const double> m) {
  const std::size_t n = chain.size();
  if (m.size() != n) throw std::invalid_argument("measure size does not match chain");
  std::vector<double> out(n, 0.0);
  if (chain.boundary == Boundary::Cyclic) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t prev = (i + n - 1) % n, next = (i + 1) % n;
      out[i] = chain.up[prev] * m[prev] + (1.0 - chain.up[next]) * m[next];
    }
    return out;
  }
  out[0] += m[0];
  out[n - 1] += m[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i + 1] += chain.up[i] * m[i];
    out[i - 1] += (1.0 - chain.up[i]) * m[i];
  }
  return out;
}

namespace {

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

}  // namespace

StationaryMeasure stationary_power_iteration(const DiscreteChain& chain, double tol, std::size_t max_sweeps) {
  if (chain.boundary != Boundary::Cyclic) throw std::invalid_argument("stationary iteration needs a cyclic chain");
  const std::size_t n = chain.size();
  for (double w : chain.up) {
    if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("weights must lie in (0,1)");
  }
  std::vector<double> m(n, 1.0 / static_cast<double>(n));
  double residual = INFINITY;
  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    auto tm = transfer(chain, m);
    residual = l1_distance(tm, m);
    if (residual < tol) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = 0.5 * (m[i] + tm[i]);
      total += m[i];
    }
    for (double& v : m) v /= total;
  }
  if (!(residual < tol)) throw NumericalError("stationary power iteration did not converge", residual);
  return {std::move(m), residual, sweep};
}

PropositionResiduals verify_proposition(const DiscreteChain& chain, std::span<const double> m, int depth) {
  if (chain.boundary != Boundary::Cyclic) throw std::invalid_argument("verify_proposition needs a cyclic chain");
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  const std::size_t n = chain.size();
  auto tm = transfer(chain, m);
  const double stat = l1_distance(tm, m);

  auto wrap = [n](std::int64_t i) { return static_cast<std::size_t>(((i % static_cast<std::int64_t>(n)) + static_cast<std::int64_t>(n)) % static_cast<std::int64_t>(n)); };
  auto p_signed = [&](int a, std::size_t site) { return a > 0 ? chain.up[site] : 1.0 - chain.up[site]; };
  // ζ_site(C) by the recursion ζ_x(a C') = p_a(x) ζ_{f^a x}(C').
  auto zeta = [&](std::size_t site, std::span<const int> word) {
    double prob = 1.0;
    auto s = static_cast<std::int64_t>(site);
    for (int a : word) {
      prob *= p_signed(a, wrap(s));
      s += a;
    }
    return prob;
  };

  double inv = 0.0;
  std::vector<int> word;
  std::vector<int> extended;
  for (int k = 0; k <= depth; ++k) {
    word.assign(static_cast<std::size_t>(k), -1);
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << k); ++code) {
      for (int j = 0; j < k; ++j) word[static_cast<std::size_t>(j)] = (code >> j) & 1 ? 1 : -1;
      for (std::size_t i = 0; i < n; ++i) {
        const double direct = m[i] * zeta(i, word);
        // G⁻¹(C × {i}) = ⋃_a [a]C × f^{-a}({i}).
        double preimage = 0.0;
        for (int a : {-1, 1}) {
          extended.assign(1, a);
          extended.insert(extended.end(), word.begin(), word.end());
          const std::size_t from = wrap(static_cast<std::int64_t>(i) - a);
          preimage += m[from] * zeta(from, extended);
        }
        inv = std::max(inv, std::fabs(preimage - direct));
      }
    }
  }
  return {stat, inv};
}

AbsorptionEstimate monte_carlo_chain(const DiscreteChain& chain, std::size_t start, std::uint64_t trials,
                                     std::uint64_t seed, unsigned workers) {
  if (chain.boundary != Boundary::Absorbing) throw std::invalid_argument("monte_carlo_chain needs absorbing ends");
  if (start == 0 || start + 1 >= chain.size()) throw std::invalid_argument("start must be an interior site");
  constexpr std::uint64_t kBatch = 4096;
  const std::size_t batches = static_cast<std::size_t>((trials + kBatch - 1) / kBatch);
  std::vector<std::uint64_t> hits(batches, 0);
  parallel_for(batches, workers, [&](std::size_t b) {
    const std::uint64_t lo = b * kBatch, hi = std::min(trials, lo + kBatch);
    for (std::uint64_t t = lo; t < hi; ++t) {
      CounterStream stream(derive_key(seed, t));
      std::size_t site = start;
      while (site != 0 && site + 1 != chain.size()) site = stream.uniform() < chain.up[site] ? site + 1 : site - 1;
      hits[b] += site != 0;
    }
  });
  AbsorptionEstimate est;
  est.trials = trials;
  for (auto h : hits) est.upper += h;
  return est;
}

AbsorptionEstimate monte_carlo_orbit(const maps1d::Map1D& f, const ProbProfile& p, double x0, int M,
                                     std::uint64_t trials, std::uint64_t seed, unsigned workers) {
  constexpr std::uint64_t kBatch = 1024;
  const std::size_t batches = static_cast<std::size_t>((trials + kBatch - 1) / kBatch);
  std::vector<std::uint64_t> hits(batches, 0);
  parallel_for(batches, workers, [&](std::size_t b) {
    const std::uint64_t lo = b * kBatch, hi = std::min(trials, lo + kBatch);
    for (std::uint64_t t = lo; t < hi; ++t) {
      CounterStream stream(derive_key(seed, t));
      double x = x0;
      int n = 0;
      while (n > -M && n < M) {
        const Step s = walk_step(f, p, x, stream);
        x = s.x;
        n += s.eta;
      }
      hits[b] += n == M;
    }
  });
  AbsorptionEstimate est;
  est.trials = trials;
  for (auto h : hits) est.upper += h;
  return est;
}

}  // namespace basinlab::randomwalk
