#include "gradlab/cumulants.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gradlab/discrete_calculus.hpp"
#include "gradlab/greens.hpp"

namespace gradlab {

namespace {

// locate the stream recording phi(0) - phi(x) in the ensemble
std::vector<std::vector<double>> streams_for(const ChainEnsemble& e, const Coords& x) {
  const TorusLattice& lat = *e.spec.lat;
  std::int64_t want = lat.index(x);
  std::vector<std::vector<double>> out;
  if (lat.index(e.spec.x_tilt) == want) {
    for (const auto& c : e.chains) out.push_back(c.xs);
    return out;
  }
  for (std::size_t k = 0; k < e.opts.track.size(); k++)
    if (lat.index(e.opts.track[k]) == want) {
      for (const auto& c : e.chains) out.push_back(c.obs[k]);
      return out;
    }
  throw std::invalid_argument("estimate_cumulants: site was not recorded");
}

void require_converged(const ChainEnsemble& e) {
  DiagnoseReport d = diagnose(e);
  if (!d.converged) {
    std::ostringstream os;
    os << "ensemble not converged: split Rhat(X) = " << d.rhat_x
       << ", Rhat(H) = " << d.rhat_energy;
    throw std::domain_error(os.str());
  }
}

}  // namespace

CumulantReport estimate_cumulants(const ChainEnsemble& e, const Coords& x) {
  require_converged(e);
  auto streams = streams_for(e, x);
  CumulantReport r;
  r.x = x;
  r.mu = e.spec.mu;
  for (const auto& s : streams) r.n_samples += s.size();
  JackknifeReport j2 = jackknife_chains(
      streams, [](const std::vector<double>& v) { return k_statistics(v).k2; });
  JackknifeReport j3 = jackknife_chains(
      streams, [](const std::vector<double>& v) { return k_statistics(v).k3; });
  r.g2 = j2.value;
  r.g2_se = j2.se;
  r.g3 = j3.value;
  r.g3_se = j3.se;
  r.ess = effective_sample_size(streams);
  return r;
}

std::vector<ReweightPoint> reweighted_g(const ChainEnsemble& e, const Coords& x,
                                        const std::vector<double>& mu_grid) {
  if (e.spec.mu != 0.0)
    throw std::domain_error("reweighted_g: base ensemble must have mu = 0");
  auto streams = streams_for(e, x);
  std::vector<double> pooled;
  for (const auto& s : streams) pooled.insert(pooled.end(), s.begin(), s.end());
  double sd = std::sqrt(k_statistics(pooled).k2);
  for (double mu : mu_grid)
    if (std::abs(mu) * sd > 2.0)
      throw std::domain_error("reweighted_g: |mu| SD(X) exceeds 2 on the grid");

  std::vector<ReweightPoint> out;
  for (double mu : mu_grid) {
    auto log_mean_exp = [mu](const std::vector<double>& v) {
      double mx = mu * v[0];
      for (double s : v) mx = std::max(mx, mu * s);
      double acc = 0.0;
      for (double s : v) acc += std::exp(mu * s - mx);
      return mx + std::log(acc / v.size());
    };
    auto tilted_m2 = [mu](const std::vector<double>& v) {
      double mx = mu * v[0];
      for (double s : v) mx = std::max(mx, mu * s);
      double W = 0.0, m1 = 0.0;
      for (double s : v) {
        double w = std::exp(mu * s - mx);
        W += w;
        m1 += w * s;
      }
      m1 /= W;
      double m2 = 0.0;
      for (double s : v) m2 += std::exp(mu * s - mx) * (s - m1) * (s - m1);
      return m2 / W;
    };
    auto tilted_m3 = [mu](const std::vector<double>& v) {
      double mx = mu * v[0];
      for (double s : v) mx = std::max(mx, mu * s);
      double W = 0.0, m1 = 0.0;
      for (double s : v) {
        double w = std::exp(mu * s - mx);
        W += w;
        m1 += w * s;
      }
      m1 /= W;
      double m3 = 0.0;
      for (double s : v) {
        double d = s - m1;
        m3 += std::exp(mu * s - mx) * d * d * d;
      }
      return m3 / W;
    };
    ReweightPoint p;
    p.mu = mu;
    JackknifeReport jg = jackknife_chains(streams, log_mean_exp);
    JackknifeReport j2 = jackknife_chains(streams, tilted_m2);
    JackknifeReport j3 = jackknife_chains(streams, tilted_m3);
    p.g = jg.value;
    p.g_se = jg.se;
    p.g2 = j2.value;
    p.g2_se = j2.se;
    p.g3 = j3.value;
    p.g3_se = j3.se;
    double sw = 0.0, sw2 = 0.0, mx = mu * pooled[0];
    for (double s : pooled) mx = std::max(mx, mu * s);
    for (double s : pooled) {
      double w = std::exp(mu * s - mx);
      sw += w;
      sw2 += w * w;
    }
    p.ess = sw * sw / sw2;
    p.reliable = p.ess >= 50.0;
    out.push_back(p);
  }
  return out;
}

HQField build_hq(const TorusLattice& lat, double rho, std::uint64_t seed) {
  if (rho <= 0.0 || rho > 1e-4)
    throw std::domain_error("build_hq: need 0 < rho <= 1e-4");
  HQField out{lat, VectorField(lat), rho};
  out.values = green_gradient(lat, rho);
  VectorField h_half = green_gradient(lat, rho / 2);

  const auto n = lat.sites();
  for (std::int64_t i = 0; i < n; i++) {
    double r = lat.norm(i);
    if (r > lat.side() / 4.0) continue;
    double mag2 = 0.0;
    for (int a = 0; a < lat.dim(); a++) mag2 += out.values.at(a, i) * out.values.at(a, i);
    out.decay_sup = std::max(out.decay_sup, std::sqrt(mag2) * (1.0 + r));
  }
  double dn = 0.0;
  for (std::size_t i = 0; i < out.values.v.size(); i++) {
    double d = h_half.v[i] - out.values.v[i];
    dn += d * d;
  }
  out.rho_stability = std::sqrt(dn / norm2(out.values));

  // telescoping probes
  LatticeField G = periodic_green(lat, rho);
  LatticeField G_half = periodic_green(lat, rho / 2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01(0.0, 1.0);
  double rem_half_max = 0.0;
  for (int probe = 0; probe < 20; probe++) {
    LatticeField phi(lat);
    for (auto& v : phi.v) v = N01(rng);
    std::int64_t xi = std::uniform_int_distribution<std::int64_t>(0, n - 1)(rng);
    Coords x = lat.coords(xi);
    // translate() shifts forward, tau_x f(z) = f(x + z); the telescoping
    // identity uses f(z - x), so shift by -x throughout
    Coords mx{};
    for (int a = 0; a < lat.dim(); a++) mx[a] = -x[a];
    VectorField omega = grad(phi);
    VectorField th = translate(out.values, mx);
    LatticeField tG = translate(G, mx);
    double lhs = phi.v[0] - phi.v[lat.index(x)];
    double rem = rho * (dot(G, phi) - dot(tG, phi));
    double rhs = dot(out.values, omega) - dot(th, omega) + rem;
    out.telescope_err = std::max(out.telescope_err, std::abs(lhs - rhs));
    out.remainder = std::max(out.remainder, std::abs(rem));
    LatticeField tGh = translate(G_half, mx);
    rem_half_max = std::max(
        rem_half_max, std::abs(rho / 2 * (dot(G_half, phi) - dot(tGh, phi))));
  }
  out.remainder_halving_ratio =
      rem_half_max > 0.0 ? out.remainder / rem_half_max : 0.0;
  out.ok = out.telescope_err <= 1e-8 && out.remainder_halving_ratio > 1.5;
  return out;
}

SweepResult theorem_sweep(std::shared_ptr<const Potential> V, int d, int L,
                          const std::vector<double>& m_grid, double mu,
                          const std::vector<int>& x_grid,
                          const SweepSettings& settings, std::uint64_t seed) {
  if (m_grid.empty() || x_grid.empty())
    throw std::invalid_argument("theorem_sweep: empty grid");
  TorusLattice lat(d, L);
  SweepResult res;
  std::uint64_t sub = 0;

  std::vector<SweepCell> final_zero, final_tilted;
  for (double m : m_grid) {
    // one untilted ensemble records every x in the grid
    ModelSpec spec0{&lat, V, m, 0.0, {}};
    spec0.x_tilt[0] = x_grid[0];
    SampleOptions o0 = settings.opts;
    for (std::size_t i = 1; i < x_grid.size(); i++) {
      Coords c{};
      c[0] = x_grid[i];
      o0.track.push_back(c);
    }
    ChainEnsemble e0 = sample(spec0, settings.chains, settings.steps,
                              seed + 1000 * (sub++), o0);
    DiagnoseReport d0 = diagnose(e0);
    std::vector<SweepCell> zero_cells;
    for (int x : x_grid) {
      Coords c{};
      c[0] = x;
      CumulantReport cr = estimate_cumulants(e0, c);
      SweepCell cell{L, m, 0.0, c, cr.g2, cr.g2_se, cr.g3, cr.g3_se,
                     cr.ess, d0.rhat_x, d0.converged};
      zero_cells.push_back(cell);
      res.cells.push_back(cell);
    }
    std::vector<SweepCell> tilted_cells;
    if (mu != 0.0) {
      // tilted measures depend on x, so each x needs its own ensemble
      for (int x : x_grid) {
        Coords c{};
        c[0] = x;
        ModelSpec spec{&lat, V, m, mu, c};
        ChainEnsemble e = sample(spec, settings.chains, settings.steps,
                                 seed + 1000 * (sub++), settings.opts);
        DiagnoseReport dd = diagnose(e);
        CumulantReport cr = estimate_cumulants(e, c);
        SweepCell cell{L, m, mu, c, cr.g2, cr.g2_se, cr.g3, cr.g3_se,
                       cr.ess, dd.rhat_x, dd.converged};
        tilted_cells.push_back(cell);
        res.cells.push_back(cell);
      }
    }
    final_zero = zero_cells;
    final_tilted = mu != 0.0 ? tilted_cells : zero_cells;
  }

  // trend checks on the last mass in the grid
  std::vector<double> lx, g2v, g3v, g3sig;
  for (const auto& c : final_zero) {
    lx.push_back(std::log(std::abs(static_cast<double>(c.x[0]))));
    g2v.push_back(c.g2);
  }
  res.checks.g2_vs_logx = linear_fit(lx, g2v);
  res.checks.g2_affine_ok =
      res.checks.g2_vs_logx.r2 >= 0.9 && res.checks.g2_vs_logx.slope > 0.0;

  for (const auto& c : final_tilted) {
    g3v.push_back(std::abs(c.g3));
    g3sig.push_back(std::max(c.g3_se, 1e-12));
  }
  res.checks.g3_vs_logx = linear_fit_weighted(lx, g3v, g3sig);
  res.checks.g3_trendless =
      std::abs(res.checks.g3_vs_logx.slope) <= 3.0 * res.checks.g3_vs_logx.slope_se;

  res.checks.x3_symmetric_ok = true;
  for (const auto& c : final_zero)
    if (std::abs(c.g3) > 3.0 * c.g3_se) res.checks.x3_symmetric_ok = false;

  res.checks.inconclusive =
      res.checks.g2_vs_logx.slope <= 3.0 * res.checks.g2_vs_logx.slope_se;
  return res;
}

JackknifeReport joint_third_cumulant(const ChainEnsemble& e, const VectorField& h1,
                                     const VectorField& h2, const VectorField& h3) {
  for (const auto& c : e.chains)
    if (c.kept.empty())
      throw std::domain_error("joint_third_cumulant: no kept configurations");
  const std::size_t m = e.chains.size();
  if (m < 2) throw std::domain_error("joint_third_cumulant: need >= 2 chains");
  const TorusLattice& lat = *e.spec.lat;
  // per chain: streams of A, B, C
  std::vector<std::vector<std::array<double, 3>>> tr(m);
  VectorField omega(lat);
  for (std::size_t ci = 0; ci < m; ci++)
    for (const auto& phi : e.chains[ci].kept) {
      grad_into(phi, omega);
      tr[ci].push_back({dot(h1, omega), dot(h2, omega), dot(h3, omega)});
    }
  auto kappa = [](const std::vector<const std::vector<std::array<double, 3>>*>& parts) {
    double n = 0, ea = 0, eb = 0, ec = 0;
    for (auto* p : parts)
      for (const auto& t : *p) {
        ea += t[0];
        eb += t[1];
        ec += t[2];
        n += 1.0;
      }
    ea /= n;
    eb /= n;
    ec /= n;
    double s = 0.0;
    for (auto* p : parts)
      for (const auto& t : *p) s += (t[0] - ea) * (t[1] - eb) * (t[2] - ec);
    return s / n;
  };
  std::vector<const std::vector<std::array<double, 3>>*> all;
  for (const auto& t : tr) all.push_back(&t);
  JackknifeReport rep;
  rep.value = kappa(all);
  std::vector<double> loo(m);
  double mean_loo = 0.0;
  for (std::size_t i = 0; i < m; i++) {
    std::vector<const std::vector<std::array<double, 3>>*> rest;
    for (std::size_t j = 0; j < m; j++)
      if (j != i) rest.push_back(&tr[j]);
    loo[i] = kappa(rest);
    mean_loo += loo[i];
  }
  mean_loo /= m;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  rep.se = std::sqrt((m - 1.0) / m * ss);
  return rep;
}

}  // namespace gradlab
