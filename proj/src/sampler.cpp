#include "gradlab/sampler.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gradlab/discrete_calculus.hpp"
#include "gradlab/greens.hpp"
#include "gradlab/simd/kernels.hpp"
#include "gradlab/stats.hpp"

namespace gradlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; i++) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// energy and its gradient; returns H(phi), fills ghost with dH/dphi
double energy_grad(const ModelSpec& s, const LatticeField& phi, VectorField& omega,
                   VectorField& vprime, LatticeField& gout) {
  const TorusLattice& lat = *s.lat;
  const auto n = lat.sites();
  grad_into(phi, omega);
  double H = s.V->batch_value_grad(omega, vprime);
  const auto& k = simd::active();
  H += 0.5 * s.m * s.m * k.sumsq(phi.v.data(), n);
  div_star_into(vprime, gout);
  k.axpy(s.m * s.m, phi.v.data(), gout.v.data(), n);
  if (s.mu != 0.0) {
    std::int64_t xt = lat.index(s.x_tilt);
    H -= s.mu * (phi.v[0] - phi.v[xt]);
    gout.v[0] -= s.mu;
    gout.v[xt] += s.mu;
  }
  return H;
}

double energy_only(const ModelSpec& s, const LatticeField& phi, VectorField& omega,
                   VectorField& vprime) {
  const TorusLattice& lat = *s.lat;
  grad_into(phi, omega);
  double H = s.V->batch_value_grad(omega, vprime);
  H += 0.5 * s.m * s.m * simd::active().sumsq(phi.v.data(), lat.sites());
  if (s.mu != 0.0) {
    std::int64_t xt = lat.index(s.x_tilt);
    H -= s.mu * (phi.v[0] - phi.v[xt]);
  }
  return H;
}

struct Workspace {
  VectorField omega, vprime, omega2, vprime2;
  LatticeField gH, gH2, prop;
  std::vector<double> xi;
  explicit Workspace(const TorusLattice& lat)
      : omega(lat), vprime(lat), omega2(lat), vprime2(lat),
        gH(lat), gH2(lat), prop(lat), xi(lat.sites()) {}
};

// one MALA step; returns true on acceptance.  H and gH are kept current for
// the chain state on entry and exit.
bool mala_step(const ModelSpec& s, Chain& c, Workspace& w, double& H) {
  const auto n = s.lat->sites();
  const double eps = c.step;
  std::normal_distribution<double> N01(0.0, 1.0);
  double xi2 = 0.0;
  for (std::int64_t i = 0; i < n; i++) {
    w.xi[i] = N01(c.rng);
    xi2 += w.xi[i] * w.xi[i];
  }
  for (std::int64_t i = 0; i < n; i++)
    w.prop.v[i] = c.phi.v[i] - 0.5 * eps * eps * w.gH.v[i] + eps * w.xi[i];
  double Hp = energy_grad(s, w.prop, w.omega2, w.vprime2, w.gH2);
  if (!std::isfinite(Hp)) throw std::runtime_error("sample: non-finite energy");
  // reverse move residual phi - [prop - (eps^2/2) gH(prop)]
  double rev2 = 0.0;
  for (std::int64_t i = 0; i < n; i++) {
    double r = c.phi.v[i] - w.prop.v[i] + 0.5 * eps * eps * w.gH2.v[i];
    rev2 += r * r;
  }
  double log_alpha = H - Hp + (eps * eps * xi2 - rev2) / (2.0 * eps * eps);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  if (std::log(U(c.rng)) < log_alpha) {
    c.phi.v.swap(w.prop.v);
    std::swap(w.gH.v, w.gH2.v);
    H = Hp;
    return true;
  }
  return false;
}

void record(const ModelSpec& s, Chain& c, double H, const SampleOptions& o) {
  std::int64_t xt = s.lat->index(s.x_tilt);
  c.xs.push_back(c.phi.v[0] - c.phi.v[xt]);
  c.energies.push_back(H);
  if (c.obs.size() != o.track.size()) c.obs.resize(o.track.size());
  for (std::size_t k = 0; k < o.track.size(); k++)
    c.obs[k].push_back(c.phi.v[0] - c.phi.v[s.lat->index(o.track[k])]);
  if (o.keep_fields_stride > 0 && (c.xs.size() - 1) % o.keep_fields_stride == 0)
    c.kept.push_back(c.phi);
}

void run_chain(const ModelSpec& s, Chain& c, int n_steps, int burn_in,
               const SampleOptions& o, bool tune) {
  Workspace w(*s.lat);
  double H = energy_grad(s, c.phi, w.omega, w.vprime, w.gH);
  if (!std::isfinite(H)) throw std::runtime_error("sample: non-finite energy");
  int window_acc = 0, window_n = 0;
  for (int t = 0; t < n_steps; t++) {
    bool in_burn = tune && t < burn_in;
    bool acc = mala_step(s, c, w, H);
    c.steps_done++;
    if (in_burn) {
      window_acc += acc;
      if (++window_n == 50) {
        double rate = window_acc / 50.0;
        if (rate < 0.4)
          c.step *= 0.8;
        else if (rate > 0.7)
          c.step *= 1.25;
        window_acc = window_n = 0;
      }
    } else {
      c.proposed++;
      c.accepted += acc;
      if (c.proposed % o.thin == 0) record(s, c, H, o);
    }
  }
}

}  // namespace

void ModelSpec::validate() const {
  if (!lat || !V) throw std::domain_error("ModelSpec: missing lattice or potential");
  if (V->dim() != lat->dim()) throw std::domain_error("ModelSpec: dimension mismatch");
  if (m <= 0.0) throw std::domain_error("ModelSpec: mass must be positive");
  if (mu != 0.0 && lat->index(x_tilt) == 0)
    throw std::domain_error("ModelSpec: tilt site must differ from 0 when mu != 0");
}

std::uint64_t ModelSpec::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << lat->dim() << ',' << lat->side() << ',' << V->name() << ','
     << V->lambda() << ',' << V->Lambda() << ',' << V->M() << ','
     << m << ',' << mu;
  for (int a = 0; a < lat->dim(); a++) os << ',' << x_tilt[a];
  std::string str = os.str();
  return fnv1a(0xcbf29ce484222325ULL, str.data(), str.size());
}

ChainEnsemble sample(const ModelSpec& spec, int n_chains, int n_steps,
                     std::uint64_t seed, const SampleOptions& opts) {
  spec.validate();
  if (n_chains < 2) throw std::domain_error("sample: need at least 2 chains");
  if (n_steps <= opts.burn_in) throw std::domain_error("sample: n_steps <= burn_in");
  if (opts.thin < 1 || opts.step0 <= 0.0) throw std::domain_error("sample: bad options");
  ChainEnsemble e;
  e.spec = spec;
  e.opts = opts;
  e.chains.resize(n_chains);
  for (int ci = 0; ci < n_chains; ci++) {
    Chain& c = e.chains[ci];
    c.seed = splitmix64(seed + 0x1000 * (ci + 1));
    c.rng.seed(c.seed);
    c.phi = LatticeField(*spec.lat);
    // diffuse start: i.i.d. normals, projected to mean zero for a mild
    // head start on the zero mode
    std::normal_distribution<double> N01(0.0, 1.0);
    for (auto& v : c.phi.v) v = N01(c.rng);
    double mean = simd::active().sum(c.phi.v.data(), c.phi.v.size()) / c.phi.v.size();
    for (auto& v : c.phi.v) v -= mean;
    c.step = opts.step0;
    run_chain(spec, c, n_steps, opts.burn_in, opts, true);
  }
  return e;
}

void extend(ChainEnsemble& e, int extra_steps) {
  if (e.chains.empty()) throw std::domain_error("extend: empty ensemble");
  for (auto& c : e.chains)
    run_chain(e.spec, c, extra_steps, 0, e.opts, false);
}

DiagnoseReport diagnose(const ChainEnsemble& e) {
  if (e.chains.size() < 2) throw std::domain_error("diagnose: need >= 2 chains");
  for (const auto& c : e.chains)
    if (c.xs.size() < 100) throw std::domain_error("diagnose: need >= 100 samples per chain");
  std::vector<std::vector<double>> xs, es;
  for (const auto& c : e.chains) {
    xs.push_back(c.xs);
    es.push_back(c.energies);
  }
  DiagnoseReport r;
  r.rhat_x = split_rhat(xs);
  r.ess_x = effective_sample_size(xs);
  r.rhat_energy = split_rhat(es);
  r.ess_energy = effective_sample_size(es);
  r.converged = r.rhat_x < 1.05 && r.rhat_energy < 1.05;
  return r;
}

BlReport check_brascamp_lieb(const ChainEnsemble& e, const VectorField& h) {
  if (e.spec.mu != 0.0)
    throw std::domain_error("check_brascamp_lieb: requires mu = 0 ensemble");
  const double lam = e.spec.V->lambda();
  double h2 = norm2(h);
  if (h2 / lam > 2.0)
    throw std::domain_error("check_brascamp_lieb: |h|^2/lambda must be <= 2");
  for (const auto& c : e.chains)
    if (c.kept.empty())
      throw std::domain_error("check_brascamp_lieb: ensemble has no kept configurations");

  const TorusLattice& lat = *e.spec.lat;
  std::vector<std::vector<double>> obs;
  VectorField omega(lat);
  for (const auto& c : e.chains) {
    std::vector<double> vals;
    vals.reserve(c.kept.size());
    for (const auto& phi : c.kept) {
      grad_into(phi, omega);
      vals.push_back(dot(h, omega));
    }
    obs.push_back(std::move(vals));
  }
  auto log_moment = [](const std::vector<double>& v) {
    // stabilized log mean exp
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s / v.size());
  };
  JackknifeReport jk = jackknife_chains(obs, log_moment);

  BlReport r;
  r.log_moment = jk.value;
  r.se = jk.se;
  r.bound_generic = h2 / (2.0 * lam);
  LatticeField f = div_star(h);
  LatticeField u = resolvent_solve(lat, lam, e.spec.m * e.spec.m, f);
  r.bound_sharp = 0.5 * dot(f, u);
  r.ok = r.log_moment <= r.bound_generic + 3.0 * r.se;
  double gap = r.bound_generic - r.log_moment;
  r.heavy_tail = r.se > 0.2 * std::max(gap, 1e-12);
  return r;
}

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_checkpoint(const ChainEnsemble& e, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write("GLCKPT01", 8);
  put<std::uint64_t>(os, e.spec.hash());
  put<std::uint32_t>(os, e.spec.lat->dim());
  put<std::uint32_t>(os, e.spec.lat->side());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(e.chains.size()));
  for (const auto& c : e.chains) {
    put<std::uint64_t>(os, static_cast<std::uint64_t>(c.steps_done));
    put<double>(os, c.step);
    put<std::uint64_t>(os, c.seed);
    put<std::int64_t>(os, c.accepted);
    put<std::int64_t>(os, c.proposed);
    std::ostringstream rs;
    rs << c.rng;
    std::string state = rs.str();
    put<std::uint64_t>(os, state.size());
    os.write(state.data(), static_cast<std::streamsize>(state.size()));
    os.write(reinterpret_cast<const char*>(c.phi.v.data()),
             static_cast<std::streamsize>(c.phi.v.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failed");
}

ChainEnsemble load_checkpoint(const std::string& path, const ModelSpec& spec,
                              const SampleOptions& opts) {
  spec.validate();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "GLCKPT01", 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic");
  if (get<std::uint64_t>(is) != spec.hash())
    throw std::runtime_error("load_checkpoint: model mismatch");
  if (get<std::uint32_t>(is) != static_cast<std::uint32_t>(spec.lat->dim()) ||
      get<std::uint32_t>(is) != static_cast<std::uint32_t>(spec.lat->side()))
    throw std::runtime_error("load_checkpoint: lattice mismatch");
  std::uint32_t nc = get<std::uint32_t>(is);
  ChainEnsemble e;
  e.spec = spec;
  e.opts = opts;
  e.chains.resize(nc);
  for (auto& c : e.chains) {
    c.steps_done = static_cast<std::int64_t>(get<std::uint64_t>(is));
    c.step = get<double>(is);
    c.seed = get<std::uint64_t>(is);
    c.accepted = get<std::int64_t>(is);
    c.proposed = get<std::int64_t>(is);
    std::uint64_t len = get<std::uint64_t>(is);
    std::string state(len, '\0');
    is.read(state.data(), static_cast<std::streamsize>(len));
    std::istringstream rs(state);
    rs >> c.rng;
    c.phi = LatticeField(*spec.lat);
    is.read(reinterpret_cast<char*>(c.phi.v.data()),
            static_cast<std::streamsize>(c.phi.v.size() * sizeof(double)));
  }
  if (!is) throw std::runtime_error("load_checkpoint: truncated file");
  return e;
}

}  // namespace gradlab
