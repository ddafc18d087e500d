// gradlab: experiment driver for the lattice gradient-field laboratory.
//
// Subcommands: green, czo-norm, neumann, sample, cumulants, verify-all.
// Configuration is line-oriented `key = value` text with `#` comments; every
// run writes a CSV result plus a provenance sidecar.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradlab/cumulants.hpp"
#include "gradlab/discrete_calculus.hpp"
#include "gradlab/greens.hpp"
#include "gradlab/potential.hpp"
#include "gradlab/quenched.hpp"
#include "gradlab/sampler.hpp"
#include "gradlab/torus.hpp"

using namespace gradlab;

namespace {

constexpr const char* kVersion = "gradlab 1.0.0";

// exit codes
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };
  std::map<std::string, Entry> entries;
  std::string path;

  static Config parse(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    Config cfg;
    cfg.path = path;
    std::string line;
    int ln = 0;
    while (std::getline(is, line)) {
      ln++;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      std::string t = trim(line);
      if (t.empty()) continue;
      auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(ln) + ": expected key = value");
      std::string key = trim(t.substr(0, eq));
      std::string val = trim(t.substr(eq + 1));
      if (key.empty()) throw ConfigError(path + ":" + std::to_string(ln) + ": empty key");
      if (cfg.entries.count(key))
        throw ConfigError(path + ":" + std::to_string(ln) + ": duplicate key '" + key + "'");
      cfg.entries[key] = {val, ln, false};
    }
    return cfg;
  }

  const Entry* find(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  std::string str(const std::string& key, const std::string& dflt) const {
    const Entry* e = find(key);
    return e ? e->value : dflt;
  }
  std::string require(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw ConfigError(path + ": missing required key '" + key + "'");
    return e->value;
  }
  double num(const std::string& key, std::optional<double> dflt = {}) const {
    const Entry* e = find(key);
    if (!e) {
      if (dflt) return *dflt;
      throw ConfigError(path + ": missing required key '" + key + "'");
    }
    try {
      std::size_t pos = 0;
      double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(path + ":" + std::to_string(e->line) + ": key '" + key +
                        "' is not a number: " + e->value);
    }
  }
  long integer(const std::string& key, std::optional<long> dflt = {}) const {
    double v = num(key, dflt ? std::optional<double>(*dflt) : std::nullopt);
    long l = static_cast<long>(v);
    if (static_cast<double>(l) != v) {
      const Entry* e = find(key);
      throw ConfigError(path + ":" + std::to_string(e ? e->line : 0) + ": key '" + key +
                        "' must be an integer");
    }
    return l;
  }
  std::vector<double> num_list(const std::string& key,
                               const std::vector<double>& dflt) const {
    const Entry* e = find(key);
    if (!e) return dflt;
    std::vector<double> out;
    std::stringstream ss(e->value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(std::stod(tok));
      } catch (...) {
        throw ConfigError(path + ":" + std::to_string(e->line) + ": bad list entry '" +
                          tok + "' for key '" + key + "'");
      }
    }
    if (out.empty())
      throw ConfigError(path + ":" + std::to_string(e->line) + ": empty list for '" + key + "'");
    return out;
  }
  Coords coords(const std::string& key, int d, const Coords& dflt) const {
    const Entry* e = find(key);
    if (!e) return dflt;
    Coords c{};
    std::stringstream ss(e->value);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
      if (i >= d)
        throw ConfigError(path + ":" + std::to_string(e->line) + ": too many coordinates");
      c[i++] = static_cast<int>(std::stol(tok));
    }
    if (i != d)
      throw ConfigError(path + ":" + std::to_string(e->line) + ": key '" + key +
                        "' needs " + std::to_string(d) + " coordinates");
    return c;
  }

  // every present key must have been consumed by the command
  void reject_unknown() const {
    for (const auto& [key, e] : entries)
      if (!e.used)
        throw ConfigError(path + ":" + std::to_string(e.line) + ": unknown key '" + key + "'");
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvWriter {
  std::ofstream os;
  explicit CsvWriter(const std::string& path) : os(path, std::ios::binary | std::ios::trunc) {
    if (!os) throw ConfigError("cannot open output file: " + path);
  }
  void header(const std::vector<std::string>& cols) { row_str(cols); }
  void row_str(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); i++) {
      if (i) os << ',';
      os << cols[i];
    }
    os << '\n';
  }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); i++) {
      if (i) os << ',';
      os << fmt(vals[i]);
    }
    os << '\n';
  }
};

void write_provenance(const std::string& out, const std::string& command,
                      const Config& cfg, std::uint64_t seed, double wall_s) {
  std::ofstream os(out + ".provenance.txt", std::ios::trunc);
  os << "version = " << kVersion << "\n";
  os << "command = " << command << "\n";
  os << "seed = " << seed << "\n";
  os << "wall_seconds = " << fmt(wall_s) << "\n";
  os << "config_file = " << cfg.path << "\n";
  for (const auto& [key, e] : cfg.entries) os << key << " = " << e.value << "\n";
}

std::shared_ptr<Potential> make_potential(const Config& cfg, int d) {
  std::string kind = cfg.str("potential", "quadratic");
  if (kind == "quadratic") return make_quadratic(cfg.num("c", 1.0), d);
  if (kind == "dipole") return make_dipole(cfg.num("a", 0.25), d);
  throw ConfigError(cfg.path + ": unknown potential '" + kind + "'");
}

int cmd_green(const Config& cfg, const std::string& out) {
  int d = static_cast<int>(cfg.integer("d", 2));
  int L = static_cast<int>(cfg.integer("L"));
  double rho = cfg.num("rho");
  cfg.reject_unknown();
  TorusLattice lat(d, L);
  LatticeField G = periodic_green(lat, rho);
  VectorField gG = green_gradient(lat, rho);
  CsvWriter csv(out);
  std::vector<std::string> hdr = {"y0"};
  if (d == 2) hdr.push_back("y1");
  hdr.insert(hdr.end(), {"abs_y", "green", "grad_green_mag"});
  csv.header(hdr);
  for (std::int64_t i = 0; i < lat.sites(); i++) {
    double r = lat.norm(i);
    if (r > L / 4.0) continue;
    Coords c = lat.coords(i);
    double mag2 = 0.0;
    for (int a = 0; a < d; a++) mag2 += gG.at(a, i) * gG.at(a, i);
    std::vector<double> row = {static_cast<double>(c[0])};
    if (d == 2) row.push_back(c[1]);
    row.insert(row.end(), {r, G.v[i], std::sqrt(mag2)});
    csv.row(row);
  }
  return kOk;
}

int cmd_czo_norm(const Config& cfg, const std::string& out, std::uint64_t seed,
                 bool strict) {
  int d = static_cast<int>(cfg.integer("d", 2));
  int L = static_cast<int>(cfg.integer("L"));
  double rho = cfg.num("rho");
  int iters = static_cast<int>(cfg.integer("iters", 300));
  std::string opname = cfg.str("operator", "T");
  std::vector<double> alphas = cfg.num_list("alpha_grid", {0.0});
  double beta = cfg.num("beta", 0.0);
  cfg.reject_unknown();
  CzOperator op;
  if (opname == "T")
    op = CzOperator::T;
  else if (opname == "T1")
    op = CzOperator::T1;
  else if (opname == "T-tensor-I")
    op = CzOperator::TTensorIdentity;
  else
    throw ConfigError(cfg.path + ": unknown operator '" + opname + "'");
  TorusLattice lat(d, L);
  CsvWriter csv(out);
  csv.header({"alpha", "beta", "norm", "iters", "converged"});
  bool all_conv = true;
  for (double a : alphas) {
    Weight w = op == CzOperator::T ? Weight::one_point(a) : Weight::two_point(a, beta);
    PowerIterReport rep = estimate_weighted_norm(op, lat, rho, w, iters, seed);
    all_conv = all_conv && rep.converged;
    csv.row({a, op == CzOperator::T ? 0.0 : beta, rep.norm,
             static_cast<double>(rep.iters), rep.converged ? 1.0 : 0.0});
  }
  if (!all_conv && strict) return kNumericalError;
  return kOk;
}

int cmd_neumann(const Config& cfg, const std::string& out, std::uint64_t seed,
                bool strict) {
  int d = static_cast<int>(cfg.integer("d", 2));
  int L = static_cast<int>(cfg.integer("L"));
  auto V = make_potential(cfg, d);
  double rho_s = cfg.num("rho_s", 1.0);
  double m = cfg.num("m", 0.0);
  double tol = cfg.num("tol", 1e-10);
  int max_iter = static_cast<int>(cfg.integer("max_iter", 400));
  int n_config = static_cast<int>(cfg.integer("n_config", 20));
  double noise = cfg.num("noise_scale", 1.0);
  std::string variant = cfg.str("variant", "one");
  cfg.reject_unknown();
  if (variant != "one" && variant != "two")
    throw ConfigError(cfg.path + ": variant must be 'one' or 'two'");

  TorusLattice lat(d, L);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N01(0.0, 1.0);
  CsvWriter csv(out);
  csv.header({"config", "ratio", "iters", "converged", "residual", "threshold_violated"});
  bool all_ok = true;
  for (int k = 0; k < n_config; k++) {
    QuenchedProblem p;
    p.lat = &lat;
    p.V = V;
    p.rho_s = rho_s;
    p.m = m;
    p.phi = LatticeField(lat);
    for (auto& v : p.phi.v) v = noise * N01(rng);
    NeumannReport rep;
    if (variant == "one") {
      VectorField h(lat);
      for (auto& v : h.v) v = N01(rng);
      rep = solve_one_variable(p, h, tol, max_iter);
    } else {
      TwoPointField Phi(lat, d);
      for (auto& v : Phi.v) v = N01(rng);
      rep = solve_two_variable(p, Phi, tol, max_iter);
    }
    all_ok = all_ok && (rep.converged || rep.threshold_violated);
    csv.row({static_cast<double>(k), rep.ratio, static_cast<double>(rep.iters),
             rep.converged ? 1.0 : 0.0, rep.residual,
             rep.threshold_violated ? 1.0 : 0.0});
  }
  if (!all_ok && strict) return kNumericalError;
  return kOk;
}

SampleOptions sample_options(const Config& cfg) {
  SampleOptions o;
  o.burn_in = static_cast<int>(cfg.integer("burn_in", 2000));
  o.thin = static_cast<int>(cfg.integer("thin", 10));
  o.keep_fields_stride = static_cast<int>(cfg.integer("keep_fields_stride", 0));
  o.step0 = cfg.num("step0", 0.2);
  return o;
}

int cmd_sample(const Config& cfg, const std::string& out, std::uint64_t seed,
               bool strict) {
  int d = static_cast<int>(cfg.integer("d", 2));
  int L = static_cast<int>(cfg.integer("L"));
  auto V = make_potential(cfg, d);
  ModelSpec spec;
  TorusLattice lat(d, L);
  spec.lat = &lat;
  spec.V = V;
  spec.m = cfg.num("m");
  spec.mu = cfg.num("mu", 0.0);
  Coords dflt{};
  dflt[0] = L / 2;
  spec.x_tilt = cfg.coords("x", d, dflt);
  int chains = static_cast<int>(cfg.integer("chains", 4));
  int steps = static_cast<int>(cfg.integer("steps", 20000));
  SampleOptions opts = sample_options(cfg);
  std::string checkpoint = cfg.str("checkpoint", "");
  cfg.reject_unknown();

  ChainEnsemble e = sample(spec, chains, steps, seed, opts);
  DiagnoseReport diag = diagnose(e);
  std::vector<std::vector<double>> xs;
  for (const auto& c : e.chains) xs.push_back(c.xs);
  JackknifeReport mean_x = jackknife_chains(xs, [](const std::vector<double>& v) {
    double s = 0.0;
    for (double t : v) s += t;
    return s / v.size();
  });
  JackknifeReport var_x = jackknife_chains(
      xs, [](const std::vector<double>& v) { return k_statistics(v).k2; });
  JackknifeReport k3_x = jackknife_chains(
      xs, [](const std::vector<double>& v) { return k_statistics(v).k3; });

  CsvWriter csv(out);
  csv.header({"quantity", "value", "se"});
  auto put = [&](const std::string& name, double v, double se) {
    csv.row_str({name, fmt(v), fmt(se)});
  };
  put("mean_X", mean_x.value, mean_x.se);
  put("var_X", var_x.value, var_x.se);
  put("k3_X", k3_x.value, k3_x.se);
  put("rhat_X", diag.rhat_x, 0.0);
  put("ess_X", diag.ess_x, 0.0);
  put("rhat_energy", diag.rhat_energy, 0.0);
  for (std::size_t i = 0; i < e.chains.size(); i++)
    put("acceptance_chain_" + std::to_string(i), e.chains[i].acceptance_rate(), 0.0);
  if (!checkpoint.empty()) save_checkpoint(e, checkpoint);
  if (!diag.converged && strict) return kNumericalError;
  return kOk;
}

int cmd_cumulants(const Config& cfg, const std::string& out, std::uint64_t seed,
                  bool strict) {
  int d = static_cast<int>(cfg.integer("d", 2));
  int L = static_cast<int>(cfg.integer("L"));
  auto V = make_potential(cfg, d);
  std::vector<double> m_grid = cfg.num_list("m_grid", {cfg.num("m", 0.1)});
  double mu = cfg.num("mu", 0.0);
  std::vector<double> xg = cfg.num_list("x_grid", {2, 4, 8});
  SweepSettings st;
  st.chains = static_cast<int>(cfg.integer("chains", 4));
  st.steps = static_cast<int>(cfg.integer("steps", 40000));
  st.opts = sample_options(cfg);
  cfg.reject_unknown();
  std::vector<int> x_grid;
  for (double x : xg) x_grid.push_back(static_cast<int>(x));

  SweepResult res = theorem_sweep(V, d, L, m_grid, mu, x_grid, st, seed);
  CsvWriter csv(out);
  csv.header({"L", "m", "mu", "x", "g2", "g2_se", "g3", "g3_se", "ess", "rhat",
              "converged"});
  bool all_conv = true;
  for (const auto& c : res.cells) {
    all_conv = all_conv && c.converged;
    csv.row({static_cast<double>(c.L), c.m, c.mu, static_cast<double>(c.x[0]),
             c.g2, c.g2_se, c.g3, c.g3_se, c.ess, c.rhat,
             c.converged ? 1.0 : 0.0});
  }
  if ((!all_conv || res.checks.inconclusive) && strict) return kNumericalError;
  return kOk;
}

int cmd_verify_all(const Config& cfg, const std::string& out, std::uint64_t seed,
                   bool strict) {
  int d = static_cast<int>(cfg.integer("d", 2));
  int L = static_cast<int>(cfg.integer("L", 16));
  auto V = make_potential(cfg, d);
  double m = cfg.num("m", 0.5);
  cfg.reject_unknown();

  CsvWriter csv(out);
  csv.header({"check", "value", "pass"});
  bool all = true;
  auto put = [&](const std::string& name, double v, bool pass) {
    csv.row_str({name, fmt(v), pass ? "1" : "0"});
    all = all && pass;
  };

  // Green's function mass identity: sum G = 1/rho
  TorusLattice lat(d, L);
  {
    double rho = 0.37;
    LatticeField G = periodic_green(lat, rho);
    double s = 0.0;
    for (double v : G.v) s += v;
    put("green_mass_identity", std::abs(s - 1.0 / rho), std::abs(s - 1.0 / rho) < 1e-10);
  }
  // exact vs power-iteration operator norm
  {
    double rho = 1.0;
    double exact = exact_T_norm(lat, rho);
    PowerIterReport rep =
        estimate_weighted_norm(CzOperator::T, lat, rho, Weight::one_point(0.0), 20000, seed);
    put("T_norm_error", std::abs(rep.norm - exact), std::abs(rep.norm - exact) < 1e-6);
  }
  // Gaussian Helffer-Sjostrand identity
  {
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> N01(0.0, 1.0);
    LatticeField f(lat), g(lat);
    for (auto& v : f.v) v = N01(rng);
    for (auto& v : g.v) v = N01(rng);
    double mf = 0.0, mg = 0.0;
    for (double v : f.v) mf += v;
    for (double v : g.v) mg += v;
    for (auto& v : f.v) v -= mf / lat.sites();
    for (auto& v : g.v) v -= mg / lat.sites();
    HsReport hs = gaussian_hs_check(lat, 1.0, m, f, g);
    put("gaussian_hs_diff", hs.abs_diff, hs.ok);
  }
  // telescoping identity through h_Q
  {
    HQField hq = build_hq(lat, 1e-5, seed + 2);
    put("telescoping_error", hq.telescope_err, hq.ok);
  }
  // potential constants
  {
    CertifyReport cr = certify_constants(*V, 2000, seed + 3);
    put("potential_certified", cr.min_eig_margin, cr.ok);
  }
  // quenched one-variable solve against the dense oracle on a small lattice
  {
    TorusLattice small(d, 8);
    QuenchedProblem p;
    p.lat = &small;
    p.V = V;
    p.rho_s = 1.0;
    p.m = m;
    p.phi = LatticeField(small);
    std::mt19937_64 rng(seed + 4);
    std::normal_distribution<double> N01(0.0, 1.0);
    for (auto& v : p.phi.v) v = N01(rng);
    VectorField h(small);
    for (auto& v : h.v) v = N01(rng);
    NeumannReport rep = solve_one_variable(p, h, 1e-12, 500);
    VectorField oracle = solve_one_variable_direct(p, h);
    double dn = 0.0;
    for (std::size_t i = 0; i < oracle.v.size(); i++) {
      double dd = rep.solution.v[i] - oracle.v[i];
      dn += dd * dd;
    }
    double rel = std::sqrt(dn) / std::sqrt(norm2(oracle));
    put("neumann_vs_dense", rel, rep.converged && rel < 1e-8);
  }
  if (!all) return kNumericalError;
  (void)strict;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{kVersion};
  app.require_subcommand(1);
  std::string config_path, out_path = "result.csv";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool strict = false;
  app.add_option("--threads", threads, "worker thread budget")->check(CLI::PositiveNumber);
  app.add_flag("--strict", strict, "treat flagged non-convergence as fatal");

  std::vector<std::string> names = {"green",  "czo-norm",  "neumann",
                                    "sample", "cumulants", "verify-all"};
  std::map<std::string, CLI::App*> subs;
  for (const auto& n : names) {
    CLI::App* s = app.add_subcommand(n);
    s->add_option("--config", config_path, "experiment config file")->required();
    s->add_option("--out", out_path, "output CSV path");
    s->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; seed_given = true; }, "RNG seed");
    subs[n] = s;
  }

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands()[0]->get_name();

  try {
    Config cfg = Config::parse(config_path);
    bool stochastic = command != "green";
    if (stochastic && !seed_given) {
      if (const auto* e = cfg.find("seed"))
        seed = static_cast<std::uint64_t>(std::stoull(e->value));
      else
        throw ConfigError("seed is required for command '" + command +
                          "' (--seed or config key)");
    } else {
      cfg.find("seed");  // consume when present; the flag takes precedence
    }
    auto t0 = std::chrono::steady_clock::now();
    int rc;
    if (command == "green")
      rc = cmd_green(cfg, out_path);
    else if (command == "czo-norm")
      rc = cmd_czo_norm(cfg, out_path, seed, strict);
    else if (command == "neumann")
      rc = cmd_neumann(cfg, out_path, seed, strict);
    else if (command == "sample")
      rc = cmd_sample(cfg, out_path, seed, strict);
    else if (command == "cumulants")
      rc = cmd_cumulants(cfg, out_path, seed, strict);
    else
      rc = cmd_verify_all(cfg, out_path, seed, strict);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_provenance(out_path, command, cfg, seed, wall);
    return rc;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "precondition violated: %s\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumericalError;
  }
}
