#include "gradlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gradlab {

KStats k_statistics(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 3) throw std::domain_error("k_statistics: need at least 3 samples");
  KStats out;
  out.n = n;
  double s = 0.0;
  for (double v : x) s += v;
  out.mean = s / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    double d = v - out.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  double nd = static_cast<double>(n);
  out.k2 = nd / (nd - 1.0) * m2;
  out.k3 = nd * nd / ((nd - 1.0) * (nd - 2.0)) * m3;
  return out;
}

JackknifeReport jackknife_chains(
    const std::vector<std::vector<double>>& chains,
    const std::function<double(const std::vector<double>&)>& stat) {
  const std::size_t m = chains.size();
  if (m < 2) throw std::domain_error("jackknife_chains: need at least 2 chains");
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  JackknifeReport rep;
  rep.value = stat(pooled);
  std::vector<double> loo(m);
  double mean_loo = 0.0;
  for (std::size_t i = 0; i < m; i++) {
    std::vector<double> rest;
    rest.reserve(pooled.size());
    for (std::size_t j = 0; j < m; j++)
      if (j != i) rest.insert(rest.end(), chains[j].begin(), chains[j].end());
    loo[i] = stat(rest);
    mean_loo += loo[i];
  }
  mean_loo /= m;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  rep.se = std::sqrt((m - 1.0) / m * ss);
  return rep;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    std::size_t h = c.size() / 2;
    if (h < 2) throw std::domain_error("split_rhat: chains too short");
    halves.emplace_back(c.begin(), c.begin() + h);
    halves.emplace_back(c.begin() + h, c.begin() + 2 * h);
  }
  const std::size_t m = halves.size();
  const std::size_t n = halves[0].size();
  for (auto& h : halves) h.resize(n);
  std::vector<double> means(m);
  double grand = 0.0;
  for (std::size_t i = 0; i < m; i++) {
    double s = 0.0;
    for (double v : halves[i]) s += v;
    means[i] = s / n;
    grand += means[i];
  }
  grand /= m;
  double B = 0.0;
  for (double mu : means) B += (mu - grand) * (mu - grand);
  B *= static_cast<double>(n) / (m - 1.0);
  double W = 0.0;
  for (std::size_t i = 0; i < m; i++) {
    double s = 0.0;
    for (double v : halves[i]) s += (v - means[i]) * (v - means[i]);
    W += s / (n - 1.0);
  }
  W /= m;
  if (W <= 0.0) return 1.0;
  double var_plus = (n - 1.0) / n * W + B / n;
  return std::sqrt(var_plus / W);
}

namespace {

// per-chain autocovariances via direct sums (chains are short enough here)
std::vector<double> autocov(const std::vector<double>& x, std::size_t max_lag) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  std::vector<double> g(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; lag++) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; t++)
      s += (x[t] - mean) * (x[t + lag] - mean);
    g[lag] = s / n;
  }
  return g;
}

}  // namespace

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  std::size_t total = 0;
  for (const auto& c : chains) {
    if (c.size() < 8) throw std::domain_error("effective_sample_size: chains too short");
    total += c.size();
  }
  // average autocovariance across chains, normalized by the average variance
  std::size_t nmin = chains[0].size();
  for (const auto& c : chains) nmin = std::min(nmin, c.size());
  std::size_t max_lag = std::min<std::size_t>(nmin - 2, 2000);
  std::vector<double> g(max_lag + 1, 0.0);
  for (const auto& c : chains) {
    auto gc = autocov(c, max_lag);
    for (std::size_t l = 0; l <= max_lag; l++) g[l] += gc[l];
  }
  for (auto& v : g) v /= chains.size();
  if (g[0] <= 0.0) return static_cast<double>(total);
  // Geyer initial positive sequence on pair sums
  double tau = 1.0;
  for (std::size_t l = 1; l + 1 <= max_lag; l += 2) {
    double pair = (g[l] + g[l + 1]) / g[0];
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(total) / tau;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> sigma(x.size(), 1.0);
  LinearFit f = linear_fit_weighted(x, y, sigma);
  // unit weights carry no error information; report the regression SE instead
  const std::size_t n = x.size();
  if (n > 2) {
    double ss_res = 0.0, sx = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; i++) {
      double r = y[i] - f.intercept - f.slope * x[i];
      ss_res += r * r;
      sx += x[i];
      sxx += x[i] * x[i];
    }
    double denom = sxx - sx * sx / n;
    f.slope_se = denom > 0.0 ? std::sqrt(ss_res / (n - 2) / denom) : 0.0;
  }
  return f;
}

LinearFit linear_fit_weighted(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || sigma.size() != n)
    throw std::invalid_argument("linear_fit: need matching arrays, n >= 2");
  double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
  for (std::size_t i = 0; i < n; i++) {
    if (sigma[i] <= 0.0) throw std::domain_error("linear_fit: sigma must be positive");
    double w = 1.0 / (sigma[i] * sigma[i]);
    S += w;
    Sx += w * x[i];
    Sy += w * y[i];
    Sxx += w * x[i] * x[i];
    Sxy += w * x[i] * y[i];
  }
  double delta = S * Sxx - Sx * Sx;
  if (delta <= 0.0) throw std::domain_error("linear_fit: degenerate abscissae");
  LinearFit f;
  f.slope = (S * Sxy - Sx * Sy) / delta;
  f.intercept = (Sxx * Sy - Sx * Sxy) / delta;
  f.slope_se = std::sqrt(S / delta);
  double ybar = Sy / S;
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < n; i++) {
    double w = 1.0 / (sigma[i] * sigma[i]);
    double r = y[i] - f.intercept - f.slope * x[i];
    ss_res += w * r * r;
    ss_tot += w * (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace gradlab
