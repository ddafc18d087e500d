#pragma once

#include <functional>
#include <vector>

namespace gradlab {

// Unbiased cumulant estimators (Fisher k-statistics) for a scalar sample.
struct KStats {
  std::size_t n = 0;
  double mean = 0.0;
  double k2 = 0.0;  // unbiased variance
  double k3 = 0.0;  // unbiased third cumulant
};

KStats k_statistics(const std::vector<double>& x);

struct JackknifeReport {
  double value = 0.0;  // statistic on the pooled sample
  double se = 0.0;     // delete-one-chain jackknife standard error
};

// Jackknife over chains: `stat` is evaluated on the pooled sample and on each
// leave-one-chain-out pool.  Needs at least two chains.
JackknifeReport jackknife_chains(
    const std::vector<std::vector<double>>& chains,
    const std::function<double(const std::vector<double>&)>& stat);

// Split-chain potential scale reduction factor.  Each chain is split in half,
// so m chains contribute 2m sequences.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Effective sample size of the pooled chains, from the autocorrelation of
// each chain combined with Geyer's initial positive sequence truncation.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;  // from the supplied point errors when given
};

// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Weighted least squares with per-point standard errors sigma (> 0); the
// reported slope_se is the propagated parameter error.
LinearFit linear_fit_weighted(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma);

}  // namespace gradlab
