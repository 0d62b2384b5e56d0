#pragma once

#include <span>
#include <vector>

namespace floodreg {

// Switch to the Gumbel branch (with a second-order correction in xi) below
// this shape magnitude; avoids cancellation in log1p(xi*z)/xi.
inline constexpr double kGumbelSwitch = 1e-9;

// Shape parameter range accepted by the fitters: the MLE loses regularity
// below -0.5 and annual-maximum discharges empirically stay below 1.
inline constexpr double kXiMin = -0.5;
inline constexpr double kXiMax = 1.0;

struct GevParams {
  double mu = 0.0;     // location, m^3/s
  double sigma = 1.0;  // scale, m^3/s, > 0
  double xi = 0.0;     // shape, dimensionless

  bool valid() const { return sigma > 0.0; }

  // x is in-support iff 1 + xi*(x-mu)/sigma > 0 (all x in the Gumbel branch).
  bool in_support(double x) const;
};

struct FitResult {
  GevParams params;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct TrendFit {
  FitResult stationary;
  double trend_loglik = 0.0;
  double mu_slope = 0.0;        // location drift per year
  double sigma_logslope = 0.0;  // log-scale drift per year
  double lr_pvalue = 1.0;       // likelihood ratio against chi-squared(2)
};

// Sample L-moments from probability-weighted moments (ascending order stats).
struct LMoments {
  double l1 = 0.0;
  double l2 = 0.0;
  double t3 = 0.0;  // L-skewness l3/l2
};

double gev_cdf(double x, const GevParams& p);
double gev_logpdf(double x, const GevParams& p);

// Inverse CDF; rejects prob outside (0,1).
double gev_quantile(double prob, const GevParams& p);

// T-year return level, the (1 - 1/T)-quantile; rejects T <= 1.
double return_level(double T, const GevParams& p);

double gev_loglik(std::span<const double> sample, const GevParams& p);

LMoments sample_lmoments(std::span<const double> sample);

// Closed-form GEV parameter estimate from L-moments; the usual starting
// point for the likelihood search.
GevParams lmoment_fit(std::span<const double> sample);

// Local maximum-likelihood fit to an annual-maxima record. Simplex search
// started from the L-moment estimate, shape constrained to (kXiMin, kXiMax).
FitResult fit_local(std::span<const double> maxima, int min_record = 10);

// Nonstationarity check: linear drift in location and log-scale around the
// mean year, shared shape, likelihood-ratio p-value on 2 degrees of freedom.
TrendFit fit_trend(std::span<const double> maxima, std::span<const int> years);

}  // namespace floodreg
