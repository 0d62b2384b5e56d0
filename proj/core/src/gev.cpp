#include "floodreg/gev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "floodreg/errors.hpp"
#include "floodreg/optim.hpp"

namespace floodreg {

namespace {

constexpr double kEulerGamma = 0.5772156649015329;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Reduced variable w = log(1 + xi*z)/xi, the exponent scale on which the
// GEV is a unit Gumbel. Returns -inf outside the support.
double reduced(double z, double xi) {
  if (std::abs(xi) < kGumbelSwitch) return z - 0.5 * xi * z * z;
  const double t = 1.0 + xi * z;
  if (t <= 0.0) return kNegInf;
  return std::log1p(xi * z) / xi;
}

void check_params(const GevParams& p) {
  if (!(p.sigma > 0.0)) throw std::invalid_argument("GEV scale must be positive");
}

}  // namespace

bool GevParams::in_support(double x) const {
  if (std::abs(xi) < kGumbelSwitch) return true;
  return 1.0 + xi * (x - mu) / sigma > 0.0;
}

double gev_cdf(double x, const GevParams& p) {
  check_params(p);
  const double z = (x - p.mu) / p.sigma;
  if (std::abs(p.xi) >= kGumbelSwitch && 1.0 + p.xi * z <= 0.0)
    return p.xi > 0.0 ? 0.0 : 1.0;
  const double w = reduced(z, p.xi);
  return std::exp(-std::exp(-w));
}

double gev_logpdf(double x, const GevParams& p) {
  check_params(p);
  const double z = (x - p.mu) / p.sigma;
  const double w = reduced(z, p.xi);
  if (!std::isfinite(w)) return kNegInf;
  return -std::log(p.sigma) - (1.0 + p.xi) * w - std::exp(-w);
}

double gev_quantile(double prob, const GevParams& p) {
  check_params(p);
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("quantile probability must lie in (0,1)");
  const double ly = std::log(-std::log(prob));
  double h;  // (exp(-xi*ly) - 1)/xi, the Gumbel quantile -ly as xi -> 0
  if (std::abs(p.xi) < kGumbelSwitch) {
    h = -ly + 0.5 * p.xi * ly * ly;
  } else {
    h = std::expm1(-p.xi * ly) / p.xi;
  }
  return p.mu + p.sigma * h;
}

double return_level(double T, const GevParams& p) {
  if (!(T > 1.0)) throw std::invalid_argument("return period must exceed 1 year");
  return gev_quantile(1.0 - 1.0 / T, p);
}

double gev_loglik(std::span<const double> sample, const GevParams& p) {
  double ll = 0.0;
  for (double x : sample) {
    const double l = gev_logpdf(x, p);
    if (!std::isfinite(l)) return kNegInf;
    ll += l;
  }
  return ll;
}

LMoments sample_lmoments(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw std::invalid_argument("need at least 3 observations for L-moments");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi1 = static_cast<double>(i);  // (rank-1)
    b0 += x[i];
    b1 += x[i] * xi1 / (nd - 1.0);
    b2 += x[i] * xi1 * (xi1 - 1.0) / ((nd - 1.0) * (nd - 2.0));
  }
  b0 /= nd;
  b1 /= nd;
  b2 /= nd;
  LMoments lm;
  lm.l1 = b0;
  lm.l2 = 2.0 * b1 - b0;
  const double l3 = 6.0 * b2 - 6.0 * b1 + b0;
  lm.t3 = lm.l2 != 0.0 ? l3 / lm.l2 : 0.0;
  return lm;
}

GevParams lmoment_fit(std::span<const double> sample) {
  const LMoments lm = sample_lmoments(sample);
  GevParams p;
  if (!(lm.l2 > 0.0)) {
    // essentially constant sample; fall back to a vague Gumbel
    p.mu = lm.l1;
    p.sigma = std::max(1e-8, std::abs(lm.l1)) * 1e-3;
    p.xi = 0.0;
    return p;
  }
  // Hosking's approximation, k = -xi
  const double c = 2.0 / (3.0 + lm.t3) - std::log(2.0) / std::log(3.0);
  const double k = 7.8590 * c + 2.9554 * c * c;
  if (std::abs(k) < 1e-8) {
    p.sigma = lm.l2 / std::log(2.0);
    p.mu = lm.l1 - kEulerGamma * p.sigma;
    p.xi = 0.0;
    return p;
  }
  const double g = std::tgamma(1.0 + k);
  p.sigma = lm.l2 * k / ((1.0 - std::pow(2.0, -k)) * g);
  p.mu = lm.l1 - p.sigma * (1.0 - g) / k;
  p.xi = -k;
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu)) {
    p.mu = lm.l1;
    p.sigma = lm.l2 / std::log(2.0);
    p.xi = 0.0;
  }
  return p;
}

namespace {

// Pull the start point inside the feasible region: every observation must be
// in-support and the shape within its box.
GevParams make_feasible(GevParams p, std::span<const double> sample) {
  p.xi = std::clamp(p.xi, kXiMin + 0.05, kXiMax - 0.1);
  for (int attempt = 0; attempt < 60; ++attempt) {
    if (std::isfinite(gev_loglik(sample, p))) return p;
    p.sigma *= 1.5;
    p.xi *= 0.5;
  }
  throw NonConvergence("could not find a feasible GEV starting point");
}

double penalized_negloglik(std::span<const double> sample, double mu, double log_sigma,
                           double xi) {
  if (!(xi > kXiMin) || !(xi < kXiMax)) return std::numeric_limits<double>::infinity();
  const GevParams p{mu, std::exp(log_sigma), xi};
  const double ll = gev_loglik(sample, p);
  return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
}

}  // namespace

FitResult fit_local(std::span<const double> maxima, int min_record) {
  const std::size_t n = maxima.size();
  if (static_cast<int>(n) < min_record)
    throw std::invalid_argument("record too short: " + std::to_string(n) + " < " +
                                std::to_string(min_record) + " years");
  // positivity of discharges is an ingestion-level rule; the likelihood
  // itself only needs finite observations
  for (double x : maxima)
    if (!std::isfinite(x)) throw std::invalid_argument("annual maxima must be finite");
  const auto [mn, mx] = std::minmax_element(maxima.begin(), maxima.end());
  if (*mn == *mx) throw DegenerateSample("all annual maxima are equal");

  const GevParams start = make_feasible(lmoment_fit(maxima), maxima);
  auto objective = [&](std::span<const double> th) {
    return penalized_negloglik(maxima, th[0], th[1], th[2]);
  };
  SimplexResult r =
      minimize_simplex(objective, {start.mu, std::log(start.sigma), start.xi});
  if (!std::isfinite(r.f)) throw NonConvergence("GEV likelihood search stalled");

  FitResult fit;
  fit.params = GevParams{r.x[0], std::exp(r.x[1]), r.x[2]};
  fit.loglik = -r.f;
  fit.converged = r.converged;
  fit.iterations = r.iterations;
  return fit;
}

TrendFit fit_trend(std::span<const double> maxima, std::span<const int> years) {
  if (maxima.size() != years.size())
    throw std::invalid_argument("maxima and years must have equal length");
  for (std::size_t i = 1; i < years.size(); ++i)
    if (years[i] <= years[i - 1])
      throw std::invalid_argument("years must be strictly increasing");

  TrendFit out;
  out.stationary = fit_local(maxima);

  double tbar = 0.0;
  for (int y : years) tbar += y;
  tbar /= static_cast<double>(years.size());

  // theta = (mu0, mu_slope, log_sigma0, sigma_logslope, xi)
  auto negloglik = [&](std::span<const double> th) {
    if (!(th[4] > kXiMin) || !(th[4] < kXiMax))
      return std::numeric_limits<double>::infinity();
    double ll = 0.0;
    for (std::size_t i = 0; i < maxima.size(); ++i) {
      const double dt = static_cast<double>(years[i]) - tbar;
      const GevParams p{th[0] + th[1] * dt, std::exp(th[2] + th[3] * dt), th[4]};
      const double l = gev_logpdf(maxima[i], p);
      if (!std::isfinite(l)) return std::numeric_limits<double>::infinity();
      ll += l;
    }
    return -ll;
  };

  const GevParams s = out.stationary.params;
  SimplexResult r = minimize_simplex(negloglik, {s.mu, 0.0, std::log(s.sigma), 0.0, s.xi});
  if (!std::isfinite(r.f)) throw NonConvergence("trend likelihood search stalled");

  out.trend_loglik = -r.f;
  out.mu_slope = r.x[1];
  out.sigma_logslope = r.x[3];
  // nested models: started at the stationary optimum, so the gap is >= 0
  const double lr = 2.0 * (out.trend_loglik - out.stationary.loglik);
  out.lr_pvalue = std::clamp(std::exp(-0.5 * std::max(lr, 0.0)), 0.0, 1.0);
  return out;
}

}  // namespace floodreg
