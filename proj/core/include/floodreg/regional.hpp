#pragma once

#include <vector>

#include "floodreg/gev.hpp"
#include "floodreg/station.hpp"

namespace floodreg {

// Regionalized GEV: log-linear links from catchment attributes to location
// and scale, one shape shared across the region.
struct RegionalModel {
  std::vector<double> alpha;  // K+1: intercept + log-attribute slopes for log mu
  std::vector<double> beta;   // K+1: same for log sigma
  double xi = 0.0;
  CovariateSchema schema;
  double loglik = 0.0;
};

// Log-linear regression of a fixed return level on log attributes, fitted by
// ordinary least squares.
struct QuantRegModel {
  double T = 0.0;
  std::vector<double> alpha;  // K+1
  double residual_sd = 0.0;
  CovariateSchema schema;
};

// Maximizes the independence likelihood (sum of per-station, per-year GEV
// log-densities) over the link coefficients and the common shape.
// Initialization: per-station L-moment fits regressed on log attributes.
RegionalModel fit_regional(const std::vector<Station>& stations, const CovariateSchema& schema);

GevParams predict_params(const RegionalModel& model, const std::vector<double>& attributes);
GevParams predict_params(const RegionalModel& model, const Station& station);

// OLS of log per-station T-year levels (from local GEV fits) on log
// attributes. Responses may be supplied to reuse cached local fits.
QuantRegModel fit_quantreg(const std::vector<Station>& stations, double T,
                           const CovariateSchema& schema);
QuantRegModel fit_quantreg_responses(const std::vector<Station>& stations,
                                     const std::vector<double>& levels, double T,
                                     const CovariateSchema& schema);

double predict_quantile(const QuantRegModel& model, const std::vector<double>& attributes);
double predict_quantile(const QuantRegModel& model, const Station& station);

}  // namespace floodreg
