#include "floodreg/regional.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "floodreg/errors.hpp"
#include "floodreg/optim.hpp"

namespace floodreg {

namespace {

// Design matrix rows [1, log y_1, ..., log y_K]; rejects nonpositive values.
Eigen::MatrixXd log_design(const std::vector<Station>& stations, const CovariateSchema& schema) {
  const std::size_t m = stations.size();
  const std::size_t K = schema.size();
  Eigen::MatrixXd X(m, K + 1);
  for (std::size_t j = 0; j < m; ++j) {
    X(j, 0) = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double y = stations[j].attribute(schema.names[k]);
      if (!(y > 0.0))
        throw std::invalid_argument("attribute '" + schema.names[k] + "' at station '" +
                                    stations[j].id + "' must be strictly positive");
      X(j, k + 1) = std::log(y);
    }
  }
  return X;
}

void check_full_rank(const Eigen::MatrixXd& X) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols())
    throw RankDeficientCovariates("log-attribute design matrix is column-rank-deficient");
}

struct RegionData {
  Eigen::MatrixXd X;                        // m x (K+1)
  std::vector<std::vector<double>> records;  // per station
  std::size_t total_obs = 0;
};

double region_negloglik(const RegionData& data, std::span<const double> theta, std::size_t K) {
  const double xi = theta[2 * (K + 1)];
  if (!(xi > kXiMin) || !(xi < kXiMax)) return std::numeric_limits<double>::infinity();
  double ll = 0.0;
  for (std::size_t j = 0; j < data.records.size(); ++j) {
    double lmu = 0.0, lsig = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
      lmu += theta[k] * data.X(j, k);
      lsig += theta[K + 1 + k] * data.X(j, k);
    }
    const GevParams p{std::exp(lmu), std::exp(lsig), xi};
    if (!(p.sigma > 0.0) || !std::isfinite(p.mu) || !std::isfinite(p.sigma))
      return std::numeric_limits<double>::infinity();
    for (double x : data.records[j]) {
      const double l = gev_logpdf(x, p);
      if (!std::isfinite(l)) return std::numeric_limits<double>::infinity();
      ll += l;
    }
  }
  return -ll;
}

}  // namespace

RegionalModel fit_regional(const std::vector<Station>& stations, const CovariateSchema& schema) {
  schema.validate();
  const std::size_t m = stations.size();
  const std::size_t K = schema.size();
  if (m < 2) throw std::invalid_argument("regional fit needs at least 2 stations");

  RegionData data;
  data.X = log_design(stations, schema);
  check_full_rank(data.X);
  data.records.reserve(m);
  for (const auto& s : stations) {
    if (s.maxima.empty())
      throw std::invalid_argument("station '" + s.id + "' has no record");
    data.records.push_back(s.maxima);
    data.total_obs += s.maxima.size();
  }
  const std::size_t n_params = 2 * (K + 1) + 1;
  if (data.total_obs < 5 * n_params)
    throw std::invalid_argument("too few observations (" + std::to_string(data.total_obs) +
                                ") for " + std::to_string(n_params) + " parameters");

  // start: per-station L-moment fits, links regressed by least squares
  Eigen::VectorXd log_mu(m), log_sigma(m);
  double xi0 = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const GevParams p = lmoment_fit(data.records[j]);
    log_mu(j) = std::log(std::max(p.mu, 1e-12));
    log_sigma(j) = std::log(std::max(p.sigma, 1e-12));
    xi0 += std::clamp(p.xi, kXiMin + 0.05, kXiMax - 0.1);
  }
  xi0 /= static_cast<double>(m);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.X);
  Eigen::VectorXd a0 = qr.solve(log_mu);
  Eigen::VectorXd b0 = qr.solve(log_sigma);

  std::vector<double> theta(n_params);
  for (std::size_t k = 0; k <= K; ++k) {
    theta[k] = a0(k);
    theta[K + 1 + k] = b0(k);
  }
  theta[2 * (K + 1)] = xi0;

  // nudge toward feasibility: inflate scales, flatten shape
  for (int attempt = 0; attempt < 60; ++attempt) {
    if (std::isfinite(region_negloglik(data, theta, K))) break;
    theta[K + 1] += std::log(1.5);
    theta[2 * (K + 1)] *= 0.5;
  }
  if (!std::isfinite(region_negloglik(data, theta, K)))
    throw NonConvergence("no feasible starting point for the regional likelihood");

  auto objective = [&](std::span<const double> th) { return region_negloglik(data, th, K); };
  SimplexResult r = minimize_simplex(objective, theta);
  if (!std::isfinite(r.f)) throw NonConvergence("regional likelihood search stalled");

  RegionalModel model;
  model.alpha.assign(r.x.begin(), r.x.begin() + K + 1);
  model.beta.assign(r.x.begin() + K + 1, r.x.begin() + 2 * (K + 1));
  model.xi = r.x[2 * (K + 1)];
  model.schema = schema;
  model.loglik = -r.f;
  return model;
}

GevParams predict_params(const RegionalModel& model, const std::vector<double>& attributes) {
  const std::size_t K = model.schema.size();
  if (attributes.size() != K)
    throw SchemaMismatch("expected " + std::to_string(K) + " attributes, got " +
                         std::to_string(attributes.size()));
  double lmu = model.alpha[0], lsig = model.beta[0];
  for (std::size_t k = 0; k < K; ++k) {
    if (!(attributes[k] > 0.0))
      throw std::invalid_argument("attributes must be strictly positive");
    const double ly = std::log(attributes[k]);
    lmu += model.alpha[k + 1] * ly;
    lsig += model.beta[k + 1] * ly;
  }
  return GevParams{std::exp(lmu), std::exp(lsig), model.xi};
}

GevParams predict_params(const RegionalModel& model, const Station& station) {
  return predict_params(model, attribute_vector(station, model.schema));
}

QuantRegModel fit_quantreg(const std::vector<Station>& stations, double T,
                           const CovariateSchema& schema) {
  std::vector<double> levels;
  levels.reserve(stations.size());
  for (const auto& s : stations)
    levels.push_back(return_level(T, fit_local(s.maxima).params));
  return fit_quantreg_responses(stations, levels, T, schema);
}

QuantRegModel fit_quantreg_responses(const std::vector<Station>& stations,
                                     const std::vector<double>& levels, double T,
                                     const CovariateSchema& schema) {
  schema.validate();
  const std::size_t m = stations.size();
  const std::size_t K = schema.size();
  if (levels.size() != m) throw std::invalid_argument("one response per station required");
  if (m < K + 1)
    throw std::invalid_argument("quantile regression needs at least K+1 stations");

  Eigen::MatrixXd X = log_design(stations, schema);
  check_full_rank(X);
  Eigen::VectorXd y(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(levels[j] > 0.0))
      throw std::invalid_argument("quantile responses must be positive for the log link");
    y(j) = std::log(levels[j]);
  }
  Eigen::VectorXd coef = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(X).solve(y);
  const Eigen::VectorXd resid = y - X * coef;
  const std::size_t dof = m - (K + 1);

  QuantRegModel model;
  model.T = T;
  model.alpha.assign(coef.data(), coef.data() + K + 1);
  model.residual_sd = dof > 0 ? std::sqrt(resid.squaredNorm() / static_cast<double>(dof)) : 0.0;
  model.schema = schema;
  return model;
}

double predict_quantile(const QuantRegModel& model, const std::vector<double>& attributes) {
  const std::size_t K = model.schema.size();
  if (attributes.size() != K)
    throw SchemaMismatch("expected " + std::to_string(K) + " attributes, got " +
                         std::to_string(attributes.size()));
  double lq = model.alpha[0];
  for (std::size_t k = 0; k < K; ++k) {
    if (!(attributes[k] > 0.0))
      throw std::invalid_argument("attributes must be strictly positive");
    lq += model.alpha[k + 1] * std::log(attributes[k]);
  }
  return std::exp(lq);
}

double predict_quantile(const QuantRegModel& model, const Station& station) {
  return predict_quantile(model, attribute_vector(station, model.schema));
}

}  // namespace floodreg
