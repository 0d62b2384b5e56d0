#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "floodreg/errors.hpp"
#include "floodreg/regional.hpp"
#include "floodreg/synth.hpp"
#include "test_util.hpp"

using namespace floodreg;

namespace {

SynthBasin recovery_basin(std::uint64_t seed, int m = 20, int years = 80) {
  return generate_basin(test::conditioned_config(seed, m, years));
}

}  // namespace

TEST_CASE("regional fit recovers the generator coefficients") {
  const SynthBasin basin = recovery_basin(12);
  const RegionalModel model = fit_regional(basin.stations, basin.config.schema);
  for (std::size_t k = 0; k < basin.config.alpha.size(); ++k) {
    CHECK(std::abs(model.alpha[k] - basin.config.alpha[k]) < 0.05);
    CHECK(std::abs(model.beta[k] - basin.config.beta[k]) < 0.05);
  }
  CHECK(std::abs(model.xi - basin.config.xi) < 0.03);
}

TEST_CASE("regional loglik dominates its initialization") {
  const SynthBasin basin = recovery_basin(31, 12, 50);
  const RegionalModel model = fit_regional(basin.stations, basin.config.schema);

  // initialization point: per-station L-moment fits regressed on log attrs
  // is hard to rebuild exactly here, but the pooled likelihood of the fitted
  // model must beat the naive per-station-mean start by construction; check
  // against the generator truth instead, which the MLE should edge out or
  // approach within noise.
  double ll_truth = 0.0;
  for (std::size_t j = 0; j < basin.stations.size(); ++j)
    ll_truth += gev_loglik(basin.stations[j].maxima, basin.true_params[j]);
  CHECK(model.loglik > ll_truth - 50.0);
}

TEST_CASE("constant covariate is rank deficient") {
  SynthBasin basin = recovery_basin(5, 10, 40);
  for (auto& s : basin.stations) s.attributes["altitude_m"] = 1000.0;
  CHECK_THROWS_AS(fit_regional(basin.stations, basin.config.schema), RankDeficientCovariates);
}

TEST_CASE("intercept-only regional fit equals the pooled local fit") {
  const GevParams truth{120.0, 35.0, 0.1};
  std::vector<Station> stations;
  for (int j = 0; j < 4; ++j) {
    Station s;
    s.id = "s" + std::to_string(j);
    s.maxima = test::sample_gev(truth, 60, 500 + j);
    for (std::size_t i = 0; i < s.maxima.size(); ++i) s.years.push_back(1950 + (int)i);
    stations.push_back(std::move(s));
  }
  const CovariateSchema empty{};
  const RegionalModel model = fit_regional(stations, empty);

  std::vector<double> pooled;
  for (const auto& s : stations) pooled.insert(pooled.end(), s.maxima.begin(), s.maxima.end());
  const FitResult local = fit_local(pooled);

  CHECK(std::exp(model.alpha[0]) == doctest::Approx(local.params.mu).epsilon(1e-3));
  CHECK(std::exp(model.beta[0]) == doctest::Approx(local.params.sigma).epsilon(1e-3));
  CHECK(model.xi == doctest::Approx(local.params.xi).epsilon(0.01));
  CHECK(model.loglik == doctest::Approx(local.loglik).epsilon(1e-6));
}

TEST_CASE("prediction follows the log links") {
  RegionalModel model;
  model.schema = CovariateSchema{{"a", "b"}};
  model.alpha = {std::log(100.0), 0.0, 0.0};
  model.beta = {std::log(30.0), 0.0, 0.0};
  model.xi = 0.12;
  const GevParams p = predict_params(model, {7.0, 11.0});
  CHECK(p.mu == doctest::Approx(100.0));
  CHECK(p.sigma == doctest::Approx(30.0));
  CHECK(p.xi == 0.12);

  model.alpha = {std::log(100.0), 0.4, 0.0};
  const GevParams base = predict_params(model, {2.0, 11.0});
  const GevParams doubled = predict_params(model, {4.0, 11.0});
  CHECK(doubled.mu / base.mu == doctest::Approx(std::pow(2.0, 0.4)));

  CHECK_THROWS_AS(predict_params(model, {1.0}), SchemaMismatch);
  CHECK_THROWS_AS(predict_params(model, {1.0, -3.0}), std::invalid_argument);
}

TEST_CASE("held-out station parameters from the generator oracle") {
  const SynthBasin basin = recovery_basin(8, 21, 80);
  std::vector<Station> pool(basin.stations.begin(), basin.stations.end() - 1);
  const Station& held_out = basin.stations.back();
  const GevParams truth = basin.true_params.back();

  const RegionalModel model = fit_regional(pool, basin.config.schema);
  const GevParams pred = predict_params(model, held_out);
  CHECK(std::abs(pred.mu - truth.mu) / truth.mu < 0.05);
  CHECK(std::abs(pred.sigma - truth.sigma) / truth.sigma < 0.05);
}

TEST_CASE("fit is invariant to station order") {
  SynthBasin basin = recovery_basin(44, 10, 60);
  const RegionalModel a = fit_regional(basin.stations, basin.config.schema);
  std::reverse(basin.stations.begin(), basin.stations.end());
  const RegionalModel b = fit_regional(basin.stations, basin.config.schema);
  for (std::size_t k = 0; k < a.alpha.size(); ++k) {
    CHECK(std::abs(a.alpha[k] - b.alpha[k]) < 1e-10);
    CHECK(std::abs(a.beta[k] - b.beta[k]) < 1e-10);
  }
  CHECK(std::abs(a.xi - b.xi) < 1e-10);
}

TEST_CASE("quantile regression: noiseless log-linear data is interpolated") {
  const CovariateSchema schema{{"a", "b"}};
  std::vector<Station> stations;
  std::vector<double> levels;
  const std::vector<double> alpha{1.0, 0.7, -0.3};
  Rng rng = make_rng(3);
  for (int j = 0; j < 8; ++j) {
    Station s;
    s.id = "s" + std::to_string(j);
    const double a = 1.0 + uniform_open(rng) * 9.0;
    const double b = 2.0 + uniform_open(rng) * 5.0;
    s.attributes = {{"a", a}, {"b", b}};
    stations.push_back(std::move(s));
    levels.push_back(std::exp(alpha[0] + alpha[1] * std::log(a) + alpha[2] * std::log(b)));
  }
  const QuantRegModel model = fit_quantreg_responses(stations, levels, 100.0, schema);
  CHECK(model.residual_sd < 1e-8);
  CHECK(model.alpha[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(model.alpha[1] == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(model.alpha[2] == doctest::Approx(-0.3).epsilon(1e-8));
  for (std::size_t j = 0; j < stations.size(); ++j)
    CHECK(predict_quantile(model, stations[j]) == doctest::Approx(levels[j]).epsilon(1e-9));
}

TEST_CASE("quantile regression: saturated case has zero residual sd") {
  const CovariateSchema schema{{"a", "b"}};
  std::vector<Station> stations;
  std::vector<double> levels{10.0, 20.0, 15.0};  // K+1 = 3 stations
  const double attrs[3][2] = {{1.0, 2.0}, {3.0, 5.0}, {9.0, 4.0}};
  for (int j = 0; j < 3; ++j) {
    Station s;
    s.id = "s" + std::to_string(j);
    s.attributes = {{"a", attrs[j][0]}, {"b", attrs[j][1]}};
    stations.push_back(std::move(s));
  }
  const QuantRegModel model = fit_quantreg_responses(stations, levels, 50.0, schema);
  CHECK(model.residual_sd == 0.0);
  for (int j = 0; j < 3; ++j)
    CHECK(predict_quantile(model, stations[j]) == doctest::Approx(levels[j]).epsilon(1e-9));
}

TEST_CASE("quantile regression on a synthetic region finds a positive size elasticity") {
  const SynthBasin basin = recovery_basin(13, 20, 60);
  const QuantRegModel model = fit_quantreg(basin.stations, 100.0, basin.config.schema);
  CHECK(model.alpha[1] > 0.0);  // size slope

  // held-out prediction lands near the generator truth
  std::vector<Station> pool(basin.stations.begin(), basin.stations.end() - 1);
  const QuantRegModel loo = fit_quantreg(pool, 100.0, basin.config.schema);
  const double est = predict_quantile(loo, basin.stations.back());
  const double truth = true_quantile(basin, basin.stations.back().id, 100.0);
  CHECK(std::abs(est - truth) / truth < 0.15);
}

TEST_CASE("quantile regression rejects deficient designs and trivial predictions hold") {
  const CovariateSchema schema{{"a"}};
  std::vector<Station> stations(4);
  std::vector<double> levels{500.0, 500.0, 500.0, 500.0};
  for (int j = 0; j < 4; ++j) {
    stations[j].id = "s" + std::to_string(j);
    stations[j].attributes = {{"a", 3.0}};  // constant: collinear with intercept
  }
  CHECK_THROWS_AS(fit_quantreg_responses(stations, levels, 50.0, schema),
                  RankDeficientCovariates);

  QuantRegModel flat;
  flat.schema = schema;
  flat.alpha = {std::log(500.0), 0.0};
  flat.T = 50.0;
  CHECK(predict_quantile(flat, {123.0}) == doctest::Approx(500.0));
}
