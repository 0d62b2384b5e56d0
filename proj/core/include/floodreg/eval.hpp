#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "floodreg/gev.hpp"
#include "floodreg/station.hpp"

namespace floodreg {

// A regionalization method under evaluation: estimates return levels at a
// target treated as ungauged, using only the remaining pool.
struct LooMethod {
  std::string name;
  std::function<std::vector<double>(const Station& target, const std::vector<Station>& pool,
                                    const std::vector<double>& T_grid)>
      estimate;
};

struct LooReport {
  struct Row {
    std::string station;
    std::string method;
    double T;
    double estimate;
    double baseline;  // local GEV level at the held-out station
    double rel_dev;   // (estimate - baseline) / baseline
  };
  struct Aggregate {
    std::string method;
    double T;
    double bias;
    double rmse;
    std::size_t n;  // stations entering the aggregate
  };
  std::vector<Row> rows;
  std::vector<Aggregate> aggregates;
  std::map<std::string, std::size_t> failures;  // per method
};

// Leave-one-out over the gauged set: each station in turn is estimated from
// the others and compared to its local GEV level via relative deviations.
// Method failures at a station drop its rows and are counted.
LooReport loo_evaluate(const std::vector<Station>& stations,
                       const std::vector<LooMethod>& methods,
                       const std::vector<double>& T_grid, unsigned threads = 0);

struct RoiConfig;  // roi.hpp

// The three competing regionalizations of the study, packaged for
// loo_evaluate. The cluster and CCA methods feed quantile regression on the
// selected region; an empty CCA region retries with a doubled radius twice
// before counting as a failure.
LooMethod make_roi_method(const RoiConfig& config, const CovariateSchema& schema);
LooMethod make_cluster_method(std::size_t C, const CovariateSchema& schema);
LooMethod make_cca_method(double radius, const CovariateSchema& schema);

// Tuning-parameter scans: minimize leave-one-out RMSE at the given return
// period. Ties go to the smaller candidate.
std::size_t tune_cluster_count(const std::vector<Station>& stations,
                               const CovariateSchema& schema, double T,
                               unsigned threads = 0);
double tune_cca_radius(const std::vector<Station>& stations, const CovariateSchema& schema,
                       double T, unsigned threads = 0);

// Disjoint, ordered calendar-year intervals covering the record span.
struct Strata {
  struct Interval {
    int first;
    int last;  // inclusive
  };
  std::vector<Interval> intervals;

  void validate() const;
};

// Quartile split of the pooled year range (the default stratification).
Strata default_strata(const std::vector<Station>& stations, std::size_t count = 4);

struct BootstrapResult {
  std::size_t R = 0;        // completed replicates
  std::size_t failed = 0;   // excluded replicates
  double alpha = 0.05;
  std::vector<std::vector<double>> replicate_estimates;  // per replicate, per grid point
  std::vector<double> lower;  // empirical alpha/2 quantiles per grid point
  std::vector<double> upper;  // empirical 1-alpha/2 quantiles
};

// Estimator evaluated on a resampled station set; the vector is one value
// per requested grid point (e.g. per return period).
using BootstrapEstimator =
    std::function<std::vector<double>(const std::vector<Station>& resampled)>;

// Stratified nonparametric bootstrap: within each stratum, calendar years
// are drawn with replacement and the full cross-section of stations for a
// drawn year is taken, so spatial dependence is preserved. Stations not
// gauged in a drawn year simply lack that observation. Failing replicates
// are dropped; if more than 5% fail the run errors out.
BootstrapResult stratified_bootstrap(const std::vector<Station>& stations, const Strata& strata,
                                     std::size_t R, const BootstrapEstimator& estimator,
                                     double alpha, std::uint64_t seed, unsigned threads = 0);

// Tabular plot data; io::write_table serializes with fixed headers.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// Rows (T, level[, lower, upper]) over a log-spaced grid of return periods.
Table emit_return_level_curve(const GevParams& fit, double T_min, double T_max, std::size_t n,
                              const std::optional<BootstrapResult>& bootstrap = std::nullopt);

// Rows (p, model_q, empirical_q) at plotting positions i/(N+1).
Table emit_qq(const GevParams& fit, const std::vector<double>& maxima);

// Discharge per unit catchment area, m^3/s per km^2.
double specific_discharge(double q, double catchment_size_km2);

}  // namespace floodreg
