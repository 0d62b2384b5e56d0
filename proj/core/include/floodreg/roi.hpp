#pragma once

#include <cstddef>
#include <vector>

#include "floodreg/distance.hpp"
#include "floodreg/regional.hpp"
#include "floodreg/station.hpp"

namespace floodreg {

struct RoiConfig {
  double epsilon = 0.05;   // lower bound on every weight
  std::size_t min_J = 8;   // minimal group size (7 for the at-site variant)
  std::size_t max_J = 0;   // 0: min(pool size, 25)
  double grid_step = 0.05; // simplex grid resolution
  double tau = 2.0;        // at-site emphasis, >= 1
  unsigned threads = 0;    // 0: hardware concurrency
};

struct RoiResult {
  DistanceSpec weights;
  std::size_t J = 0;
  Neighborhood members;
  double training_error = 0.0;
  RegionalModel model;
};

struct UngaugedEstimate {
  double value = 0.0;
  RoiResult roi;
};

// Mean squared relative deviation between model quantiles at plotting
// positions i/(N+1) and the ascending order statistics, pooled over the
// region and normalized by the total record length.
double training_error(const RegionalModel& model, const std::vector<Station>& region);

// Same inner sums with the target's contribution weighted by tau >= 1; the
// normalizer is the total record length of target plus region, unweighted.
double atsite_training_error(const RegionalModel& model, const Station& target,
                             const std::vector<Station>& region, double tau);

// All weight vectors w = epsilon + grid_step * v on the simplex, enumerated
// in ascending lexicographic order. grid_step must divide 1 - n*epsilon.
std::vector<std::vector<double>> enumerate_weight_grid(std::size_t n_weights, double epsilon,
                                                       double grid_step);

// Exhaustive search over the weight grid and group sizes J in
// [min_J, max_J]: each candidate region is the J nearest neighbors of the
// target, fitted as a regional GEV; returns the training-error minimizer.
// Ties break toward smaller J, then lexicographically smaller weights.
RoiResult find_roi(const Station& target, const std::vector<Station>& pool,
                   const RoiConfig& config, const CovariateSchema& schema);

// At-site variant: fits on {target} union region and minimizes the
// tau-weighted error. The target must carry its own record.
RoiResult find_roi_atsite(const Station& target, const std::vector<Station>& pool,
                          const RoiConfig& config, const CovariateSchema& schema);

// T-year level at an ungauged target from the optimal region's model.
UngaugedEstimate estimate_ungauged(const Station& target, const std::vector<Station>& pool,
                                   const RoiConfig& config, const CovariateSchema& schema,
                                   double T);

}  // namespace floodreg
