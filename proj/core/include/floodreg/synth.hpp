#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "floodreg/gev.hpp"
#include "floodreg/station.hpp"

namespace floodreg {

// Synthetic basin: attributes drawn log-uniformly, true GEV parameters built
// from the log-linear links, records sampled by inverse CDF with an optional
// common-shock year coupling across stations.
struct SynthConfig {
  int m = 30;                       // station count
  int min_years = 30;
  int max_years = 120;
  int final_year = 2015;            // records end here, start years differ
  std::vector<double> alpha;        // K+1 link coefficients for log mu
  std::vector<double> beta;         // K+1 link coefficients for log sigma
  double xi = 0.15;
  CovariateSchema schema;
  std::vector<std::pair<double, double>> attribute_ranges;  // per schema entry, log-uniform
  double coord_extent = 200000.0;   // centroids uniform in [0, extent]^2, meters
  double dependence = 0.0;          // probability a year's draw is the basin-wide shock
  std::uint64_t seed = 1;

  void validate() const;
};

// Defaults shaped like the canonical attribute table: size, altitude and the
// two precipitation means with plausible alpine ranges.
SynthConfig default_synth_config();

struct SynthBasin {
  std::vector<Station> stations;
  std::vector<GevParams> true_params;  // aligned with stations
  SynthConfig config;
};

SynthBasin generate_basin(const SynthConfig& config);

// True T-year level at a basin station; the oracle estimators are scored
// against. Throws std::invalid_argument for an unknown station.
double true_quantile(const SynthBasin& basin, const std::string& station_id, double T);

}  // namespace floodreg
