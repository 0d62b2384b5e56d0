#pragma once

#include <string>
#include <vector>

#include "floodreg/station.hpp"

namespace floodreg {

// Normalization statistics computed over the gauged pool: per-attribute mean
// and standard deviation for z-scoring, plus the standard deviation of all
// pairwise centroid distances, which puts the Euclidean term on the same
// scale as the z-scored attributes.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> sd;
  double centroid_dist_sd = 1.0;
};

// Weight on centroid proximity (w0) plus one weight per schema attribute,
// nonnegative and summing to one.
struct DistanceSpec {
  double w0 = 0.0;
  std::vector<double> w;
  NormStats norm;

  bool valid() const;
};

struct Neighborhood {
  std::string target;
  std::vector<std::string> members;   // ascending distance, ties by id
  std::vector<double> distances;      // nondecreasing, aligned with members
};

// Per-attribute mean/sd over the gauged set (sample sd, n-1) and the pairwise
// centroid-distance scale. Throws ZeroVariance for a constant attribute.
NormStats normalize_attributes(const std::vector<Station>& stations,
                               const CovariateSchema& schema);

DistanceSpec make_distance_spec(double w0, std::vector<double> attr_weights, NormStats norm);

// Equal weight on proximity and every attribute.
DistanceSpec equal_weight_spec(const std::vector<Station>& stations,
                               const CovariateSchema& schema);

// Weighted Euclidean distance between catchments: centroid proximity plus
// z-scored attribute differences under the spec weights.
double hydro_distance(const Station& a, const Station& b, const DistanceSpec& spec,
                      const CovariateSchema& schema);

// The J pool stations closest to the target (target itself excluded from the
// candidates when present in the pool).
Neighborhood nearest_neighbors(const Station& target, const std::vector<Station>& pool,
                               const DistanceSpec& spec, const CovariateSchema& schema,
                               std::size_t J);

}  // namespace floodreg
