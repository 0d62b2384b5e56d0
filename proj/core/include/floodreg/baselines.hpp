#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "floodreg/distance.hpp"
#include "floodreg/station.hpp"

namespace floodreg {

// Fixed regions from Ward-linkage agglomeration of the hydrological
// distance matrix.
struct Clustering {
  struct Merge {
    std::size_t left;   // scipy-style node ids: 0..m-1 singletons, m+k merges
    std::size_t right;
    double cost;        // within-cluster variance increase
  };
  std::size_t C = 0;
  std::map<std::string, int> assignment;  // station id -> cluster id in [0, C)
  std::vector<Merge> merge_history;
};

// Per-station discharge characteristics for the CCA block: log mean annual
// maximum, log coefficient of variation, and L-skewness of the record.
std::array<double, 3> discharge_characteristics(const std::vector<double>& maxima);

// Joint-normal canonical model between log attributes and discharge
// characteristics. Regions of influence are Mahalanobis balls around the
// conditional mean of the canonical discharge scores.
struct CcaModel {
  std::size_t n_pairs = 0;
  std::vector<std::vector<double>> attr_weights;   // one canonical vector per pair
  std::vector<std::vector<double>> disch_weights;
  std::vector<double> correlations;                // descending, in [0, 1]
  std::vector<double> sigma_diag;                  // conditional variances 1 - rho^2
  std::vector<double> attr_mean;                   // of log attributes
  std::vector<double> disch_mean;
  double radius = 0.0;
  CovariateSchema schema;
};

// Ward agglomeration (Lance-Williams updates) cut at C clusters. Cluster ids
// are assigned by each cluster's lexicographically smallest member.
Clustering ward_cluster(const std::vector<Station>& stations, const DistanceSpec& spec,
                        const CovariateSchema& schema, std::size_t C);

// Cluster whose centroid (mean normalized feature vector) is nearest to the
// target under the spec; ties go to the lower cluster id.
int assign_ungauged(const Clustering& clustering, const Station& target,
                    const std::vector<Station>& stations, const DistanceSpec& spec,
                    const CovariateSchema& schema);

CcaModel fit_cca(const std::vector<Station>& stations, const CovariateSchema& schema,
                 const std::vector<std::array<double, 3>>& discharge_chars, double radius);

// Pool stations whose canonical discharge scores lie within Mahalanobis
// distance `model.radius` of the conditional mean given the target's
// canonical attribute scores.
std::vector<std::string> cca_roi(const CcaModel& model, const std::vector<double>& target_attrs,
                                 const std::vector<Station>& pool,
                                 const std::vector<std::array<double, 3>>& pool_chars);

}  // namespace floodreg
