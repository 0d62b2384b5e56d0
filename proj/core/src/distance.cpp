#include "floodreg/distance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "floodreg/errors.hpp"

namespace floodreg {

bool DistanceSpec::valid() const {
  if (w0 < 0.0) return false;
  double sum = w0;
  for (double wk : w) {
    if (wk < 0.0) return false;
    sum += wk;
  }
  if (std::abs(sum - 1.0) > 1e-12) return false;
  if (norm.mean.size() != w.size() || norm.sd.size() != w.size()) return false;
  for (double s : norm.sd)
    if (!(s > 0.0)) return false;
  return norm.centroid_dist_sd > 0.0;
}

NormStats normalize_attributes(const std::vector<Station>& stations,
                               const CovariateSchema& schema) {
  schema.validate();
  const std::size_t m = stations.size();
  if (m < 2) throw std::invalid_argument("need at least 2 stations to normalize attributes");

  NormStats stats;
  stats.mean.resize(schema.size());
  stats.sd.resize(schema.size());
  for (std::size_t k = 0; k < schema.size(); ++k) {
    double mean = 0.0;
    for (const auto& s : stations) mean += s.attribute(schema.names[k]);
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (const auto& s : stations) {
      const double d = s.attribute(schema.names[k]) - mean;
      ss += d * d;
    }
    const double var = ss / static_cast<double>(m - 1);
    if (!(var > 0.0))
      throw ZeroVariance("attribute '" + schema.names[k] + "' is constant over the pool");
    stats.mean[k] = mean;
    stats.sd[k] = std::sqrt(var);
  }

  // scale for the centroid term: sd of all pairwise planar distances
  std::vector<double> dists;
  dists.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      dists.push_back(std::hypot(stations[i].x - stations[j].x, stations[i].y - stations[j].y));
  const double dmean =
      std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());
  double dss = 0.0;
  for (double d : dists) dss += (d - dmean) * (d - dmean);
  const double dvar = dists.size() > 1 ? dss / static_cast<double>(dists.size() - 1) : 0.0;
  // co-located centroids contribute zero distance; any positive scale works then
  stats.centroid_dist_sd = dvar > 0.0 ? std::sqrt(dvar) : 1.0;
  return stats;
}

DistanceSpec make_distance_spec(double w0, std::vector<double> attr_weights, NormStats norm) {
  DistanceSpec spec;
  spec.w0 = w0;
  spec.w = std::move(attr_weights);
  spec.norm = std::move(norm);
  if (!spec.valid()) throw std::invalid_argument("invalid distance spec (weights or norm stats)");
  return spec;
}

DistanceSpec equal_weight_spec(const std::vector<Station>& stations,
                               const CovariateSchema& schema) {
  const double w = 1.0 / static_cast<double>(schema.size() + 1);
  return make_distance_spec(w, std::vector<double>(schema.size(), w),
                            normalize_attributes(stations, schema));
}

double hydro_distance(const Station& a, const Station& b, const DistanceSpec& spec,
                      const CovariateSchema& schema) {
  if (spec.w.size() != schema.size())
    throw SchemaMismatch("distance spec weight count does not match schema");
  const double deuc =
      std::hypot(a.x - b.x, a.y - b.y) / spec.norm.centroid_dist_sd;
  double sum = spec.w0 * deuc * deuc;
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const double za = (a.attribute(schema.names[k]) - spec.norm.mean[k]) / spec.norm.sd[k];
    const double zb = (b.attribute(schema.names[k]) - spec.norm.mean[k]) / spec.norm.sd[k];
    sum += spec.w[k] * (za - zb) * (za - zb);
  }
  return std::sqrt(sum);
}

Neighborhood nearest_neighbors(const Station& target, const std::vector<Station>& pool,
                               const DistanceSpec& spec, const CovariateSchema& schema,
                               std::size_t J) {
  struct Entry {
    double dist;
    const Station* s;
  };
  std::vector<Entry> entries;
  entries.reserve(pool.size());
  for (const auto& s : pool) {
    if (s.id == target.id) continue;
    entries.push_back({hydro_distance(target, s, spec, schema), &s});
  }
  if (J > entries.size())
    throw InsufficientPool("requested " + std::to_string(J) + " neighbors from a pool of " +
                           std::to_string(entries.size()) + " candidates");
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.s->id < b.s->id;
  });
  Neighborhood nb;
  nb.target = target.id;
  nb.members.reserve(J);
  nb.distances.reserve(J);
  for (std::size_t i = 0; i < J; ++i) {
    nb.members.push_back(entries[i].s->id);
    nb.distances.push_back(entries[i].dist);
  }
  return nb;
}

}  // namespace floodreg
