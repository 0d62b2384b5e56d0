#include "floodreg/roi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "floodreg/errors.hpp"
#include "floodreg/parallel.hpp"

namespace floodreg {

namespace {

// Squared relative deviations of model quantiles from the order statistics
// of one station; returns the unnormalized inner sum.
double station_error_sum(const RegionalModel& model, const Station& s) {
  const GevParams p = predict_params(model, s);
  std::vector<double> x(s.maxima);
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0))
      throw ZeroObservation("nonpositive order statistic at station '" + s.id + "'");
    const double q = gev_quantile(static_cast<double>(i + 1) / (n + 1.0), p);
    const double rel = (q - x[i]) / x[i];
    sum += rel * rel;
  }
  return sum;
}

}  // namespace

double training_error(const RegionalModel& model, const std::vector<Station>& region) {
  if (region.empty()) throw std::invalid_argument("training error needs a nonempty region");
  double sum = 0.0;
  std::size_t total = 0;
  for (const auto& s : region) {
    if (s.maxima.empty())
      throw std::invalid_argument("station '" + s.id + "' has no record");
    sum += station_error_sum(model, s);
    total += s.maxima.size();
  }
  return sum / static_cast<double>(total);
}

double atsite_training_error(const RegionalModel& model, const Station& target,
                             const std::vector<Station>& region, double tau) {
  if (tau < 1.0) throw std::invalid_argument("tau must be >= 1");
  if (target.maxima.empty()) throw std::invalid_argument("at-site target has no record");
  double sum = tau * station_error_sum(model, target);
  std::size_t total = target.maxima.size();
  for (const auto& s : region) {
    sum += station_error_sum(model, s);
    total += s.maxima.size();
  }
  return sum / static_cast<double>(total);
}

std::vector<std::vector<double>> enumerate_weight_grid(std::size_t n_weights, double epsilon,
                                                       double grid_step) {
  if (n_weights == 0) throw std::invalid_argument("need at least one weight");
  if (epsilon < 0.0 || epsilon * static_cast<double>(n_weights) > 1.0 + 1e-12)
    throw std::invalid_argument("epsilon * (K+1) must not exceed 1");
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");
  const double mass = 1.0 - epsilon * static_cast<double>(n_weights);
  const double units_d = mass / grid_step;
  const long units = std::lround(units_d);
  if (std::abs(units_d - static_cast<double>(units)) > 1e-9)
    throw std::invalid_argument("grid step must divide 1 - (K+1)*epsilon");

  std::vector<std::vector<double>> grid;
  std::vector<long> v(n_weights, 0);
  // lexicographic enumeration of compositions of `units` into n_weights parts
  auto emit = [&]() {
    std::vector<double> w(n_weights);
    for (std::size_t i = 0; i < n_weights; ++i)
      w[i] = epsilon + grid_step * static_cast<double>(v[i]);
    grid.push_back(std::move(w));
  };
  auto rec = [&](auto&& self, std::size_t pos, long remaining) -> void {
    if (pos + 1 == n_weights) {
      v[pos] = remaining;
      emit();
      return;
    }
    for (long u = 0; u <= remaining; ++u) {
      v[pos] = u;
      self(self, pos + 1, remaining - u);
    }
  };
  rec(rec, 0, units);
  return grid;
}

namespace {

struct FittedRegion {
  bool ok = false;
  RegionalModel model;
  double error = 0.0;
};

RoiResult search(const Station& target, const std::vector<Station>& pool,
                 const RoiConfig& config, const CovariateSchema& schema, bool atsite) {
  schema.validate();
  if (atsite && target.maxima.empty())
    throw std::invalid_argument("at-site search requires a record at the target");

  std::vector<const Station*> candidates;
  std::map<std::string, const Station*> by_id;
  for (const auto& s : pool) {
    if (s.id == target.id) continue;
    candidates.push_back(&s);
    by_id[s.id] = &s;
  }
  const std::size_t pool_size = candidates.size();
  if (pool_size < config.min_J)
    throw InsufficientPool("pool of " + std::to_string(pool_size) +
                           " candidates cannot satisfy min_J=" + std::to_string(config.min_J));
  const std::size_t max_J =
      config.max_J == 0 ? std::min<std::size_t>(pool_size, 25) : std::min(config.max_J, pool_size);
  if (max_J < config.min_J) throw std::invalid_argument("max_J below min_J");

  const NormStats norm = normalize_attributes(pool, schema);
  const auto grid = enumerate_weight_grid(schema.size() + 1, config.epsilon, config.grid_step);

  // distance ordering per weight vector; candidate member sets share fits
  std::vector<std::string> set_keys;                 // first-appearance order
  std::map<std::string, std::size_t> set_index;
  std::vector<std::vector<const Station*>> set_members;
  std::vector<std::vector<std::size_t>> candidate_sets(grid.size());

  for (std::size_t wi = 0; wi < grid.size(); ++wi) {
    DistanceSpec spec = make_distance_spec(
        grid[wi][0], std::vector<double>(grid[wi].begin() + 1, grid[wi].end()), norm);
    Neighborhood order = nearest_neighbors(target, pool, spec, schema, max_J);
    candidate_sets[wi].reserve(max_J - config.min_J + 1);
    for (std::size_t J = config.min_J; J <= max_J; ++J) {
      std::vector<std::string> ids(order.members.begin(), order.members.begin() + J);
      std::sort(ids.begin(), ids.end());
      std::string key;
      for (const auto& id : ids) {
        key += id;
        key += '\n';
      }
      auto [it, inserted] = set_index.try_emplace(key, set_keys.size());
      if (inserted) {
        set_keys.push_back(key);
        std::vector<const Station*> members;
        members.reserve(J);
        for (const auto& id : ids) members.push_back(by_id.at(id));
        set_members.push_back(std::move(members));
      }
      candidate_sets[wi].push_back(it->second);
    }
  }

  // fit each distinct member set once; tasks only touch their own slot
  std::vector<FittedRegion> fits(set_members.size());
  parallel_for(
      set_members.size(),
      [&](std::size_t i) {
        std::vector<Station> region;
        region.reserve(set_members[i].size() + 1);
        for (const Station* s : set_members[i]) region.push_back(*s);
        try {
          if (atsite) {
            std::vector<Station> augmented = region;
            augmented.push_back(target);
            fits[i].model = fit_regional(augmented, schema);
            fits[i].error = atsite_training_error(fits[i].model, target, region, config.tau);
          } else {
            fits[i].model = fit_regional(region, schema);
            fits[i].error = training_error(fits[i].model, region);
          }
          fits[i].ok = std::isfinite(fits[i].error);
        } catch (const std::exception&) {
          fits[i].ok = false;  // failed candidates drop out of the search
        }
      },
      config.threads);

  // deterministic argmin: error, then smaller J, then lexicographic weights.
  // Enumeration order (weights lex ascending, J ascending) makes the first
  // strict improvement the canonical winner.
  std::optional<std::size_t> best_wi, best_set;
  std::size_t best_J = 0;
  double best_error = 0.0;
  for (std::size_t wi = 0; wi < grid.size(); ++wi) {
    for (std::size_t j = 0; j < candidate_sets[wi].size(); ++j) {
      const std::size_t J = config.min_J + j;
      const std::size_t si = candidate_sets[wi][j];
      if (!fits[si].ok) continue;
      const double err = fits[si].error;
      bool better = false;
      if (!best_wi) {
        better = true;
      } else if (err < best_error) {
        better = true;
      } else if (err == best_error && J < best_J) {
        better = true;
      }
      if (better) {
        best_wi = wi;
        best_set = si;
        best_J = J;
        best_error = err;
      }
    }
  }
  if (!best_wi) throw NoConvergedCandidate("every candidate regional fit failed");

  DistanceSpec best_spec = make_distance_spec(
      grid[*best_wi][0], std::vector<double>(grid[*best_wi].begin() + 1, grid[*best_wi].end()),
      norm);
  RoiResult result;
  result.weights = best_spec;
  result.J = best_J;
  result.members = nearest_neighbors(target, pool, best_spec, schema, best_J);
  result.training_error = best_error;
  result.model = fits[*best_set].model;
  return result;
}

}  // namespace

RoiResult find_roi(const Station& target, const std::vector<Station>& pool,
                   const RoiConfig& config, const CovariateSchema& schema) {
  return search(target, pool, config, schema, /*atsite=*/false);
}

RoiResult find_roi_atsite(const Station& target, const std::vector<Station>& pool,
                          const RoiConfig& config, const CovariateSchema& schema) {
  return search(target, pool, config, schema, /*atsite=*/true);
}

UngaugedEstimate estimate_ungauged(const Station& target, const std::vector<Station>& pool,
                                   const RoiConfig& config, const CovariateSchema& schema,
                                   double T) {
  UngaugedEstimate est;
  est.roi = find_roi(target, pool, config, schema);
  est.value = return_level(T, predict_params(est.roi.model, target));
  return est;
}

}  // namespace floodreg
