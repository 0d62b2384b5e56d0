#include "floodreg/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "floodreg/rng.hpp"

namespace floodreg {

void SynthConfig::validate() const {
  schema.validate();
  const std::size_t K = schema.size();
  if (m < 1) throw std::invalid_argument("station count must be positive");
  if (min_years < 1 || max_years < min_years)
    throw std::invalid_argument("invalid record-length range");
  if (alpha.size() != K + 1 || beta.size() != K + 1)
    throw std::invalid_argument("link coefficient vectors must have K+1 entries");
  if (attribute_ranges.size() != K)
    throw std::invalid_argument("one attribute range per schema entry required");
  for (const auto& [lo, hi] : attribute_ranges)
    if (!(lo > 0.0) || !(hi >= lo))
      throw std::invalid_argument("attribute ranges must be positive and ordered");
  if (!(xi > kXiMin) || !(xi < kXiMax))
    throw std::invalid_argument("shape must lie in (-0.5, 1)");
  if (dependence < 0.0 || dependence > 1.0)
    throw std::invalid_argument("dependence must lie in [0, 1]");
  if (!(coord_extent > 0.0)) throw std::invalid_argument("coordinate extent must be positive");
}

SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.schema = canonical_schema();
  cfg.attribute_ranges = {{50.0, 5000.0},    // size_km2
                          {400.0, 3000.0},   // altitude_m
                          {2.0, 8.0},        // mean_daily_precip_mm
                          {30.0, 110.0}};    // mean_annmax_precip_mm
  // positive size elasticity, mild altitude/precipitation effects; scales
  // chosen so mid-range catchments sit near mu ~ 650, sigma ~ 175 m^3/s
  cfg.alpha = {0.0, 0.8, -0.1, 0.3, 0.2};
  cfg.beta = {-1.0, 0.75, -0.1, 0.25, 0.2};
  return cfg;
}

SynthBasin generate_basin(const SynthConfig& config) {
  config.validate();
  const std::size_t K = config.schema.size();
  SynthBasin basin;
  basin.config = config;
  basin.stations.reserve(config.m);
  basin.true_params.reserve(config.m);

  Rng rng = make_rng(config.seed);

  // station identities, coordinates, attributes, record lengths
  std::vector<int> lengths(config.m);
  for (int j = 0; j < config.m; ++j) {
    Station s;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d", j + 1);
    s.id = buf;
    s.x = uniform_open(rng) * config.coord_extent;
    s.y = uniform_open(rng) * config.coord_extent;
    double lmu = config.alpha[0], lsig = config.beta[0];
    for (std::size_t k = 0; k < K; ++k) {
      const auto& [lo, hi] = config.attribute_ranges[k];
      const double v = lo * std::exp(uniform_open(rng) * std::log(hi / lo));
      s.attributes[config.schema.names[k]] = v;
      lmu += config.alpha[k + 1] * std::log(v);
      lsig += config.beta[k + 1] * std::log(v);
    }
    basin.true_params.push_back(GevParams{std::exp(lmu), std::exp(lsig), config.xi});
    lengths[j] = static_cast<int>(uniform_int(rng, config.min_years, config.max_years));
    basin.stations.push_back(std::move(s));
  }

  // basin-wide shocks, one uniform per calendar year of the widest span
  const int first_year = config.final_year - config.max_years + 1;
  std::vector<double> shock(config.max_years);
  for (auto& u : shock) u = uniform_open(rng);

  // records: a year's draw is either the shared shock or station-specific
  for (int j = 0; j < config.m; ++j) {
    Station& s = basin.stations[j];
    const int start = config.final_year - lengths[j] + 1;
    s.years.reserve(lengths[j]);
    s.maxima.reserve(lengths[j]);
    for (int year = start; year <= config.final_year; ++year) {
      const double own = uniform_open(rng);
      const double coin = uniform_open(rng);
      const double u = coin < config.dependence ? shock[year - first_year] : own;
      s.years.push_back(year);
      s.maxima.push_back(gev_quantile(u, basin.true_params[j]));
    }
  }
  return basin;
}

double true_quantile(const SynthBasin& basin, const std::string& station_id, double T) {
  for (std::size_t j = 0; j < basin.stations.size(); ++j)
    if (basin.stations[j].id == station_id) return return_level(T, basin.true_params[j]);
  throw std::invalid_argument("unknown station '" + station_id + "'");
}

}  // namespace floodreg
