#include "floodreg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "floodreg/baselines.hpp"
#include "floodreg/errors.hpp"
#include "floodreg/io.hpp"
#include "floodreg/parallel.hpp"
#include "floodreg/regional.hpp"
#include "floodreg/rng.hpp"
#include "floodreg/roi.hpp"

namespace floodreg {

LooReport loo_evaluate(const std::vector<Station>& stations,
                       const std::vector<LooMethod>& methods,
                       const std::vector<double>& T_grid, unsigned threads) {
  if (stations.size() < 2) throw std::invalid_argument("leave-one-out needs at least 2 stations");
  if (methods.empty()) throw std::invalid_argument("no methods to evaluate");
  if (T_grid.empty()) throw std::invalid_argument("empty return-period grid");

  const std::size_t m = stations.size();

  struct FoldOutcome {
    std::vector<double> baseline;                          // per T
    std::vector<std::optional<std::vector<double>>> est;   // per method, per T
  };
  std::vector<FoldOutcome> folds(m);

  parallel_for(
      m,
      [&](std::size_t j) {
        FoldOutcome& out = folds[j];
        const Station& target = stations[j];
        std::vector<Station> pool;
        pool.reserve(m - 1);
        for (std::size_t i = 0; i < m; ++i)
          if (i != j) pool.push_back(stations[i]);

        const GevParams local = fit_local(target.maxima).params;
        out.baseline.reserve(T_grid.size());
        for (double T : T_grid) out.baseline.push_back(return_level(T, local));

        out.est.resize(methods.size());
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          try {
            auto est = methods[mi].estimate(target, pool, T_grid);
            if (est.size() != T_grid.size())
              throw std::logic_error("method returned wrong grid size");
            out.est[mi] = std::move(est);
          } catch (const std::exception&) {
            out.est[mi] = std::nullopt;
          }
        }
      },
      threads);

  LooReport report;
  for (const auto& method : methods) report.failures[method.name] = 0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      if (!folds[j].est[mi]) {
        ++report.failures[methods[mi].name];
        continue;
      }
      for (std::size_t ti = 0; ti < T_grid.size(); ++ti) {
        const double est = (*folds[j].est[mi])[ti];
        const double base = folds[j].baseline[ti];
        report.rows.push_back({stations[j].id, methods[mi].name, T_grid[ti], est, base,
                               (est - base) / base});
      }
    }
  }

  for (const auto& method : methods) {
    for (double T : T_grid) {
      double sum = 0.0, sumsq = 0.0;
      std::size_t n = 0;
      for (const auto& row : report.rows) {
        if (row.method != method.name || row.T != T) continue;
        sum += row.rel_dev;
        sumsq += row.rel_dev * row.rel_dev;
        ++n;
      }
      if (n == 0) continue;
      const double nd = static_cast<double>(n);
      report.aggregates.push_back(
          {method.name, T, sum / nd, std::sqrt(sumsq / nd), n});
    }
  }
  return report;
}

LooMethod make_roi_method(const RoiConfig& config, const CovariateSchema& schema) {
  return {"roi", [config, schema](const Station& target, const std::vector<Station>& pool,
                                  const std::vector<double>& T_grid) {
            RoiConfig inner = config;
            inner.threads = 1;  // folds already run in parallel
            const RoiResult roi = find_roi(target, pool, inner, schema);
            const GevParams p = predict_params(roi.model, target);
            std::vector<double> out;
            out.reserve(T_grid.size());
            for (double T : T_grid) out.push_back(return_level(T, p));
            return out;
          }};
}

namespace {

std::vector<double> quantreg_curve(const std::vector<Station>& region, const Station& target,
                                   const std::vector<double>& T_grid,
                                   const CovariateSchema& schema) {
  // local levels per region station, reused across the T grid
  std::vector<FitResult> fits;
  fits.reserve(region.size());
  for (const auto& s : region) fits.push_back(fit_local(s.maxima));
  std::vector<double> out;
  out.reserve(T_grid.size());
  for (double T : T_grid) {
    std::vector<double> levels;
    levels.reserve(region.size());
    for (const auto& f : fits) levels.push_back(return_level(T, f.params));
    const QuantRegModel model = fit_quantreg_responses(region, levels, T, schema);
    out.push_back(predict_quantile(model, target));
  }
  return out;
}

}  // namespace

LooMethod make_cluster_method(std::size_t C, const CovariateSchema& schema) {
  return {"cluster", [C, schema](const Station& target, const std::vector<Station>& pool,
                                 const std::vector<double>& T_grid) {
            const DistanceSpec spec = equal_weight_spec(pool, schema);
            const Clustering clustering = ward_cluster(pool, spec, schema, C);
            const int cid = assign_ungauged(clustering, target, pool, spec, schema);
            std::vector<Station> region;
            for (const auto& s : pool)
              if (clustering.assignment.at(s.id) == cid) region.push_back(s);
            return quantreg_curve(region, target, T_grid, schema);
          }};
}

LooMethod make_cca_method(double radius, const CovariateSchema& schema) {
  return {"cca", [radius, schema](const Station& target, const std::vector<Station>& pool,
                                  const std::vector<double>& T_grid) {
            std::vector<std::array<double, 3>> chars;
            chars.reserve(pool.size());
            for (const auto& s : pool) chars.push_back(discharge_characteristics(s.maxima));
            const auto target_attrs = attribute_vector(target, schema);

            // quantile regression on the region needs at least K+1 stations;
            // widen the ball until it holds enough members
            const std::size_t need = schema.size() + 1;
            std::vector<std::string> members;
            double r = radius;
            for (int attempt = 0; attempt < 7 && members.size() < need; ++attempt) {
              try {
                const CcaModel model = fit_cca(pool, schema, chars, r);
                members = cca_roi(model, target_attrs, pool, chars);
              } catch (const EmptyRegion&) {
              }
              if (members.size() < need) r *= 2.0;
            }
            if (members.size() < need)
              throw EmptyRegion("CCA region too small even after widening the radius");

            std::vector<Station> region;
            for (const auto& s : pool)
              if (std::find(members.begin(), members.end(), s.id) != members.end())
                region.push_back(s);
            return quantreg_curve(region, target, T_grid, schema);
          }};
}

namespace {

double rmse_at(const LooReport& report, const std::string& method, double T) {
  for (const auto& agg : report.aggregates)
    if (agg.method == method && agg.T == T) return agg.rmse;
  return std::numeric_limits<double>::infinity();
}

}  // namespace

std::size_t tune_cluster_count(const std::vector<Station>& stations,
                               const CovariateSchema& schema, double T, unsigned threads) {
  const std::size_t hi = std::min<std::size_t>(10, stations.size() - 1);
  std::size_t best_C = 2;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t C = 2; C <= hi; ++C) {
    const LooReport report =
        loo_evaluate(stations, {make_cluster_method(C, schema)}, {T}, threads);
    const double rmse = rmse_at(report, "cluster", T);
    if (rmse < best) {
      best = rmse;
      best_C = C;
    }
  }
  return best_C;
}

double tune_cca_radius(const std::vector<Station>& stations, const CovariateSchema& schema,
                       double T, unsigned threads) {
  double best_r = 0.5;
  double best = std::numeric_limits<double>::infinity();
  for (double r : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const LooReport report = loo_evaluate(stations, {make_cca_method(r, schema)}, {T}, threads);
    const double rmse = rmse_at(report, "cca", T);
    if (rmse < best) {
      best = rmse;
      best_r = r;
    }
  }
  return best_r;
}

void Strata::validate() const {
  if (intervals.empty()) throw std::invalid_argument("strata must be nonempty");
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].first > intervals[i].last)
      throw std::invalid_argument("stratum interval reversed");
    if (i > 0 && intervals[i].first != intervals[i - 1].last + 1)
      throw std::invalid_argument("strata must be disjoint, ordered and covering");
  }
}

Strata default_strata(const std::vector<Station>& stations, std::size_t count) {
  int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
  for (const auto& s : stations)
    for (int y : s.years) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  if (lo > hi) throw std::invalid_argument("no records to stratify");
  if (count == 0) throw std::invalid_argument("stratum count must be positive");

  const int span = hi - lo + 1;
  Strata strata;
  int start = lo;
  for (std::size_t i = 0; i < count; ++i) {
    // quartile-style boundaries, last stratum absorbs the remainder
    int end = lo + static_cast<int>((static_cast<long>(span) * (i + 1)) / count) - 1;
    if (i + 1 == count) end = hi;
    if (end < start) end = start;
    strata.intervals.push_back({start, end});
    start = end + 1;
  }
  strata.validate();
  return strata;
}

BootstrapResult stratified_bootstrap(const std::vector<Station>& stations, const Strata& strata,
                                     std::size_t R, const BootstrapEstimator& estimator,
                                     double alpha, std::uint64_t seed, unsigned threads) {
  strata.validate();
  if (R < 100) throw std::invalid_argument("bootstrap needs R >= 100 replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");

  // years actually observed anywhere, per stratum
  std::set<int> observed;
  for (const auto& s : stations) observed.insert(s.years.begin(), s.years.end());
  std::vector<std::vector<int>> stratum_years(strata.intervals.size());
  for (std::size_t si = 0; si < strata.intervals.size(); ++si)
    for (int y : observed)
      if (y >= strata.intervals[si].first && y <= strata.intervals[si].last)
        stratum_years[si].push_back(y);

  // per-station year -> value lookup
  std::vector<std::map<int, double>> lookup(stations.size());
  for (std::size_t j = 0; j < stations.size(); ++j)
    for (std::size_t i = 0; i < stations[j].years.size(); ++i)
      lookup[j][stations[j].years[i]] = stations[j].maxima[i];

  std::vector<std::optional<std::vector<double>>> outcomes(R);
  parallel_for(
      R,
      [&](std::size_t r) {
        Rng rng = make_rng(seed, r);
        std::vector<int> drawn;
        for (const auto& years : stratum_years) {
          for (std::size_t i = 0; i < years.size(); ++i)
            drawn.push_back(years[uniform_int(rng, 0, static_cast<std::int64_t>(years.size()) - 1)]);
        }
        std::vector<Station> resampled(stations);
        for (std::size_t j = 0; j < stations.size(); ++j) {
          resampled[j].years.clear();
          resampled[j].maxima.clear();
          int pseudo_year = 0;  // drawn years repeat; keep records well-formed
          for (int y : drawn) {
            auto it = lookup[j].find(y);
            if (it == lookup[j].end()) continue;
            resampled[j].years.push_back(++pseudo_year);
            resampled[j].maxima.push_back(it->second);
          }
        }
        try {
          outcomes[r] = estimator(resampled);
        } catch (const std::exception&) {
          outcomes[r] = std::nullopt;
        }
      },
      threads);

  BootstrapResult result;
  result.alpha = alpha;
  for (auto& o : outcomes) {
    if (o)
      result.replicate_estimates.push_back(std::move(*o));
    else
      ++result.failed;
  }
  result.R = result.replicate_estimates.size();
  if (result.R == 0) throw EstimatorFailure("every bootstrap replicate failed");
  const double fail_rate =
      static_cast<double>(result.failed) / static_cast<double>(R);
  if (fail_rate >= 0.05)
    throw EstimatorFailure("bootstrap failure rate " + std::to_string(fail_rate) +
                           " exceeds 5%");

  const std::size_t width = result.replicate_estimates.front().size();
  for (const auto& est : result.replicate_estimates)
    if (est.size() != width) throw EstimatorFailure("estimator grid size varied across replicates");

  auto percentile = [](std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    // empirical quantile, linear interpolation between order statistics
    const double h = p * (static_cast<double>(v.size()) - 1.0);
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (h - static_cast<double>(i)) * (v[i + 1] - v[i]);
  };
  result.lower.resize(width);
  result.upper.resize(width);
  for (std::size_t k = 0; k < width; ++k) {
    std::vector<double> col;
    col.reserve(result.R);
    for (const auto& est : result.replicate_estimates) col.push_back(est[k]);
    result.lower[k] = percentile(col, alpha / 2.0);
    result.upper[k] = percentile(col, 1.0 - alpha / 2.0);
  }
  return result;
}

Table emit_return_level_curve(const GevParams& fit, double T_min, double T_max, std::size_t n,
                              const std::optional<BootstrapResult>& bootstrap) {
  if (!(T_min > 1.0) || !(T_max > T_min)) throw std::invalid_argument("need 1 < T_min < T_max");
  if (n < 2) throw std::invalid_argument("need at least 2 grid points");
  if (bootstrap && bootstrap->lower.size() != n)
    throw std::invalid_argument("bootstrap grid does not match the curve grid");

  Table t;
  t.columns = bootstrap ? std::vector<std::string>{"T", "level", "lower", "upper"}
                        : std::vector<std::string>{"T", "level"};
  const double lstep = (std::log(T_max) - std::log(T_min)) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double T = std::exp(std::log(T_min) + lstep * static_cast<double>(i));
    std::vector<std::string> row{format_value(T), format_value(return_level(T, fit))};
    if (bootstrap) {
      row.push_back(format_value(bootstrap->lower[i]));
      row.push_back(format_value(bootstrap->upper[i]));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table emit_qq(const GevParams& fit, const std::vector<double>& maxima) {
  if (maxima.empty()) throw std::invalid_argument("empty record");
  std::vector<double> x(maxima);
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  Table t;
  t.columns = {"p", "model_q", "empirical_q"};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = static_cast<double>(i + 1) / (n + 1.0);
    t.rows.push_back({format_value(p), format_value(gev_quantile(p, fit)), format_value(x[i])});
  }
  return t;
}

double specific_discharge(double q, double catchment_size_km2) {
  if (!(catchment_size_km2 > 0.0))
    throw NonpositiveArea("catchment size must be positive, got " +
                          std::to_string(catchment_size_km2));
  return q / catchment_size_km2;
}

}  // namespace floodreg
