#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "floodreg/baselines.hpp"
#include "floodreg/errors.hpp"
#include "floodreg/eval.hpp"
#include "floodreg/gev.hpp"
#include "floodreg/io.hpp"
#include "floodreg/regional.hpp"
#include "floodreg/roi.hpp"
#include "floodreg/synth.hpp"

namespace floodreg::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void apply_config_file(RunConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config file " + path.string());
  json j;
  in >> j;
  if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
  if (j.contains("min_J")) cfg.min_J = j["min_J"].get<std::size_t>();
  if (j.contains("min_J_atsite")) cfg.min_J_atsite = j["min_J_atsite"].get<std::size_t>();
  if (j.contains("max_J")) cfg.max_J = j["max_J"].get<std::size_t>();
  if (j.contains("grid_step")) cfg.grid_step = j["grid_step"].get<double>();
  if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
  if (j.contains("T")) cfg.T = j["T"].get<std::vector<double>>();
  if (j.contains("R")) cfg.R = j["R"].get<std::size_t>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("strata_count")) cfg.strata_count = j["strata_count"].get<std::size_t>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
  if (j.contains("cluster_C")) cfg.cluster_C = j["cluster_C"].get<std::size_t>();
  if (j.contains("cca_radius")) cfg.cca_radius = j["cca_radius"].get<double>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<unsigned>();
}

SynthConfig load_synth_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open synth config " + path.string());
  json j;
  in >> j;
  SynthConfig cfg = default_synth_config();
  if (j.contains("m")) cfg.m = j["m"].get<int>();
  if (j.contains("min_years")) cfg.min_years = j["min_years"].get<int>();
  if (j.contains("max_years")) cfg.max_years = j["max_years"].get<int>();
  if (j.contains("final_year")) cfg.final_year = j["final_year"].get<int>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<std::vector<double>>();
  if (j.contains("beta")) cfg.beta = j["beta"].get<std::vector<double>>();
  if (j.contains("xi")) cfg.xi = j["xi"].get<double>();
  if (j.contains("schema")) cfg.schema.names = j["schema"].get<std::vector<std::string>>();
  if (j.contains("attribute_ranges")) {
    cfg.attribute_ranges.clear();
    for (const auto& pair : j["attribute_ranges"])
      cfg.attribute_ranges.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  if (j.contains("coord_extent")) cfg.coord_extent = j["coord_extent"].get<double>();
  if (j.contains("dependence")) cfg.dependence = j["dependence"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  return cfg;
}

struct Dataset {
  std::vector<Station> stations;
  CovariateSchema schema = canonical_schema();
};

Dataset load_dataset(const std::string& stations_path, const std::string& maxima_path) {
  if (stations_path.empty() || maxima_path.empty())
    throw SchemaError("--stations and --maxima are required for this command");
  const StationTable st = load_stations(stations_path, &std::cerr);
  const MaximaTable mx = load_maxima(maxima_path, st, &std::cerr);
  return {make_stations(st, mx), canonical_schema()};
}

const Station& find_station(const std::vector<Station>& stations, const std::string& id) {
  for (const auto& s : stations)
    if (s.id == id) return s;
  throw SchemaError("station '" + id + "' not in the station table");
}

fs::path ensure_out_dir(const std::string& out) {
  if (out.empty()) throw SchemaError("--out directory is required for this command");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

RoiConfig roi_config(const RunConfig& cfg, bool atsite) {
  RoiConfig rc;
  rc.epsilon = cfg.epsilon;
  rc.min_J = atsite ? cfg.min_J_atsite : cfg.min_J;
  rc.max_J = cfg.max_J;
  rc.grid_step = cfg.grid_step;
  rc.tau = cfg.tau;
  rc.threads = cfg.threads;
  return rc;
}

// curve grid shared by the fit commands and their bootstrap bands
constexpr double kCurveTmin = 2.0;
constexpr double kCurveTmax = 500.0;
constexpr std::size_t kCurveN = 25;

std::vector<double> curve_grid() {
  std::vector<double> grid;
  const double lstep = (std::log(kCurveTmax) - std::log(kCurveTmin)) / (kCurveN - 1);
  for (std::size_t i = 0; i < kCurveN; ++i)
    grid.push_back(std::exp(std::log(kCurveTmin) + lstep * static_cast<double>(i)));
  return grid;
}

std::vector<double> curve_levels(const GevParams& p) {
  std::vector<double> out;
  for (double T : curve_grid()) out.push_back(return_level(T, p));
  return out;
}

void write_fit_summary(const fs::path& dir, const Station& s, const FitResult& fit) {
  Table t;
  t.columns = {"station", "mu", "sigma", "xi", "loglik", "converged", "n_years"};
  t.rows.push_back({s.id, format_value(fit.params.mu), format_value(fit.params.sigma),
                    format_value(fit.params.xi), format_value(fit.loglik),
                    fit.converged ? "1" : "0", std::to_string(s.maxima.size())});
  write_table(dir / "fit.csv", t);
}

void write_roi_tables(const fs::path& dir, const std::string& target, const RoiResult& roi,
                      const CovariateSchema& schema) {
  Table t;
  t.columns = {"station", "J", "training_error", "w0"};
  for (const auto& name : schema.names) t.columns.push_back("w_" + name);
  std::vector<std::string> row{target, std::to_string(roi.J),
                               format_value(roi.training_error), format_value(roi.weights.w0)};
  for (double w : roi.weights.w) row.push_back(format_value(w));
  t.rows.push_back(std::move(row));
  write_table(dir / "roi.csv", t);

  Table members;
  members.columns = {"station", "member", "distance"};
  for (std::size_t i = 0; i < roi.members.members.size(); ++i)
    members.rows.push_back(
        {target, roi.members.members[i], format_value(roi.members.distances[i])});
  write_table(dir / "members.csv", members);
}

void print_roi(std::ostream& os, const RoiResult& roi, const CovariateSchema& schema) {
  os << "optimal region of influence: J=" << roi.J
     << " training_error=" << format_value(roi.training_error) << "\n";
  os << "weights: w0=" << format_value(roi.weights.w0);
  for (std::size_t k = 0; k < schema.names.size(); ++k)
    os << " " << schema.names[k] << "=" << format_value(roi.weights.w[k]);
  os << "\nmembers:";
  for (const auto& id : roi.members.members) os << " " << id;
  os << "\n";
}

int cmd_fit_local(const Dataset& data, const RunConfig& cfg, const std::string& station_id,
                  const fs::path& dir) {
  const Station& s = find_station(data.stations, station_id);
  const FitResult fit = fit_local(s.maxima);
  write_fit_summary(dir, s, fit);
  write_table(dir / "qq.csv", emit_qq(fit.params, s.maxima));

  std::optional<BootstrapResult> bands;
  if (cfg.R > 0) {
    const std::vector<Station> only{s};
    const Strata strata = default_strata(only, cfg.strata_count);
    bands = stratified_bootstrap(
        only, strata, cfg.R,
        [](const std::vector<Station>& resampled) {
          return curve_levels(fit_local(resampled[0].maxima).params);
        },
        cfg.alpha, cfg.seed, cfg.threads);
  }
  write_table(dir / "return_levels.csv",
              emit_return_level_curve(fit.params, kCurveTmin, kCurveTmax, kCurveN, bands));

  std::cout << "fit-local " << s.id << ": mu=" << format_value(fit.params.mu)
            << " sigma=" << format_value(fit.params.sigma)
            << " xi=" << format_value(fit.params.xi) << " loglik=" << format_value(fit.loglik)
            << (fit.converged ? "" : " (not converged)") << "\n";
  return 0;
}

int cmd_fit_atsite(const Dataset& data, const RunConfig& cfg, const std::string& station_id,
                   const fs::path& dir) {
  const Station& target = find_station(data.stations, station_id);
  const RoiConfig rc = roi_config(cfg, /*atsite=*/true);
  const RoiResult roi = find_roi_atsite(target, data.stations, rc, data.schema);
  const GevParams at_target = predict_params(roi.model, target);

  write_roi_tables(dir, target.id, roi, data.schema);
  write_table(dir / "qq.csv", emit_qq(at_target, target.maxima));

  std::optional<BootstrapResult> bands;
  if (cfg.R > 0) {
    const Strata strata = default_strata(data.stations, cfg.strata_count);
    RoiConfig replicate_rc = rc;
    replicate_rc.threads = 1;  // replicates already run in parallel
    const std::string id = target.id;
    const CovariateSchema schema = data.schema;
    bands = stratified_bootstrap(
        data.stations, strata, cfg.R,
        [replicate_rc, id, schema](const std::vector<Station>& resampled) {
          const Station* t = nullptr;
          for (const auto& s : resampled)
            if (s.id == id) t = &s;
          if (t == nullptr || t->maxima.size() < 10)
            throw NonConvergence("target record too short in replicate");
          const RoiResult r = find_roi_atsite(*t, resampled, replicate_rc, schema);
          return curve_levels(predict_params(r.model, *t));
        },
        cfg.alpha, cfg.seed, cfg.threads);
    std::cout << "bootstrap replicates: " << bands->R << " kept, " << bands->failed
              << " failed\n";
  }
  write_table(dir / "return_levels.csv",
              emit_return_level_curve(at_target, kCurveTmin, kCurveTmax, kCurveN, bands));

  print_roi(std::cout, roi, data.schema);
  return 0;
}

int cmd_estimate(const Dataset& data, const RunConfig& cfg, const std::string& attrs_path,
                 const fs::path& dir) {
  const StationTable targets_table = load_stations(attrs_path, &std::cerr);
  const MaximaTable empty;
  const std::vector<Station> targets = make_stations(targets_table, empty);
  if (targets.empty()) throw SchemaError("no target rows in " + attrs_path);

  const RoiConfig rc = roi_config(cfg, /*atsite=*/false);
  Table estimates;
  estimates.columns = {"station", "T", "estimate"};
  for (const auto& target : targets) {
    const RoiResult roi = find_roi(target, data.stations, rc, data.schema);
    const GevParams p = predict_params(roi.model, target);
    for (double T : cfg.T)
      estimates.rows.push_back({target.id, format_value(T), format_value(return_level(T, p))});
    if (targets.size() == 1) write_roi_tables(dir, target.id, roi, data.schema);
    print_roi(std::cout, roi, data.schema);
  }
  write_table(dir / "estimates.csv", estimates);
  return 0;
}

int cmd_roi(const Dataset& data, const RunConfig& cfg, const std::string& station_id,
            const fs::path& dir) {
  const Station& target = find_station(data.stations, station_id);
  std::vector<Station> pool;
  for (const auto& s : data.stations)
    if (s.id != target.id) pool.push_back(s);
  const RoiConfig rc = roi_config(cfg, /*atsite=*/false);
  const RoiResult roi = find_roi(target, pool, rc, data.schema);
  write_roi_tables(dir, target.id, roi, data.schema);
  print_roi(std::cout, roi, data.schema);
  return 0;
}

int cmd_loo(const Dataset& data, const RunConfig& cfg, const fs::path& dir) {
  std::vector<LooMethod> methods;
  for (const auto& name : cfg.methods) {
    if (name == "roi") {
      methods.push_back(make_roi_method(roi_config(cfg, false), data.schema));
    } else if (name == "cluster") {
      std::size_t C = cfg.cluster_C;
      if (C == 0) {
        C = tune_cluster_count(data.stations, data.schema, 100.0, cfg.threads);
        std::cout << "tuned cluster count C=" << C << "\n";
      }
      methods.push_back(make_cluster_method(C, data.schema));
    } else if (name == "cca") {
      double r = cfg.cca_radius;
      if (r <= 0.0) {
        r = tune_cca_radius(data.stations, data.schema, 100.0, cfg.threads);
        std::cout << "tuned cca radius r=" << format_value(r) << "\n";
      }
      methods.push_back(make_cca_method(r, data.schema));
    } else {
      throw SchemaError("unknown method '" + name + "' (expected roi, cluster or cca)");
    }
  }

  const LooReport report = loo_evaluate(data.stations, methods, cfg.T, cfg.threads);

  Table rows;
  rows.columns = {"station", "method", "T", "estimate", "baseline", "rel_dev"};
  for (const auto& r : report.rows)
    rows.rows.push_back({r.station, r.method, format_value(r.T), format_value(r.estimate),
                         format_value(r.baseline), format_value(r.rel_dev)});
  write_table(dir / "loo.csv", rows);

  Table aggs;
  aggs.columns = {"method", "T", "bias", "rmse", "n"};
  for (const auto& a : report.aggregates) {
    aggs.rows.push_back({a.method, format_value(a.T), format_value(a.bias),
                         format_value(a.rmse), std::to_string(a.n)});
    std::cout << a.method << " T=" << format_value(a.T) << ": BIAS=" << format_value(a.bias)
              << " RMSE=" << format_value(a.rmse) << " (n=" << a.n << ")\n";
  }
  write_table(dir / "aggregates.csv", aggs);
  for (const auto& [name, count] : report.failures)
    if (count > 0) std::cout << name << ": " << count << " station(s) failed\n";
  return 0;
}

int cmd_bootstrap(const Dataset& data, const RunConfig& cfg, const std::string& station_id,
                  const fs::path& dir) {
  const Station& target = find_station(data.stations, station_id);

  Table out;
  out.columns = {"method", "T", "level", "lower", "upper"};

  // local model: resample the station's own record
  {
    const std::vector<Station> only{target};
    const Strata strata = default_strata(only, cfg.strata_count);
    const std::vector<double> T = cfg.T;
    const BootstrapResult bs = stratified_bootstrap(
        only, strata, cfg.R,
        [T](const std::vector<Station>& resampled) {
          const GevParams p = fit_local(resampled[0].maxima).params;
          std::vector<double> levels;
          for (double t : T) levels.push_back(return_level(t, p));
          return levels;
        },
        cfg.alpha, cfg.seed, cfg.threads);
    const GevParams p = fit_local(target.maxima).params;
    for (std::size_t i = 0; i < cfg.T.size(); ++i)
      out.rows.push_back({"local", format_value(cfg.T[i]),
                          format_value(return_level(cfg.T[i], p)),
                          format_value(bs.lower[i]), format_value(bs.upper[i])});
  }

  // at-site regional model: resample the whole network, re-optimizing the
  // region on every replicate
  {
    const Strata strata = default_strata(data.stations, cfg.strata_count);
    RoiConfig rc = roi_config(cfg, /*atsite=*/true);
    rc.threads = 1;
    const std::string id = target.id;
    const CovariateSchema schema = data.schema;
    const std::vector<double> T = cfg.T;
    const BootstrapResult bs = stratified_bootstrap(
        data.stations, strata, cfg.R,
        [rc, id, schema, T](const std::vector<Station>& resampled) {
          const Station* t = nullptr;
          for (const auto& s : resampled)
            if (s.id == id) t = &s;
          if (t == nullptr || t->maxima.size() < 10)
            throw NonConvergence("target record too short in replicate");
          const RoiResult r = find_roi_atsite(*t, resampled, rc, schema);
          const GevParams p = predict_params(r.model, *t);
          std::vector<double> levels;
          for (double tt : T) levels.push_back(return_level(tt, p));
          return levels;
        },
        cfg.alpha, cfg.seed, cfg.threads);
    const RoiResult roi =
        find_roi_atsite(target, data.stations, roi_config(cfg, true), data.schema);
    const GevParams p = predict_params(roi.model, target);
    std::cout << "at-site bootstrap: " << bs.R << " kept, " << bs.failed << " failed\n";
    for (std::size_t i = 0; i < cfg.T.size(); ++i)
      out.rows.push_back({"atsite", format_value(cfg.T[i]),
                          format_value(return_level(cfg.T[i], p)),
                          format_value(bs.lower[i]), format_value(bs.upper[i])});
  }

  write_table(dir / "bootstrap.csv", out);
  for (const auto& row : out.rows)
    std::cout << row[0] << " T=" << row[1] << ": " << row[2] << " [" << row[3] << ", "
              << row[4] << "]\n";
  return 0;
}

int cmd_synth(const std::string& config_path, const fs::path& dir) {
  const SynthConfig cfg =
      config_path.empty() ? default_synth_config() : load_synth_config(config_path);
  const SynthBasin basin = generate_basin(cfg);
  write_stations(dir / "stations.csv", to_station_table(basin.stations));
  write_maxima(dir / "maxima.csv", to_maxima_table(basin.stations));

  Table truth;
  truth.columns = {"station_id", "mu", "sigma", "xi"};
  for (std::size_t j = 0; j < basin.stations.size(); ++j)
    truth.rows.push_back({basin.stations[j].id, format_value(basin.true_params[j].mu),
                          format_value(basin.true_params[j].sigma),
                          format_value(basin.true_params[j].xi)});
  write_table(dir / "truth.csv", truth);

  std::cout << "synthetic basin: " << basin.stations.size() << " stations written to "
            << dir.string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("floodreg");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"regional flood frequency estimation from annual-maximum discharges"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  RunConfig cfg;
  std::string stations_path, maxima_path, config_path, out_dir;
  std::string station_id, target_id, attrs_path, synth_config_path;

  // config file first (flag wins over the environment variable), so that
  // explicit flags below override file values: flag > file > default
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  if (config_path.empty())
    if (const char* env = std::getenv("FLOODREG_CONFIG")) config_path = env;
  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  app.add_option("--config", config_path, "JSON config file (or FLOODREG_CONFIG)");
  app.add_option("--stations", stations_path, "station attribute table (CSV)");
  app.add_option("--maxima", maxima_path, "annual maxima table (CSV)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
  app.add_option("--epsilon", cfg.epsilon, "minimal attribute weight");
  app.add_option("--min-J", cfg.min_J, "minimal group size (ungauged)");
  app.add_option("--min-J-atsite", cfg.min_J_atsite, "minimal group size (at-site)");
  app.add_option("--max-J", cfg.max_J, "maximal group size (0 = min(pool, 25))");
  app.add_option("--grid-step", cfg.grid_step, "weight grid resolution");
  app.add_option("--tau", cfg.tau, "at-site error emphasis");
  app.add_option("--T", cfg.T, "return periods (years)")->delimiter(',');
  app.add_option("--R", cfg.R, "bootstrap replicates (0 = skip)");
  app.add_option("--alpha", cfg.alpha, "confidence level complement");
  app.add_option("--strata", cfg.strata_count, "stratum count for the bootstrap");
  app.add_option("--cluster-C", cfg.cluster_C, "Ward cluster count (0 = tune)");
  app.add_option("--cca-radius", cfg.cca_radius, "CCA Mahalanobis radius (0 = tune)");
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "print the effective config and exit");

  auto* fit_local_cmd = app.add_subcommand("fit-local", "local GEV fit at a gauged station");
  fit_local_cmd->add_option("--station", station_id, "station id")->required();

  auto* fit_atsite_cmd =
      app.add_subcommand("fit-atsite", "augmented-region fit at a gauged station");
  fit_atsite_cmd->add_option("--station", station_id, "station id")->required();

  auto* estimate_cmd = app.add_subcommand("estimate", "ungauged return-level estimation");
  estimate_cmd->add_option("--target-attrs", attrs_path, "target attribute table (CSV)")
      ->required();

  auto* roi_cmd = app.add_subcommand("roi", "optimal region of influence of a station");
  roi_cmd->add_option("--target", target_id, "station id")->required();

  auto* loo_cmd = app.add_subcommand("loo", "leave-one-out method comparison");
  loo_cmd->add_option("--methods", cfg.methods, "methods: roi, cluster, cca")->delimiter(',');

  auto* bootstrap_cmd =
      app.add_subcommand("bootstrap", "stratified bootstrap intervals at a station");
  bootstrap_cmd->add_option("--station", station_id, "station id")->required();

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic basin");
  synth_cmd->add_option("--synth-config", synth_config_path, "JSON generator config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  if (dump_config) {
    json j;
    j["epsilon"] = cfg.epsilon;
    j["min_J"] = cfg.min_J;
    j["min_J_atsite"] = cfg.min_J_atsite;
    j["max_J"] = cfg.max_J;
    j["grid_step"] = cfg.grid_step;
    j["tau"] = cfg.tau;
    j["T"] = cfg.T;
    j["R"] = cfg.R;
    j["alpha"] = cfg.alpha;
    j["strata_count"] = cfg.strata_count;
    j["seed"] = cfg.seed;
    j["methods"] = cfg.methods;
    j["cluster_C"] = cfg.cluster_C;
    j["cca_radius"] = cfg.cca_radius;
    j["threads"] = cfg.threads;
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth_config_path, ensure_out_dir(out_dir));

    const Dataset data = load_dataset(stations_path, maxima_path);
    const fs::path dir = ensure_out_dir(out_dir);
    if (fit_local_cmd->parsed()) return cmd_fit_local(data, cfg, station_id, dir);
    if (fit_atsite_cmd->parsed()) return cmd_fit_atsite(data, cfg, station_id, dir);
    if (estimate_cmd->parsed()) return cmd_estimate(data, cfg, attrs_path, dir);
    if (roi_cmd->parsed()) return cmd_roi(data, cfg, target_id, dir);
    if (loo_cmd->parsed()) return cmd_loo(data, cfg, dir);
    if (bootstrap_cmd->parsed()) return cmd_bootstrap(data, cfg, station_id, dir);
    std::cerr << "usage error: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace floodreg::cli
