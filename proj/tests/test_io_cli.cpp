#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "floodreg/errors.hpp"
#include "floodreg/eval.hpp"
#include "floodreg/gev.hpp"
#include "floodreg/io.hpp"
#include "floodreg/synth.hpp"

using namespace floodreg;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("floodreg_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// run the CLI with std::cout captured
int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::stringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  const int rc = cli::run(args);
  std::cout.rdbuf(old);
  if (out) *out = captured.str();
  return rc;
}

}  // namespace

TEST_CASE("synth basin round-trips through the CSV schema bitwise") {
  const fs::path dir = fresh_dir("roundtrip");
  SynthConfig cfg = default_synth_config();
  cfg.m = 9;
  cfg.seed = 17;
  const SynthBasin basin = generate_basin(cfg);

  write_stations(dir / "stations.csv", to_station_table(basin.stations));
  write_maxima(dir / "maxima.csv", to_maxima_table(basin.stations));
  const StationTable st = load_stations(dir / "stations.csv");
  const MaximaTable mx = load_maxima(dir / "maxima.csv", st);
  const std::vector<Station> loaded = make_stations(st, mx);

  REQUIRE(loaded.size() == basin.stations.size());
  for (std::size_t j = 0; j < loaded.size(); ++j) {
    CHECK(loaded[j].id == basin.stations[j].id);
    CHECK(loaded[j].x == basin.stations[j].x);
    CHECK(loaded[j].y == basin.stations[j].y);
    CHECK(loaded[j].attributes == basin.stations[j].attributes);
    CHECK(loaded[j].years == basin.stations[j].years);
    CHECK(loaded[j].maxima == basin.stations[j].maxima);
  }
}

TEST_CASE("station table validation with row-numbered diagnostics") {
  const fs::path dir = fresh_dir("stations_bad");
  const std::string header =
      "station_id,centroid_x,centroid_y,size_km2,altitude_m,mean_daily_precip_mm,"
      "mean_annmax_precip_mm\n";

  write_file(dir / "dup.csv", header + "a,0,0,10,100,3,40\na,1,1,20,200,4,50\n");
  CHECK_THROWS_WITH_AS(load_stations(dir / "dup.csv"),
                       "row 3, column 'station_id': duplicate station id 'a'", ParseError);

  write_file(dir / "neg.csv", header + "a,0,0,-10,100,3,40\n");
  CHECK_THROWS_AS(load_stations(dir / "neg.csv"), ParseError);

  write_file(dir / "nan.csv", header + "a,0,zero,10,100,3,40\n");
  CHECK_THROWS_AS(load_stations(dir / "nan.csv"), ParseError);

  write_file(dir / "missing.csv", "station_id,centroid_x\na,0\n");
  CHECK_THROWS_AS(load_stations(dir / "missing.csv"), SchemaError);

  // extra columns (the unused attribute rows of the study table) only warn
  write_file(dir / "extra.csv",
             "station_id,centroid_x,centroid_y,size_km2,altitude_m,mean_daily_precip_mm,"
             "mean_annmax_precip_mm,forest_pct\n"
             "a,0,0,10,100,3,40,46\n");
  std::ostringstream warnings;
  const StationTable st = load_stations(dir / "extra.csv", &warnings);
  CHECK(st.rows.size() == 1);
  CHECK(warnings.str().find("forest_pct") != std::string::npos);
}

TEST_CASE("maxima table validation") {
  const fs::path dir = fresh_dir("maxima_bad");
  const std::string sheader =
      "station_id,centroid_x,centroid_y,size_km2,altitude_m,mean_daily_precip_mm,"
      "mean_annmax_precip_mm\n";
  write_file(dir / "stations.csv", sheader + "a,0,0,10,100,3,40\n");
  const StationTable st = load_stations(dir / "stations.csv");

  const std::string mheader = "station_id,year,annual_max_m3s\n";
  write_file(dir / "dup.csv", mheader + "a,2000,5\na,2000,6\n");
  CHECK_THROWS_AS(load_maxima(dir / "dup.csv", st), ParseError);

  write_file(dir / "orphan.csv", mheader + "b,2000,5\n");
  CHECK_THROWS_WITH_AS(load_maxima(dir / "orphan.csv", st),
                       "row 2, column 'station_id': unknown station id 'b'", ParseError);

  write_file(dir / "neg.csv", mheader + "a,2000,-5\n");
  CHECK_THROWS_AS(load_maxima(dir / "neg.csv", st), ParseError);

  write_file(dir / "ok.csv", mheader + "a,2001,5.5\na,2000,4.5\n");
  const MaximaTable mx = load_maxima(dir / "ok.csv", st);
  const auto stations = make_stations(st, mx);
  CHECK(stations[0].years == std::vector<int>{2000, 2001});  // sorted on join
  CHECK(stations[0].maxima == std::vector<double>{4.5, 5.5});
}

TEST_CASE("config precedence: flag beats file beats default") {
  const fs::path dir = fresh_dir("config");
  write_file(dir / "cfg.json", R"({"min_J": 9, "epsilon": 0.07, "T": [40, 80]})");

  std::string out;
  // default
  REQUIRE(run_cli({"roi", "--target", "x", "--dump-config"}, &out) == 0);
  auto j = nlohmann::json::parse(out);
  CHECK(j["min_J"] == 8);
  CHECK(j["epsilon"] == 0.05);
  CHECK(j["tau"] == 2.0);
  CHECK(j["R"] == 1000);
  CHECK(j["alpha"] == 0.05);
  CHECK(j["min_J_atsite"] == 7);

  // file overrides default
  REQUIRE(run_cli({"roi", "--target", "x", "--config", (dir / "cfg.json").string(),
                   "--dump-config"},
                  &out) == 0);
  j = nlohmann::json::parse(out);
  CHECK(j["min_J"] == 9);
  CHECK(j["epsilon"] == 0.07);
  CHECK(j["T"] == nlohmann::json::array({40.0, 80.0}));

  // flag overrides file
  REQUIRE(run_cli({"roi", "--target", "x", "--config", (dir / "cfg.json").string(), "--min-J",
                   "10", "--dump-config"},
                  &out) == 0);
  j = nlohmann::json::parse(out);
  CHECK(j["min_J"] == 10);
  CHECK(j["epsilon"] == 0.07);

  // environment variable supplies the default config path
  setenv("FLOODREG_CONFIG", (dir / "cfg.json").c_str(), 1);
  REQUIRE(run_cli({"roi", "--target", "x", "--dump-config"}, &out) == 0);
  j = nlohmann::json::parse(out);
  CHECK(j["min_J"] == 9);
  unsetenv("FLOODREG_CONFIG");
}

TEST_CASE("cli exit codes: 2 for usage, 1 for runtime") {
  std::string out;
  CHECK(run_cli({"frobnicate"}, &out) == 2);
  CHECK(run_cli({"roi"}, &out) == 2);              // missing --target
  CHECK(run_cli({"roi", "--bogus-flag"}, &out) == 2);
  CHECK(run_cli({}, &out) == 2);                   // no subcommand

  const fs::path dir = fresh_dir("exitcodes");
  REQUIRE(run_cli({"synth", "--out", (dir / "basin").string()}, &out) == 0);
  // unknown station id is a runtime failure
  CHECK(run_cli({"fit-local", "--stations", (dir / "basin/stations.csv").string(), "--maxima",
                 (dir / "basin/maxima.csv").string(), "--station", "zz", "--out",
                 (dir / "o").string()},
                &out) == 1);
  // missing data files
  CHECK(run_cli({"roi", "--target", "s001", "--out", (dir / "o").string()}, &out) == 1);
}

TEST_CASE("cli synth honors its JSON config") {
  const fs::path dir = fresh_dir("synthcfg");
  write_file(dir / "synth.json", R"({"m": 4, "min_years": 12, "max_years": 12, "seed": 5})");
  std::string out;
  REQUIRE(run_cli({"synth", "--synth-config", (dir / "synth.json").string(), "--out",
                   (dir / "b").string()},
                  &out) == 0);
  const StationTable st = load_stations(dir / "b/stations.csv");
  CHECK(st.rows.size() == 4);
  const MaximaTable mx = load_maxima(dir / "b/maxima.csv", st);
  CHECK(mx.rows.size() == 4 * 12);
  CHECK(fs::exists(dir / "b/truth.csv"));
}

TEST_CASE("cli fit-local delegates to the library fit") {
  const fs::path dir = fresh_dir("fitlocal");
  write_file(dir / "synth.json",
             R"({"m": 1, "min_years": 5000, "max_years": 5000, "final_year": 5000, "seed": 42})");
  std::string out;
  REQUIRE(run_cli({"synth", "--synth-config", (dir / "synth.json").string(), "--out",
                   (dir / "b").string()},
                  &out) == 0);
  REQUIRE(run_cli({"fit-local", "--stations", (dir / "b/stations.csv").string(), "--maxima",
                   (dir / "b/maxima.csv").string(), "--station", "s001", "--R", "0", "--out",
                   (dir / "fit").string()},
                  &out) == 0);

  const StationTable st = load_stations(dir / "b/stations.csv");
  const MaximaTable mx = load_maxima(dir / "b/maxima.csv", st);
  const auto stations = make_stations(st, mx);
  const FitResult expected = fit_local(stations[0].maxima);

  const std::string fit_csv = slurp(dir / "fit/fit.csv");
  CHECK(fit_csv.find(format_value(expected.params.mu)) != std::string::npos);
  CHECK(fit_csv.find(format_value(expected.params.sigma)) != std::string::npos);
  CHECK(fit_csv.find(format_value(expected.params.xi)) != std::string::npos);

  // the generator truth is recovered within the usual 5000-draw tolerance
  nlohmann::json truth_unused;  // (truth.csv holds mu,sigma,xi per station)
  const std::string truth = slurp(dir / "b/truth.csv");
  CHECK(fs::exists(dir / "fit/qq.csv"));
  CHECK(fs::exists(dir / "fit/return_levels.csv"));
  CHECK(!truth.empty());
}

TEST_CASE("cli estimate produces monotone return levels per target") {
  const fs::path dir = fresh_dir("estimate");
  write_file(dir / "synth.json", R"({"m": 14, "min_years": 40, "max_years": 60, "seed": 9})");
  std::string out;
  REQUIRE(run_cli({"synth", "--synth-config", (dir / "synth.json").string(), "--out",
                   (dir / "b").string()},
                  &out) == 0);

  // the target file reuses the stations schema; take one station's attributes
  const StationTable st = load_stations(dir / "b/stations.csv");
  StationTable targets;
  targets.rows.push_back(st.rows[3]);
  targets.rows[0].station_id = "target01";
  write_stations(dir / "targets.csv", targets);

  REQUIRE(run_cli({"estimate", "--stations", (dir / "b/stations.csv").string(), "--maxima",
                   (dir / "b/maxima.csv").string(), "--target-attrs",
                   (dir / "targets.csv").string(), "--T", "50,100,200", "--grid-step", "0.25",
                   "--min-J", "7", "--max-J", "10", "--out", (dir / "est").string()},
                  &out) == 0);

  std::ifstream in(dir / "est/estimates.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "station,T,estimate");
  double prev = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    const double value = std::stod(line.substr(comma + 1));
    CHECK(value >= prev);
    prev = value;
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("cli loo emits the fixed schemas and one aggregate row per method and T") {
  const fs::path dir = fresh_dir("loo");
  write_file(dir / "synth.json", R"({"m": 12, "min_years": 40, "max_years": 60, "seed": 30})");
  std::string out;
  REQUIRE(run_cli({"synth", "--synth-config", (dir / "synth.json").string(), "--out",
                   (dir / "b").string()},
                  &out) == 0);
  REQUIRE(run_cli({"loo", "--stations", (dir / "b/stations.csv").string(), "--maxima",
                   (dir / "b/maxima.csv").string(), "--methods", "roi,cluster,cca", "--T",
                   "50,100", "--grid-step", "0.5", "--epsilon", "0", "--min-J", "7", "--max-J",
                   "9", "--cluster-C", "2", "--cca-radius", "2", "--threads", "2", "--out",
                   (dir / "loo").string()},
                  &out) == 0);

  std::ifstream rows(dir / "loo/loo.csv");
  std::string line;
  std::getline(rows, line);
  CHECK(line == "station,method,T,estimate,baseline,rel_dev");

  std::ifstream aggs(dir / "loo/aggregates.csv");
  std::getline(aggs, line);
  CHECK(line == "method,T,bias,rmse,n");
  std::map<std::string, int> per_method;
  while (std::getline(aggs, line)) {
    const auto comma = line.find(',');
    ++per_method[line.substr(0, comma)];
  }
  CHECK(per_method["roi"] == 2);
  CHECK(per_method["cluster"] == 2);
  CHECK(per_method["cca"] == 2);
}

TEST_CASE("cli runs are deterministic for a fixed seed, also across thread counts") {
  const fs::path dir = fresh_dir("determinism");
  write_file(dir / "synth.json", R"({"m": 10, "min_years": 35, "max_years": 50, "seed": 77})");
  std::string out;
  REQUIRE(run_cli({"synth", "--synth-config", (dir / "synth.json").string(), "--out",
                   (dir / "b1").string()},
                  &out) == 0);
  REQUIRE(run_cli({"synth", "--synth-config", (dir / "synth.json").string(), "--out",
                   (dir / "b2").string()},
                  &out) == 0);
  CHECK(slurp(dir / "b1/stations.csv") == slurp(dir / "b2/stations.csv"));
  CHECK(slurp(dir / "b1/maxima.csv") == slurp(dir / "b2/maxima.csv"));
  CHECK(slurp(dir / "b1/truth.csv") == slurp(dir / "b2/truth.csv"));

  auto roi_args = [&](const std::string& outdir, const std::string& threads) {
    return std::vector<std::string>{
        "roi",     "--stations", (dir / "b1/stations.csv").string(),
        "--maxima", (dir / "b1/maxima.csv").string(), "--target", "s004",
        "--grid-step", "0.25", "--min-J", "6", "--max-J", "8",
        "--threads", threads, "--out", (dir / outdir).string()};
  };
  REQUIRE(run_cli(roi_args("r1", "2"), &out) == 0);
  REQUIRE(run_cli(roi_args("r2", "2"), &out) == 0);
  REQUIRE(run_cli(roi_args("r3", "1"), &out) == 0);
  CHECK(slurp(dir / "r1/roi.csv") == slurp(dir / "r2/roi.csv"));
  CHECK(slurp(dir / "r1/members.csv") == slurp(dir / "r2/members.csv"));
  CHECK(slurp(dir / "r1/roi.csv") == slurp(dir / "r3/roi.csv"));
  CHECK(slurp(dir / "r1/members.csv") == slurp(dir / "r3/members.csv"));
}
