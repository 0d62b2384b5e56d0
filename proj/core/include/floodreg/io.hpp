#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "floodreg/station.hpp"

namespace floodreg {

struct Table;  // eval.hpp

// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_value(double v);

struct StationRow {
  std::string station_id;
  double centroid_x;
  double centroid_y;
  double size_km2;
  double altitude_m;
  double mean_daily_precip_mm;
  double mean_annmax_precip_mm;
};

struct StationTable {
  std::vector<StationRow> rows;
};

struct MaximaRow {
  std::string station_id;
  int year;
  double annual_max_m3s;
};

struct MaximaTable {
  std::vector<MaximaRow> rows;
};

// Comma-separated, one header line. Unknown columns (e.g. the land-cover and
// slope attributes some datasets carry) are ignored with a warning on the
// supplied stream. Duplicate ids, nonpositive attributes and malformed
// numbers raise ParseError with the offending row.
StationTable load_stations(const std::filesystem::path& path, std::ostream* warnings = nullptr);

// Requires every station_id to exist in `stations`; (station_id, year) pairs
// must be unique and values strictly positive.
MaximaTable load_maxima(const std::filesystem::path& path, const StationTable& stations,
                        std::ostream* warnings = nullptr);

void write_stations(const std::filesystem::path& path, const StationTable& table);
void write_maxima(const std::filesystem::path& path, const MaximaTable& table);

// Joins the two tables into Station objects (records sorted by year).
std::vector<Station> make_stations(const StationTable& stations, const MaximaTable& maxima);

StationTable to_station_table(const std::vector<Station>& stations);
MaximaTable to_maxima_table(const std::vector<Station>& stations);

void write_table(const std::filesystem::path& path, const Table& table);
void write_table(std::ostream& os, const Table& table);

// Pipeline tuning parameters with the published defaults; the CLI layers
// config-file and flag overrides on top.
struct RunConfig {
  double epsilon = 0.05;
  std::size_t min_J = 8;        // ungauged default; at-site commands use 7
  std::size_t min_J_atsite = 7;
  std::size_t max_J = 0;        // 0: min(pool, 25)
  double grid_step = 0.05;
  double tau = 2.0;
  std::vector<double> T = {50.0, 100.0, 200.0};
  std::size_t R = 1000;
  double alpha = 0.05;
  std::size_t strata_count = 4;
  std::uint64_t seed = 1;
  std::vector<std::string> methods = {"roi", "cluster", "cca"};
  std::size_t cluster_C = 0;    // 0: tune by leave-one-out scan
  double cca_radius = 0.0;      // 0: tune by leave-one-out scan
  unsigned threads = 0;
};

}  // namespace floodreg
