#include "floodreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "floodreg/errors.hpp"
#include "floodreg/eval.hpp"

namespace floodreg {

std::string format_value(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& text, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(row, column, "not a number: '" + text + "'");
  return v;
}

int parse_int(const std::string& text, std::size_t row, const std::string& column) {
  int v = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(row, column, "not an integer: '" + text + "'");
  return v;
}

struct Header {
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
};

Header read_header(std::istream& in, const std::filesystem::path& path,
                   const std::vector<std::string>& required, std::ostream* warnings) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty file: " + path.string());
  Header h;
  h.names = split_line(line);
  for (std::size_t i = 0; i < h.names.size(); ++i) {
    if (!h.index.emplace(h.names[i], i).second)
      throw SchemaError("duplicate column '" + h.names[i] + "' in " + path.string());
  }
  for (const auto& name : required)
    if (!h.index.count(name))
      throw SchemaError("missing required column '" + name + "' in " + path.string());
  if (warnings) {
    for (const auto& name : h.names)
      if (std::find(required.begin(), required.end(), name) == required.end())
        *warnings << "warning: ignoring column '" << name << "' in " << path.string() << "\n";
  }
  return h;
}

const std::string& field(const std::vector<std::string>& fields, const Header& h,
                         const std::string& column, std::size_t row) {
  const std::size_t idx = h.index.at(column);
  if (idx >= fields.size()) throw ParseError(row, column, "missing field");
  return fields[idx];
}

}  // namespace

StationTable load_stations(const std::filesystem::path& path, std::ostream* warnings) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  static const std::vector<std::string> required = {
      "station_id", "centroid_x", "centroid_y", "size_km2",
      "altitude_m", "mean_daily_precip_mm", "mean_annmax_precip_mm"};
  const Header h = read_header(in, path, required, warnings);

  StationTable table;
  std::set<std::string> seen;
  std::string line;
  std::size_t row = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    StationRow r;
    r.station_id = field(fields, h, "station_id", row);
    if (r.station_id.empty()) throw ParseError(row, "station_id", "empty id");
    if (!seen.insert(r.station_id).second)
      throw ParseError(row, "station_id", "duplicate station id '" + r.station_id + "'");
    r.centroid_x = parse_double(field(fields, h, "centroid_x", row), row, "centroid_x");
    r.centroid_y = parse_double(field(fields, h, "centroid_y", row), row, "centroid_y");
    if (!std::isfinite(r.centroid_x) || !std::isfinite(r.centroid_y))
      throw ParseError(row, "centroid_x", "coordinates must be finite");
    auto positive = [&](const std::string& column) {
      const double v = parse_double(field(fields, h, column, row), row, column);
      if (!(v > 0.0)) throw ParseError(row, column, "attribute must be strictly positive");
      return v;
    };
    r.size_km2 = positive("size_km2");
    r.altitude_m = positive("altitude_m");
    r.mean_daily_precip_mm = positive("mean_daily_precip_mm");
    r.mean_annmax_precip_mm = positive("mean_annmax_precip_mm");
    table.rows.push_back(std::move(r));
  }
  return table;
}

MaximaTable load_maxima(const std::filesystem::path& path, const StationTable& stations,
                        std::ostream* warnings) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  static const std::vector<std::string> required = {"station_id", "year", "annual_max_m3s"};
  const Header h = read_header(in, path, required, warnings);

  std::set<std::string> known;
  for (const auto& r : stations.rows) known.insert(r.station_id);

  MaximaTable table;
  std::set<std::pair<std::string, int>> seen;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    MaximaRow r;
    r.station_id = field(fields, h, "station_id", row);
    if (!known.count(r.station_id))
      throw ParseError(row, "station_id", "unknown station id '" + r.station_id + "'");
    r.year = parse_int(field(fields, h, "year", row), row, "year");
    if (!seen.insert({r.station_id, r.year}).second)
      throw ParseError(row, "year",
                       "duplicate (station, year) pair (" + r.station_id + ", " +
                           std::to_string(r.year) + ")");
    r.annual_max_m3s =
        parse_double(field(fields, h, "annual_max_m3s", row), row, "annual_max_m3s");
    if (!(r.annual_max_m3s > 0.0))
      throw ParseError(row, "annual_max_m3s", "discharge must be strictly positive");
    table.rows.push_back(std::move(r));
  }
  return table;
}

void write_stations(const std::filesystem::path& path, const StationTable& table) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << "station_id,centroid_x,centroid_y,size_km2,altitude_m,mean_daily_precip_mm,"
         "mean_annmax_precip_mm\n";
  for (const auto& r : table.rows) {
    out << r.station_id << ',' << format_value(r.centroid_x) << ',' << format_value(r.centroid_y)
        << ',' << format_value(r.size_km2) << ',' << format_value(r.altitude_m) << ','
        << format_value(r.mean_daily_precip_mm) << ',' << format_value(r.mean_annmax_precip_mm)
        << '\n';
  }
}

void write_maxima(const std::filesystem::path& path, const MaximaTable& table) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << "station_id,year,annual_max_m3s\n";
  for (const auto& r : table.rows)
    out << r.station_id << ',' << r.year << ',' << format_value(r.annual_max_m3s) << '\n';
}

std::vector<Station> make_stations(const StationTable& stations, const MaximaTable& maxima) {
  std::map<std::string, Station> by_id;
  std::vector<std::string> order;
  for (const auto& r : stations.rows) {
    Station s;
    s.id = r.station_id;
    s.x = r.centroid_x;
    s.y = r.centroid_y;
    s.attributes = {{"size_km2", r.size_km2},
                    {"altitude_m", r.altitude_m},
                    {"mean_daily_precip_mm", r.mean_daily_precip_mm},
                    {"mean_annmax_precip_mm", r.mean_annmax_precip_mm}};
    by_id.emplace(s.id, std::move(s));
    order.push_back(r.station_id);
  }
  for (const auto& r : maxima.rows) {
    Station& s = by_id.at(r.station_id);
    s.years.push_back(r.year);
    s.maxima.push_back(r.annual_max_m3s);
  }
  std::vector<Station> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    Station& s = by_id.at(id);
    // sort the record by year
    std::vector<std::size_t> idx(s.years.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return s.years[a] < s.years[b];
    });
    std::vector<int> years;
    std::vector<double> max;
    years.reserve(idx.size());
    max.reserve(idx.size());
    for (auto i : idx) {
      years.push_back(s.years[i]);
      max.push_back(s.maxima[i]);
    }
    s.years = std::move(years);
    s.maxima = std::move(max);
    out.push_back(std::move(s));
  }
  return out;
}

StationTable to_station_table(const std::vector<Station>& stations) {
  StationTable table;
  table.rows.reserve(stations.size());
  for (const auto& s : stations)
    table.rows.push_back({s.id, s.x, s.y, s.attribute("size_km2"), s.attribute("altitude_m"),
                          s.attribute("mean_daily_precip_mm"),
                          s.attribute("mean_annmax_precip_mm")});
  return table;
}

MaximaTable to_maxima_table(const std::vector<Station>& stations) {
  MaximaTable table;
  for (const auto& s : stations)
    for (std::size_t i = 0; i < s.years.size(); ++i)
      table.rows.push_back({s.id, s.years[i], s.maxima[i]});
  return table;
}

void write_table(std::ostream& os, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

void write_table(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  write_table(out, table);
}

}  // namespace floodreg
