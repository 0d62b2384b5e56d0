#pragma once

#include <map>
#include <string>
#include <vector>

#include "floodreg/errors.hpp"

namespace floodreg {

// Ordered list of catchment attribute names used as covariates. Attribute
// values must be strictly positive; the models take them through log links.
struct CovariateSchema {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }

  // An empty schema is allowed and yields intercept-only models.
  void validate() const {
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j)
        if (names[i] == names[j])
          throw std::invalid_argument("duplicate covariate name '" + names[i] + "'");
  }
};

// The four Table-style attributes every dataset carries.
inline CovariateSchema canonical_schema() {
  return CovariateSchema{{"size_km2", "altitude_m", "mean_daily_precip_mm", "mean_annmax_precip_mm"}};
}

// A gauging site: projected planar centroid coordinates (meters), strictly
// positive catchment attributes, and an annual-maxima record aligned with
// strictly increasing calendar years. Ungauged targets have empty records.
struct Station {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  std::map<std::string, double> attributes;
  std::vector<int> years;
  std::vector<double> maxima;

  std::size_t record_length() const { return maxima.size(); }

  double attribute(const std::string& name) const {
    auto it = attributes.find(name);
    if (it == attributes.end())
      throw SchemaMismatch("station '" + id + "' has no attribute '" + name + "'");
    return it->second;
  }
};

// Attribute vector in schema order.
inline std::vector<double> attribute_vector(const Station& s, const CovariateSchema& schema) {
  std::vector<double> v;
  v.reserve(schema.size());
  for (const auto& name : schema.names) v.push_back(s.attribute(name));
  return v;
}

}  // namespace floodreg
