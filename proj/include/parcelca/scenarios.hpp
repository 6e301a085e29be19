#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "parcelca/geometry.hpp"

namespace pca {

enum class AdminLevel { MD, SPC, OPCC, PLC, CLC };

AdminLevel parse_admin_level(const std::string& s);
const char* to_string(AdminLevel level);

struct CityRecord {
  std::uint64_t city_id = 0;
  std::string name;
  AdminLevel admin_level = AdminLevel::CLC;
  PointM center;
  double urban_area_2007_km2 = 0.0;
  double urban_area_2012_km2 = 0.0;
  bool in_urban_agglomeration = false;
};

void validate_city(const CityRecord& c);

enum class ScenarioKind { BAU, UAO, NTU, Custom };

ScenarioKind parse_scenario_kind(const std::string& s);
const char* to_string(ScenarioKind kind);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::BAU;
  int horizon_years = 5;
  std::map<std::uint64_t, double> custom_rates;  // city_id -> annual rate, Custom only

  void validate() const;
};

/// Compound annual growth rate observed between the two reference years.
double bau_rate(const CityRecord& c);

/// 5.0% inside a designated urban agglomeration, 4.0% outside.
double uao_rate(const CityRecord& c);

/// Size-class rate: >400 km2 -> 3%; (200,400] -> 4%; (100,200] -> 5%; <=100 -> 6%.
double ntu_rate(const CityRecord& c);

/// The annual rate the scenario assigns to this city.
double resolve_rate(const CityRecord& c, const ScenarioSpec& s);

/// Year-by-year target urban areas, km2: area_2012 * (1+r)^t for t = 1..horizon.
std::vector<double> target_areas(const CityRecord& c, const ScenarioSpec& s);

}  // namespace pca
