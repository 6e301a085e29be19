#include "parcelca/scenarios.hpp"

#include <cmath>

#include "parcelca/errors.hpp"

namespace pca {

AdminLevel parse_admin_level(const std::string& s) {
  if (s == "MD") return AdminLevel::MD;
  if (s == "SPC") return AdminLevel::SPC;
  if (s == "OPCC") return AdminLevel::OPCC;
  if (s == "PLC") return AdminLevel::PLC;
  if (s == "CLC") return AdminLevel::CLC;
  fail(ErrorKind::Schema, "unknown admin_level '" + s + "'");
}

const char* to_string(AdminLevel level) {
  switch (level) {
    case AdminLevel::MD: return "MD";
    case AdminLevel::SPC: return "SPC";
    case AdminLevel::OPCC: return "OPCC";
    case AdminLevel::PLC: return "PLC";
    case AdminLevel::CLC: return "CLC";
  }
  return "?";
}

void validate_city(const CityRecord& c) {
  if (!(c.urban_area_2007_km2 > 0.0) || !std::isfinite(c.urban_area_2007_km2)) {
    fail(ErrorKind::Data, "city " + std::to_string(c.city_id) + ": urban_area_2007 must be positive");
  }
  if (!(c.urban_area_2012_km2 > 0.0) || !std::isfinite(c.urban_area_2012_km2)) {
    fail(ErrorKind::Data, "city " + std::to_string(c.city_id) + ": urban_area_2012 must be positive");
  }
  if (!std::isfinite(c.center.x) || !std::isfinite(c.center.y)) {
    fail(ErrorKind::Data, "city " + std::to_string(c.city_id) + ": non-finite center");
  }
}

ScenarioKind parse_scenario_kind(const std::string& s) {
  if (s == "BAU") return ScenarioKind::BAU;
  if (s == "UAO") return ScenarioKind::UAO;
  if (s == "NTU") return ScenarioKind::NTU;
  if (s == "CUSTOM") return ScenarioKind::Custom;
  fail(ErrorKind::Config, "unknown scenario '" + s + "' (expected BAU, UAO, NTU or CUSTOM)");
}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::BAU: return "BAU";
    case ScenarioKind::UAO: return "UAO";
    case ScenarioKind::NTU: return "NTU";
    case ScenarioKind::Custom: return "CUSTOM";
  }
  return "?";
}

void ScenarioSpec::validate() const {
  if (horizon_years < 1) fail(ErrorKind::Config, "horizon_years must be >= 1");
  for (const auto& [city_id, rate] : custom_rates) {
    if (!std::isfinite(rate) || rate <= -1.0) {
      fail(ErrorKind::Config,
           "custom rate for city " + std::to_string(city_id) + " must be finite and > -1");
    }
  }
}

double bau_rate(const CityRecord& c) {
  validate_city(c);
  // Compound annual rate over the five-year reference window.
  return std::pow(c.urban_area_2012_km2 / c.urban_area_2007_km2, 1.0 / 5.0) - 1.0;
}

double uao_rate(const CityRecord& c) { return c.in_urban_agglomeration ? 0.05 : 0.04; }

double ntu_rate(const CityRecord& c) {
  const double area = c.urban_area_2012_km2;
  if (area > 400.0) return 0.03;
  if (area > 200.0) return 0.04;
  if (area > 100.0) return 0.05;
  return 0.06;
}

double resolve_rate(const CityRecord& c, const ScenarioSpec& s) {
  switch (s.kind) {
    case ScenarioKind::BAU: return bau_rate(c);
    case ScenarioKind::UAO: return uao_rate(c);
    case ScenarioKind::NTU: return ntu_rate(c);
    case ScenarioKind::Custom: {
      const auto it = s.custom_rates.find(c.city_id);
      if (it == s.custom_rates.end()) {
        fail(ErrorKind::Data, "custom scenario has no rate for city " + std::to_string(c.city_id));
      }
      return it->second;
    }
  }
  fail(ErrorKind::Internal, "unreachable scenario kind");
}

std::vector<double> target_areas(const CityRecord& c, const ScenarioSpec& s) {
  s.validate();
  const double rate = resolve_rate(c, s);
  std::vector<double> targets;
  targets.reserve(static_cast<std::size_t>(s.horizon_years));
  for (int t = 1; t <= s.horizon_years; ++t) {
    targets.push_back(c.urban_area_2012_km2 * std::pow(1.0 + rate, t));
  }
  return targets;
}

}  // namespace pca
