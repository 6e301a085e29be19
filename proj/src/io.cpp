#include "parcelca/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "parcelca/digest.hpp"
#include "parcelca/errors.hpp"

namespace pca {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kEarthRadiusM = 6371008.8;  // mean sphere radius
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

// ---- CSV plumbing ----------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) fail(ErrorKind::Data, "line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

double parse_csv_double(const std::string& s, std::size_t line_no, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(ErrorKind::Data,
         "line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
  }
  return v;
}

std::uint64_t parse_csv_u64(const std::string& s, std::size_t line_no, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(ErrorKind::Data,
         "line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
  }
  return v;
}

// ---- GeoJSON plumbing ------------------------------------------------------

const json& require_member(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorKind::Schema, where + ": missing '" + key + "'");
  return *it;
}

std::vector<Ring> read_polygon_rings(const json& geometry, const Projection& proj,
                                     const std::string& where) {
  if (!geometry.is_object()) fail(ErrorKind::Schema, where + ": geometry must be an object");
  const json& type = require_member(geometry, "type", where);
  if (!type.is_string() || type.get<std::string>() != "Polygon") {
    fail(ErrorKind::Schema, where + ": geometry type must be 'Polygon'");
  }
  const json& coords = require_member(geometry, "coordinates", where);
  if (!coords.is_array() || coords.empty()) {
    fail(ErrorKind::Schema, where + ": coordinates must be a non-empty array of rings");
  }
  std::vector<Ring> rings;
  rings.reserve(coords.size());
  for (const json& jring : coords) {
    if (!jring.is_array()) fail(ErrorKind::Schema, where + ": ring must be an array");
    Ring ring;
    ring.reserve(jring.size());
    for (const json& pos : jring) {
      if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
        fail(ErrorKind::Schema, where + ": position must be [x, y]");
      }
      ring.push_back(proj.forward({pos[0].get<double>(), pos[1].get<double>()}));
    }
    rings.push_back(std::move(ring));
  }
  return rings;
}

ojson write_polygon_rings(const Polygon& poly, const Projection& proj) {
  ojson coords = ojson::array();
  for (const Ring& ring : poly.rings()) {
    ojson jring = ojson::array();
    for (const PointM& p : ring) {
      const PointM f = proj.inverse(p);
      jring.push_back(ojson::array({f.x, f.y}));
    }
    const PointM f = proj.inverse(ring.front());  // close the ring on disk
    jring.push_back(ojson::array({f.x, f.y}));
    coords.push_back(std::move(jring));
  }
  ojson geometry;
  geometry["type"] = "Polygon";
  geometry["coordinates"] = std::move(coords);
  return geometry;
}

const json& feature_collection(const json& root, const std::string& where) {
  if (!root.is_object()) fail(ErrorKind::Schema, where + ": root must be an object");
  const json& type = require_member(root, "type", where);
  if (!type.is_string() || type.get<std::string>() != "FeatureCollection") {
    fail(ErrorKind::Schema, where + ": root type must be 'FeatureCollection'");
  }
  const json& features = require_member(root, "features", where);
  if (!features.is_array()) fail(ErrorKind::Schema, where + ": 'features' must be an array");
  return features;
}

std::uint64_t read_u64_property(const json& props, const char* key, const std::string& where) {
  const json& v = require_member(props, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(ErrorKind::Schema, where + ": '" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

// ---- projection ------------------------------------------------------------

Projection Projection::azimuthal_equidistant(double lon0, double lat0) {
  Projection p;
  p.kind = Kind::AzimuthalEquidistant;
  p.lon0 = lon0;
  p.lat0 = lat0;
  return p;
}

PointM Projection::forward(PointM file_coords) const {
  if (kind == Kind::Planar) return file_coords;
  const double lam = (file_coords.x - lon0) * kDegToRad;
  const double phi = file_coords.y * kDegToRad;
  const double phi0 = lat0 * kDegToRad;
  const double cos_c =
      std::sin(phi0) * std::sin(phi) + std::cos(phi0) * std::cos(phi) * std::cos(lam);
  const double c = std::acos(std::clamp(cos_c, -1.0, 1.0));
  const double k = c < 1e-12 ? 1.0 : c / std::sin(c);
  return {kEarthRadiusM * k * std::cos(phi) * std::sin(lam),
          kEarthRadiusM * k *
              (std::cos(phi0) * std::sin(phi) - std::sin(phi0) * std::cos(phi) * std::cos(lam))};
}

PointM Projection::inverse(PointM meters) const {
  if (kind == Kind::Planar) return meters;
  const double rho = std::hypot(meters.x, meters.y);
  if (rho < 1e-9) return {lon0, lat0};
  const double c = rho / kEarthRadiusM;
  const double phi0 = lat0 * kDegToRad;
  const double sin_c = std::sin(c), cos_c = std::cos(c);
  const double phi =
      std::asin(std::clamp(cos_c * std::sin(phi0) + meters.y * sin_c * std::cos(phi0) / rho,
                           -1.0, 1.0));
  const double lam = std::atan2(meters.x * sin_c,
                                rho * cos_c * std::cos(phi0) - meters.y * sin_c * std::sin(phi0));
  return {lon0 + lam / kDegToRad, phi / kDegToRad};
}

// ---- text files ------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream out;
  out << file.rdbuf();
  if (file.bad()) fail(ErrorKind::Io, "failed reading " + path.string());
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) fail(ErrorKind::Io, "failed writing " + path.string());
}

// ---- parcels ---------------------------------------------------------------

std::vector<ParcelRecord> load_parcels(const std::filesystem::path& path, const Projection& proj,
                                       LoadReport* report) {
  const json root = parse_json_file(path);
  const json& features = feature_collection(root, path.filename().string());

  std::vector<ParcelRecord> parcels;
  parcels.reserve(features.size());
  std::set<std::uint64_t> seen;
  LoadReport local;
  LoadReport& rep = report ? *report : local;

  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& feature = features[i];
    std::string where = "feature #" + std::to_string(i);
    if (!feature.is_object()) fail(ErrorKind::Schema, where + ": must be an object");
    const json& props = require_member(feature, "properties", where);
    if (!props.is_object()) fail(ErrorKind::Schema, where + ": properties must be an object");

    ParcelRecord p;
    p.parcel_id = read_u64_property(props, "parcel_id", where);
    where += " (parcel_id " + std::to_string(p.parcel_id) + ")";
    if (!seen.insert(p.parcel_id).second) {
      fail(ErrorKind::Schema, "duplicate parcel_id " + std::to_string(p.parcel_id));
    }
    p.city_id = read_u64_property(props, "city_id", where);

    const json& state = require_member(props, "state", where);
    if (!state.is_string()) fail(ErrorKind::Schema, where + ": 'state' must be a string");
    const std::string state_s = state.get<std::string>();
    if (state_s == "urban") p.state = LandState::Urban;
    else if (state_s == "non-urban") p.state = LandState::NonUrban;
    else fail(ErrorKind::Schema, where + ": state must be 'urban' or 'non-urban'");

    const json& density = require_member(props, "raw_density", where);
    if (!density.is_number()) fail(ErrorKind::Schema, where + ": 'raw_density' must be a number");
    p.raw_density = density.get<double>();
    if (!(p.raw_density >= 0.0) || !std::isfinite(p.raw_density)) {
      fail(ErrorKind::Data, where + ": raw_density must be finite and non-negative");
    }

    std::vector<Ring> rings =
        read_polygon_rings(require_member(feature, "geometry", where), proj, where);
    RepairNote note;
    try {
      p.polygon = Polygon::make(std::move(rings), &note);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Geometry) throw;
      rep.rejected.push_back(where + ": " + e.what());
      continue;
    }
    if (note.touched()) {
      std::string what = where + ":";
      if (note.closed_ring) what += " closed unclosed ring;";
      if (note.dropped_vertices > 0) {
        what += " dropped " + std::to_string(note.dropped_vertices) + " duplicate vertices;";
      }
      rep.repaired.push_back(what);
    }
    parcels.push_back(std::move(p));
  }

  if (!report && !local.rejected.empty()) {
    std::string msg = "rejected " + std::to_string(local.rejected.size()) + " feature(s): ";
    msg += local.rejected.front();
    fail(ErrorKind::Data, msg);
  }
  rep.loaded = parcels.size();
  sort_canonical(parcels);
  return parcels;
}

void write_parcels(const std::vector<ParcelRecord>& parcels, const Projection& proj,
                   const std::filesystem::path& path) {
  ojson features = ojson::array();
  for (const ParcelRecord& p : parcels) {
    ojson props;
    props["parcel_id"] = p.parcel_id;
    props["city_id"] = p.city_id;
    props["state"] = p.state == LandState::Urban ? "urban" : "non-urban";
    props["raw_density"] = p.raw_density;
    ojson feature;
    feature["type"] = "Feature";
    feature["properties"] = std::move(props);
    feature["geometry"] = write_polygon_rings(p.polygon, proj);
    features.push_back(std::move(feature));
  }
  ojson root;
  root["type"] = "FeatureCollection";
  root["features"] = std::move(features);
  write_text_file(path, root.dump(1) + "\n");
}

// ---- cities ----------------------------------------------------------------

namespace {
constexpr const char* kCityHeader =
    "city_id,name,admin_level,center_x,center_y,area2007_km2,area2012_km2,in_ua";
}

std::vector<CityRecord> load_cities(const std::filesystem::path& path, const Projection& proj) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Format, path.string() + ": empty city table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCityHeader) {
    fail(ErrorKind::Format, path.string() + ": city table header must be '" +
                                std::string(kCityHeader) + "'");
  }

  std::vector<CityRecord> cities;
  std::set<std::uint64_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line, line_no);
    if (f.size() != 8) {
      fail(ErrorKind::Data, "line " + std::to_string(line_no) + ": expected 8 fields, got " +
                                std::to_string(f.size()));
    }
    CityRecord c;
    c.city_id = parse_csv_u64(f[0], line_no, "city_id");
    if (!seen.insert(c.city_id).second) {
      fail(ErrorKind::Data,
           "line " + std::to_string(line_no) + ": duplicate city_id " + std::to_string(c.city_id));
    }
    c.name = f[1];
    try {
      c.admin_level = parse_admin_level(f[2]);
    } catch (const Error& e) {
      fail(ErrorKind::Schema, "line " + std::to_string(line_no) + ": " + e.what());
    }
    c.center = proj.forward({parse_csv_double(f[3], line_no, "center_x"),
                             parse_csv_double(f[4], line_no, "center_y")});
    c.urban_area_2007_km2 = parse_csv_double(f[5], line_no, "area2007_km2");
    c.urban_area_2012_km2 = parse_csv_double(f[6], line_no, "area2012_km2");
    if (f[7] == "1" || f[7] == "true") c.in_urban_agglomeration = true;
    else if (f[7] == "0" || f[7] == "false") c.in_urban_agglomeration = false;
    else fail(ErrorKind::Data, "line " + std::to_string(line_no) + ": in_ua must be 0/1");
    try {
      validate_city(c);
    } catch (const Error& e) {
      fail(ErrorKind::Data, "line " + std::to_string(line_no) + ": " + e.what());
    }
    cities.push_back(std::move(c));
  }
  std::sort(cities.begin(), cities.end(),
            [](const CityRecord& a, const CityRecord& b) { return a.city_id < b.city_id; });
  return cities;
}

void write_cities(const std::vector<CityRecord>& cities, const Projection& proj,
                  const std::filesystem::path& path) {
  std::ostringstream out;
  out << kCityHeader << '\n';
  for (const CityRecord& c : cities) {
    const PointM center = proj.inverse(c.center);
    out << c.city_id << ',' << csv_escape(c.name) << ',' << to_string(c.admin_level) << ','
        << fmt_double(center.x) << ',' << fmt_double(center.y) << ','
        << fmt_double(c.urban_area_2007_km2) << ',' << fmt_double(c.urban_area_2012_km2) << ','
        << (c.in_urban_agglomeration ? '1' : '0') << '\n';
  }
  write_text_file(path, out.str());
}

// ---- exclusions ------------------------------------------------------------

ExclusionTag parse_exclusion_tag(const std::string& s) {
  if (s == "steep") return ExclusionTag::Steep;
  if (s == "water") return ExclusionTag::Water;
  fail(ErrorKind::Schema, "unknown exclusion tag '" + s + "' (expected 'steep' or 'water')");
}

const char* to_string(ExclusionTag tag) {
  return tag == ExclusionTag::Steep ? "steep" : "water";
}

ExclusionSet load_exclusions(const std::filesystem::path& path, const Projection& proj,
                             LoadReport* report) {
  const json root = parse_json_file(path);
  const json& features = feature_collection(root, path.filename().string());

  ExclusionSet set;
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& feature = features[i];
    const std::string where = "exclusion feature #" + std::to_string(i);
    if (!feature.is_object()) fail(ErrorKind::Schema, where + ": must be an object");
    const json& props = require_member(feature, "properties", where);
    if (!props.is_object()) fail(ErrorKind::Schema, where + ": properties must be an object");
    const json& tag = require_member(props, "tag", where);
    if (!tag.is_string()) fail(ErrorKind::Schema, where + ": 'tag' must be a string");

    ExclusionZone zone;
    zone.tag = parse_exclusion_tag(tag.get<std::string>());
    std::vector<Ring> rings =
        read_polygon_rings(require_member(feature, "geometry", where), proj, where);
    try {
      zone.polygon = Polygon::make(std::move(rings));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Geometry) throw;
      rep.rejected.push_back(where + ": " + e.what());
      continue;
    }
    set.zones.push_back(std::move(zone));
  }
  if (!report && !local.rejected.empty()) {
    fail(ErrorKind::Data, "rejected " + std::to_string(local.rejected.size()) +
                              " exclusion feature(s): " + local.rejected.front());
  }
  rep.loaded = set.zones.size();
  return set;
}

void write_exclusions(const ExclusionSet& exclusions, const Projection& proj,
                      const std::filesystem::path& path) {
  ojson features = ojson::array();
  for (const ExclusionZone& z : exclusions.zones) {
    ojson feature;
    feature["type"] = "Feature";
    feature["properties"] = ojson{{"tag", to_string(z.tag)}};
    feature["geometry"] = write_polygon_rings(z.polygon, proj);
    features.push_back(std::move(feature));
  }
  ojson root;
  root["type"] = "FeatureCollection";
  root["features"] = std::move(features);
  write_text_file(path, root.dump(1) + "\n");
}

// ---- result export ---------------------------------------------------------

std::string summary_csv(const SummaryTable& table) {
  std::ostringstream out;
  out << "section,label,city_id,initial_km2,final_km2,growth_km2,growth_pct,shortfall\n";
  const auto row = [&out](const char* section, const SummaryRow& r) {
    out << section << ',' << csv_escape(r.label) << ',';
    if (r.city_id) out << *r.city_id;
    out << ',' << fmt_fixed(r.initial_km2, 3) << ',' << fmt_fixed(r.final_km2, 3) << ','
        << fmt_fixed(r.growth_km2, 3) << ',' << fmt_fixed(r.growth_pct, 1) << ','
        << (r.shortfall ? '1' : '0') << '\n';
  };
  for (const SummaryRow& r : table.city_rows) row("city", r);
  for (const SummaryRow& r : table.group_rows) row("group", r);
  row("total", table.total);
  return out.str();
}

void export_result(const SimulationResult& r, const std::vector<ParcelRecord>& parcels,
                   const std::vector<CityRecord>& cities, const Projection& proj,
                   const std::filesystem::path& path) {
  if (!is_canonical(parcels)) fail(ErrorKind::Data, "parcels must be canonical before export");
  if (r.final_states.size() != parcels.size()) {
    fail(ErrorKind::Data, "result state vector does not match parcel set");
  }

  std::map<std::uint64_t, int> year_of;  // parcel id -> calendar year converted
  for (const auto& traj : r.cities) {
    for (std::size_t t = 0; t < traj.years.size(); ++t) {
      for (std::uint64_t id : traj.years[t].converted_ids) {
        year_of[id] = 2012 + static_cast<int>(t) + 1;
      }
    }
  }

  const std::string scenario_s = to_string(r.scenario);
  ojson features = ojson::array();
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    const ParcelRecord& p = parcels[i];
    ojson props;
    props["parcel_id"] = p.parcel_id;
    props["city_id"] = p.city_id;
    props["state_2012"] = p.state == LandState::Urban ? "urban" : "non-urban";
    const auto it = year_of.find(p.parcel_id);
    if (it != year_of.end()) props["converted_year"] = it->second;
    else props["converted_year"] = nullptr;
    props["scenario"] = scenario_s;
    ojson feature;
    feature["type"] = "Feature";
    feature["properties"] = std::move(props);
    feature["geometry"] = write_polygon_rings(p.polygon, proj);
    features.push_back(std::move(feature));
  }
  ojson root;
  root["type"] = "FeatureCollection";
  root["features"] = std::move(features);
  write_text_file(path, root.dump(1) + "\n");

  std::filesystem::path summary_path = path;
  summary_path.replace_extension(".summary.csv");
  write_text_file(summary_path, summary_csv(summarize(r, cities)));
}

std::vector<std::uint64_t> ExportedRun::converted_ids() const {
  std::vector<std::uint64_t> ids;
  for (const Feature& f : features) {
    if (f.converted_year) ids.push_back(f.parcel_id);
  }
  return ids;
}

ExportedRun load_export(const std::filesystem::path& path, const Projection& proj) {
  const json root = parse_json_file(path);
  const json& features = feature_collection(root, path.filename().string());

  ExportedRun run;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = "feature #" + std::to_string(i);
    const json& feature = features[i];
    if (!feature.is_object()) fail(ErrorKind::Schema, where + ": must be an object");
    const json& props = require_member(feature, "properties", where);

    ExportedRun::Feature f;
    f.parcel_id = read_u64_property(props, "parcel_id", where);
    f.city_id = read_u64_property(props, "city_id", where);
    const json& state = require_member(props, "state_2012", where);
    if (!state.is_string()) fail(ErrorKind::Schema, where + ": 'state_2012' must be a string");
    const std::string state_s = state.get<std::string>();
    if (state_s == "urban") f.state_2012 = LandState::Urban;
    else if (state_s == "non-urban") f.state_2012 = LandState::NonUrban;
    else fail(ErrorKind::Schema, where + ": bad state_2012 '" + state_s + "'");
    const json& year = require_member(props, "converted_year", where);
    if (year.is_number_integer()) f.converted_year = year.get<int>();
    else if (!year.is_null()) fail(ErrorKind::Schema, where + ": converted_year must be int|null");
    const json& scen = require_member(props, "scenario", where);
    if (!scen.is_string()) fail(ErrorKind::Schema, where + ": 'scenario' must be a string");
    if (run.features.empty()) run.scenario = scen.get<std::string>();
    else if (run.scenario != scen.get<std::string>()) {
      fail(ErrorKind::Schema, where + ": inconsistent scenario tags in one export");
    }
    f.polygon =
        Polygon::make(read_polygon_rings(require_member(feature, "geometry", where), proj, where));
    f.area_km2 = f.polygon.area() / 1e6;
    run.features.push_back(std::move(f));
  }
  std::sort(run.features.begin(), run.features.end(),
            [](const ExportedRun::Feature& a, const ExportedRun::Feature& b) {
              return a.parcel_id < b.parcel_id;
            });
  return run;
}

// ---- config ----------------------------------------------------------------

ScenarioSpec RunConfig::scenario_spec() const {
  ScenarioSpec spec;
  spec.kind = scenario;
  spec.horizon_years = horizon_years;
  spec.custom_rates = custom_rates;
  return spec;
}

namespace {

Projection parse_projection(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "planar") return Projection::planar();
    fail(ErrorKind::Config, "unknown projection '" + j.get<std::string>() + "'");
  }
  if (!j.is_object()) fail(ErrorKind::Config, "projection must be 'planar' or an object");
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) {
    fail(ErrorKind::Config, "projection object needs a 'type' string");
  }
  const std::string type_s = type->get<std::string>();
  if (type_s != "aeqd") fail(ErrorKind::Config, "unknown projection type '" + type_s + "'");
  for (const auto& [k, v] : j.items()) {
    if (k != "type" && k != "lon0" && k != "lat0") {
      fail(ErrorKind::Config, "unknown projection key '" + k + "'");
    }
  }
  const auto lon0 = j.find("lon0");
  const auto lat0 = j.find("lat0");
  if (lon0 == j.end() || lat0 == j.end() || !lon0->is_number() || !lat0->is_number()) {
    fail(ErrorKind::Config, "aeqd projection needs numeric 'lon0' and 'lat0'");
  }
  return Projection::azimuthal_equidistant(lon0->get<double>(), lat0->get<double>());
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) fail(ErrorKind::Config, path.string() + ": config must be a JSON object");

  static const std::set<std::string> allowed = {
      "scenario",   "horizon_years",     "beta",          "p_threshold",
      "seed",       "disturbance",       "coefficients_path", "custom_rates",
      "projection", "neighbor_radius_m", "exclusion_overlap", "jobs"};
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(ErrorKind::Config, "unknown config key '" + k + "'");
  }

  RunConfig cfg;
  if (j.count("scenario")) {
    if (!j["scenario"].is_string()) fail(ErrorKind::Config, "'scenario' must be a string");
    cfg.scenario = parse_scenario_kind(j["scenario"].get<std::string>());
  }
  if (j.count("horizon_years")) {
    if (!j["horizon_years"].is_number_integer() || j["horizon_years"].get<std::int64_t>() < 1) {
      fail(ErrorKind::Config, "'horizon_years' must be an integer >= 1");
    }
    cfg.horizon_years = j["horizon_years"].get<int>();
  }
  if (j.count("beta")) {
    if (!j["beta"].is_number()) fail(ErrorKind::Config, "'beta' must be a number");
    cfg.beta = j["beta"].get<double>();
    if (!(cfg.beta >= 0.0 && cfg.beta <= 10.0)) fail(ErrorKind::Config, "beta must lie in [0, 10]");
  }
  if (j.count("p_threshold")) {
    if (!j["p_threshold"].is_number()) fail(ErrorKind::Config, "'p_threshold' must be a number");
    cfg.p_threshold = j["p_threshold"].get<double>();
    if (!(cfg.p_threshold >= 0.0 && cfg.p_threshold <= 1.0)) {
      fail(ErrorKind::Config, "p_threshold must lie in [0, 1]");
    }
  }
  if (j.count("seed")) {
    if (!j["seed"].is_number_unsigned() &&
        !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0)) {
      fail(ErrorKind::Config, "'seed' must be a non-negative integer");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.count("disturbance")) {
    if (!j["disturbance"].is_string()) fail(ErrorKind::Config, "'disturbance' must be a string");
    const std::string d = j["disturbance"].get<std::string>();
    if (d == "on") cfg.disturbance = true;
    else if (d == "off") cfg.disturbance = false;
    else fail(ErrorKind::Config, "'disturbance' must be 'on' or 'off'");
  }
  if (j.count("coefficients_path")) {
    if (j["coefficients_path"].is_string()) {
      cfg.coefficients_path = j["coefficients_path"].get<std::string>();
    } else if (!j["coefficients_path"].is_null()) {
      fail(ErrorKind::Config, "'coefficients_path' must be a string or null");
    }
  }
  if (j.count("custom_rates")) {
    if (!j["custom_rates"].is_object()) fail(ErrorKind::Config, "'custom_rates' must be an object");
    for (const auto& [k, v] : j["custom_rates"].items()) {
      std::uint64_t city = 0;
      const auto res = std::from_chars(k.data(), k.data() + k.size(), city);
      if (res.ec != std::errc{} || res.ptr != k.data() + k.size()) {
        fail(ErrorKind::Config, "custom_rates key '" + k + "' is not a city id");
      }
      if (!v.is_number()) fail(ErrorKind::Config, "custom rate for city " + k + " must be a number");
      cfg.custom_rates[city] = v.get<double>();
    }
  }
  if (j.count("projection")) cfg.projection = parse_projection(j["projection"]);
  if (j.count("neighbor_radius_m")) {
    if (!j["neighbor_radius_m"].is_number() || !(j["neighbor_radius_m"].get<double>() > 0.0)) {
      fail(ErrorKind::Config, "'neighbor_radius_m' must be a positive number");
    }
    cfg.neighbor_radius_m = j["neighbor_radius_m"].get<double>();
  }
  if (j.count("exclusion_overlap")) {
    if (!j["exclusion_overlap"].is_number()) {
      fail(ErrorKind::Config, "'exclusion_overlap' must be a number");
    }
    cfg.exclusion_overlap = j["exclusion_overlap"].get<double>();
    if (!(cfg.exclusion_overlap > 0.0 && cfg.exclusion_overlap <= 1.0)) {
      fail(ErrorKind::Config, "exclusion_overlap must lie in (0, 1]");
    }
  }
  if (j.count("jobs")) {
    if (!j["jobs"].is_number_integer() || j["jobs"].get<std::int64_t>() < 0) {
      fail(ErrorKind::Config, "'jobs' must be a non-negative integer");
    }
    cfg.jobs = j["jobs"].get<int>();
  }
  return cfg;
}

std::string config_snapshot(const RunConfig& cfg) {
  ojson j;
  j["scenario"] = to_string(cfg.scenario);
  j["horizon_years"] = cfg.horizon_years;
  j["beta"] = cfg.beta;
  j["p_threshold"] = cfg.p_threshold;
  j["seed"] = cfg.seed;
  j["disturbance"] = cfg.disturbance ? "on" : "off";
  if (cfg.coefficients_path) j["coefficients_path"] = *cfg.coefficients_path;
  else j["coefficients_path"] = nullptr;
  ojson rates = ojson::object();
  for (const auto& [city, rate] : cfg.custom_rates) rates[std::to_string(city)] = rate;
  j["custom_rates"] = std::move(rates);
  if (cfg.projection.kind == Projection::Kind::Planar) {
    j["projection"] = "planar";
  } else {
    ojson p;
    p["type"] = "aeqd";
    p["lon0"] = cfg.projection.lon0;
    p["lat0"] = cfg.projection.lat0;
    j["projection"] = std::move(p);
  }
  j["neighbor_radius_m"] = cfg.neighbor_radius_m;
  j["exclusion_overlap"] = cfg.exclusion_overlap;
  j["jobs"] = cfg.jobs;
  return j.dump(2) + "\n";
}

// ---- coefficients ----------------------------------------------------------

Coefficients load_coefficients(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) fail(ErrorKind::Config, path.string() + ": coefficients must be an object");
  static const std::set<std::string> allowed = {"a0",        "size_ln", "compact",
                                                "center_km", "density_std", "size_unit"};
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(ErrorKind::Config, "unknown coefficients key '" + k + "'");
  }
  Coefficients w;
  const auto number = [&](const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) {
      fail(ErrorKind::Config, std::string("coefficients need numeric '") + key + "'");
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) fail(ErrorKind::Config, std::string("coefficient '") + key + "' not finite");
    return v;
  };
  w.a0 = number("a0");
  w.size_ln = number("size_ln");
  w.compact = number("compact");
  w.center_km = number("center_km");
  w.density_std = number("density_std");
  const auto unit = j.find("size_unit");
  if (unit == j.end() || !unit->is_string()) {
    fail(ErrorKind::Config, "coefficients need a 'size_unit' string");
  }
  if (unit->get<std::string>() != w.size_unit) {
    fail(ErrorKind::Config, "unsupported size_unit '" + unit->get<std::string>() +
                                "' (expected '" + w.size_unit + "')");
  }
  return w;
}

void save_coefficients(const Coefficients& w, const std::filesystem::path& path) {
  ojson j;
  j["a0"] = w.a0;
  j["size_ln"] = w.size_ln;
  j["compact"] = w.compact;
  j["center_km"] = w.center_km;
  j["density_std"] = w.density_std;
  j["size_unit"] = w.size_unit;
  write_text_file(path, j.dump(2) + "\n");
}

// ---- calibration samples ---------------------------------------------------

namespace {
constexpr const char* kSampleHeader = "size_ln,compact,center_km,density_std,label";
}

std::vector<CalibrationSample> load_samples(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Format, path.string() + ": empty sample table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSampleHeader) {
    fail(ErrorKind::Format,
         path.string() + ": sample header must be '" + std::string(kSampleHeader) + "'");
  }
  std::vector<CalibrationSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line, line_no);
    if (f.size() != 5) {
      fail(ErrorKind::Data, "line " + std::to_string(line_no) + ": expected 5 fields, got " +
                                std::to_string(f.size()));
    }
    CalibrationSample s;
    s.features.size_ln = parse_csv_double(f[0], line_no, "size_ln");
    s.features.compact = parse_csv_double(f[1], line_no, "compact");
    s.features.center_km = parse_csv_double(f[2], line_no, "center_km");
    s.features.density_std = parse_csv_double(f[3], line_no, "density_std");
    if (f[4] == "1") s.label = 1;
    else if (f[4] == "0") s.label = 0;
    else fail(ErrorKind::Data, "line " + std::to_string(line_no) + ": label must be 0 or 1");
    samples.push_back(s);
  }
  return samples;
}

void save_samples(const std::vector<CalibrationSample>& samples,
                  const std::filesystem::path& path) {
  std::ostringstream out;
  out << kSampleHeader << '\n';
  for (const CalibrationSample& s : samples) {
    out << fmt_double(s.features.size_ln) << ',' << fmt_double(s.features.compact) << ','
        << fmt_double(s.features.center_km) << ',' << fmt_double(s.features.density_std) << ','
        << s.label << '\n';
  }
  write_text_file(path, out.str());
}

// ---- manifest --------------------------------------------------------------

void write_manifest(const std::filesystem::path& output_path, const RunConfig& cfg,
                    const std::vector<ManifestInput>& inputs) {
  ojson m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["seed"] = cfg.seed;
  m["config"] = ojson::parse(config_snapshot(cfg));
  ojson in = ojson::object();
  for (const ManifestInput& i : inputs) {
    ojson entry;
    entry["path"] = i.path.string();
    entry["sha256"] = sha256_hex_of_file(i.path);
    in[i.name] = std::move(entry);
  }
  m["inputs"] = std::move(in);
  // Wall-clock timestamps would break the byte-identical-manifest contract;
  // honor the SOURCE_DATE_EPOCH convention instead.
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (epoch) {
    std::uint64_t t = 0;
    const auto res = std::from_chars(epoch, epoch + std::strlen(epoch), t);
    if (res.ec == std::errc{} && res.ptr == epoch + std::strlen(epoch)) m["created_unix"] = t;
    else m["created_unix"] = nullptr;
  } else {
    m["created_unix"] = nullptr;
  }
  write_text_file(std::filesystem::path(output_path.string() + ".manifest.json"),
                  m.dump(2) + "\n");
}

}  // namespace pca
