#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "parcelca/ca.hpp"
#include "parcelca/calibration.hpp"
#include "parcelca/geometry.hpp"
#include "parcelca/metrics.hpp"
#include "parcelca/parcel.hpp"
#include "parcelca/scenarios.hpp"

namespace pca {

inline constexpr const char* kToolName = "parcelca";
inline constexpr const char* kToolVersion = "0.1.0";

/// Maps file coordinates to the internal planar meter frame. Planar inputs
/// pass through untouched; geographic inputs (longitude/latitude degrees) use
/// a spherical azimuthal-equidistant projection about a configured center.
struct Projection {
  enum class Kind { Planar, AzimuthalEquidistant };
  Kind kind = Kind::Planar;
  double lon0 = 0.0;  // projection center, degrees
  double lat0 = 0.0;

  static Projection planar() { return {}; }
  static Projection azimuthal_equidistant(double lon0, double lat0);

  PointM forward(PointM file_coords) const;  // file frame -> meters
  PointM inverse(PointM meters) const;       // meters -> file frame
};

/// What ingestion repair did: every touched or dropped feature is named, so
/// a load is never silently partial.
struct LoadReport {
  std::size_t loaded = 0;
  std::vector<std::string> repaired;
  std::vector<std::string> rejected;
};

/// Read a feature collection of parcel polygons. Records come back in
/// canonical (ascending parcel_id) order. When report is null, any rejected
/// feature raises an error instead of being dropped.
std::vector<ParcelRecord> load_parcels(const std::filesystem::path& path, const Projection& proj,
                                       LoadReport* report = nullptr);

std::vector<CityRecord> load_cities(const std::filesystem::path& path, const Projection& proj);

ExclusionSet load_exclusions(const std::filesystem::path& path, const Projection& proj,
                             LoadReport* report = nullptr);

ExclusionTag parse_exclusion_tag(const std::string& s);
const char* to_string(ExclusionTag tag);

void write_parcels(const std::vector<ParcelRecord>& parcels, const Projection& proj,
                   const std::filesystem::path& path);
void write_cities(const std::vector<CityRecord>& cities, const Projection& proj,
                  const std::filesystem::path& path);
void write_exclusions(const ExclusionSet& exclusions, const Projection& proj,
                      const std::filesystem::path& path);

/// Write the expanded-parcel map: one feature per parcel with
/// {parcel_id, city_id, state_2012, converted_year (calendar year or null),
/// scenario}, plus a summary CSV next to it (<output>.summary.csv with the
/// .geojson extension replaced).
void export_result(const SimulationResult& r, const std::vector<ParcelRecord>& parcels,
                   const std::vector<CityRecord>& cities, const Projection& proj,
                   const std::filesystem::path& path);

/// An exported run read back: properties plus geometry, for round-trips,
/// comparisons, and report rebuilding.
struct ExportedRun {
  struct Feature {
    std::uint64_t parcel_id = 0;
    std::uint64_t city_id = 0;
    LandState state_2012 = LandState::NonUrban;
    std::optional<int> converted_year;  // calendar year
    Polygon polygon;
    double area_km2 = 0.0;
  };
  std::string scenario;
  std::vector<Feature> features;  // ascending parcel_id

  /// Converted parcel ids, every year pooled.
  std::vector<std::uint64_t> converted_ids() const;
};

ExportedRun load_export(const std::filesystem::path& path,
                        const Projection& proj = Projection::planar());

/// Everything a run needs, resolved from the config file plus defaults.
struct RunConfig {
  ScenarioKind scenario = ScenarioKind::BAU;
  int horizon_years = 5;
  double beta = 1.0;
  double p_threshold = 0.01;
  std::uint64_t seed = 0;
  bool disturbance = true;
  std::optional<std::string> coefficients_path;
  std::map<std::uint64_t, double> custom_rates;
  Projection projection;
  double neighbor_radius_m = 500.0;
  double exclusion_overlap = 0.5;
  int jobs = 0;

  ScenarioSpec scenario_spec() const;
};

RunConfig load_config(const std::filesystem::path& path);

/// The resolved config serialized back to JSON text (manifest snapshot).
std::string config_snapshot(const RunConfig& cfg);

Coefficients load_coefficients(const std::filesystem::path& path);
void save_coefficients(const Coefficients& w, const std::filesystem::path& path);

std::vector<CalibrationSample> load_samples(const std::filesystem::path& path);
void save_samples(const std::vector<CalibrationSample>& samples,
                  const std::filesystem::path& path);

/// One named input file of a run, digested into the manifest.
struct ManifestInput {
  std::string name;
  std::filesystem::path path;
};

/// Write <output>.manifest.json describing a run: tool version, seed, the
/// resolved config, and a SHA-256 digest per input file. The timestamp is
/// null unless SOURCE_DATE_EPOCH is set, so identical runs write identical
/// manifests.
void write_manifest(const std::filesystem::path& output_path, const RunConfig& cfg,
                    const std::vector<ManifestInput>& inputs);

/// Render a summary table as CSV text (3-decimal areas, 1-decimal percents).
std::string summary_csv(const SummaryTable& table);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace pca
