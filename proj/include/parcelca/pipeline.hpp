#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "parcelca/ca.hpp"
#include "parcelca/io.hpp"
#include "parcelca/metrics.hpp"
#include "parcelca/neighbors.hpp"
#include "parcelca/parcel.hpp"
#include "parcelca/scenarios.hpp"

namespace pca {

/// Cache features and exclusion flags on every parcel. Densities standardize
/// against the nationwide maximum; when that maximum is <= 1 (log undefined)
/// every density_std is 0. Each parcel's city must exist.
void prepare_parcels(std::vector<ParcelRecord>& parcels, const std::vector<CityRecord>& cities,
                     const ExclusionSet& exclusions, double exclusion_overlap = 0.5,
                     int jobs = 0);

CaParams ca_params_from(const RunConfig& cfg, const Coefficients& w);

/// File-level simulate: load inputs, resolve the neighbor graph (load the
/// cache when the file exists, else compute — and save when a path was
/// given), run the scenario, export the map + summary, and write the
/// manifest. Returns the result so callers can inspect shortfalls.
struct SimulateFiles {
  std::filesystem::path parcels;
  std::filesystem::path cities;
  std::optional<std::filesystem::path> exclusions;
  std::optional<std::filesystem::path> graph;
  std::optional<std::filesystem::path> config;  // manifest provenance only
  std::filesystem::path output;
};

SimulationResult run_simulate_files(const SimulateFiles& files, const RunConfig& cfg);

/// Rebuild expansion accounts from an exported run (shortfall flags are not
/// stored in exports and stay false here).
SummaryTable summary_from_export(const ExportedRun& run, const std::vector<CityRecord>& cities);

/// Machine-readable twin of the summary CSV.
std::string report_json(const SummaryTable& table, const std::string& scenario);

}  // namespace pca
