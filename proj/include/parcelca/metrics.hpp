#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parcelca/ca.hpp"
#include "parcelca/parcel.hpp"
#include "parcelca/scenarios.hpp"

namespace pca {

/// A set of expanded elements (parcels, or raster cells for cross-model
/// comparison) with per-element areas. Ids are unique and sorted.
struct ExpansionSet {
  struct Element {
    std::uint64_t id = 0;
    double area_km2 = 0.0;
  };
  std::vector<Element> elements;

  static ExpansionSet from_pairs(std::vector<Element> elems);
  double total_area_km2() const;
  bool contains(std::uint64_t id) const;
  const Element* find(std::uint64_t id) const;
};

/// Converted parcels of a simulation run, with their areas.
ExpansionSet expansion_of(const SimulationResult& r, const std::vector<ParcelRecord>& parcels);

/// area(a intersect b) / area(a); a is the reference set.
double overlap_precision(const ExpansionSet& a, const ExpansionSet& b);

/// Area-weighted agreement over the universe:
/// (area expanded in both + area expanded in neither) / universe area.
double confusion_precision(const ExpansionSet& simulated, const ExpansionSet& observed,
                           const ExpansionSet& universe);

/// Project parcel expansion onto a square grid (cell-center-in-polygon) so a
/// vector run can be compared against raster-model output. Cell ids encode
/// the (column, row) pair of the cell in a grid anchored at the origin.
ExpansionSet rasterize_expansion(const std::vector<ParcelRecord>& parcels,
                                 const std::vector<std::uint64_t>& converted_ids,
                                 double cell_m = 500.0, PointM origin = {0.0, 0.0});

struct SummaryRow {
  std::string label;
  std::optional<std::uint64_t> city_id;  // absent for aggregate rows
  double initial_km2 = 0.0;
  double final_km2 = 0.0;
  double growth_km2 = 0.0;
  double growth_pct = 0.0;  // 100 * growth / initial
  bool shortfall = false;
};

struct SummaryTable {
  std::vector<SummaryRow> city_rows;   // ascending city_id
  std::vector<SummaryRow> group_rows;  // urban-agglomeration membership split
  SummaryRow total;
};

/// Per-city and aggregate expansion accounts; an optional filter keeps only
/// matching cities (e.g. one agglomeration).
SummaryTable summarize(const SimulationResult& r, const std::vector<CityRecord>& cities,
                       const std::vector<std::uint64_t>* city_filter = nullptr);

}  // namespace pca
