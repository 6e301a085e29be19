#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parcelca/calibration.hpp"
#include "parcelca/geometry.hpp"

namespace pca {

enum class LandState { NonUrban, Urban };

/// One land parcel: the cell of the automaton.
struct ParcelRecord {
  std::uint64_t parcel_id = 0;
  std::uint64_t city_id = 0;
  Polygon polygon;
  LandState state = LandState::NonUrban;
  double raw_density = 0.0;  // POIs per km2
  std::optional<FeatureVector> features;
  bool excluded = false;
};

double parcel_area_km2(const ParcelRecord& p);

/// Sort ascending by parcel_id; duplicate ids raise a data error. All graph
/// and simulation indices refer to this canonical order.
void sort_canonical(std::vector<ParcelRecord>& parcels);

bool is_canonical(const std::vector<ParcelRecord>& parcels);

/// SHA-256 over the canonical id + vertex stream, hex. Any change to any
/// parcel id or vertex changes the digest.
std::string parcel_set_digest(const std::vector<ParcelRecord>& parcels);

}  // namespace pca
