#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parcelca/geometry.hpp"
#include "parcelca/parcel.hpp"
#include "parcelca/scenarios.hpp"

namespace pca {

/// Recipe for a synthetic country: square cities tessellated into jittered
/// quad parcels with a contiguous urban core and center-decaying density.
/// Everything is a pure function of the seed.
struct SynthSpec {
  int cities = 1;
  int parcels_per_city = 25;  // rounded to the nearest square grid
  double parcel_size_m = 250.0;
  double urban_seed_fraction = 0.2;
  std::string density_model = "decay";  // "decay" or "uniform"
  std::uint64_t seed = 0;
  bool exclusion_band = false;  // reserve each city's rightmost column

  void validate() const;
};

struct SynthOutput {
  std::vector<ParcelRecord> parcels;  // canonical order
  std::vector<CityRecord> cities;     // ascending city_id
  ExclusionSet exclusions;
  double total_parcel_area_km2 = 0.0;  // generator ledger, for load checks
};

SynthOutput generate_synthetic(const SynthSpec& spec);

}  // namespace pca
