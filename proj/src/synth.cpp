#include "parcelca/synth.hpp"

#include <algorithm>
#include <cmath>

#include "parcelca/errors.hpp"
#include "parcelca/rng.hpp"

namespace pca {

void SynthSpec::validate() const {
  if (cities < 1) fail(ErrorKind::Config, "synthetic country needs at least one city");
  if (parcels_per_city < 4) fail(ErrorKind::Config, "cities need at least 4 parcels");
  if (!(parcel_size_m > 0.0)) fail(ErrorKind::Config, "parcel size must be positive");
  if (!(urban_seed_fraction >= 0.0 && urban_seed_fraction <= 1.0)) {
    fail(ErrorKind::Config, "urban seed fraction must lie in [0, 1]");
  }
  if (density_model != "decay" && density_model != "uniform") {
    fail(ErrorKind::Config, "density model must be 'decay' or 'uniform'");
  }
}

SynthOutput generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const int side = std::max(2, static_cast<int>(std::lround(std::sqrt(
                                   static_cast<double>(spec.parcels_per_city)))));
  const int per_city = side * side;
  const double cell = spec.parcel_size_m;
  const double city_extent = side * cell;
  const double spacing = city_extent + 10000.0;  // cities never within graph range

  // One stream for the whole country, consumed in a fixed order, so the
  // output is a pure function of the seed.
  std::mt19937_64 rng = make_engine(spec.seed, 0);

  SynthOutput out;
  out.parcels.reserve(static_cast<std::size_t>(spec.cities) * per_city);

  static const AdminLevel kLevels[] = {AdminLevel::MD, AdminLevel::SPC, AdminLevel::OPCC,
                                       AdminLevel::PLC, AdminLevel::CLC};

  for (int k = 0; k < spec.cities; ++k) {
    const double x0 = k * spacing;
    const PointM center{x0 + city_extent / 2.0, city_extent / 2.0};

    // Back-derive a plausible 2007 area from a drawn growth rate, keeping the
    // compound (BAU) rate strictly positive.
    const double hist_rate = uniform_range(rng, 0.02, 0.07);

    // Grid nodes; interior nodes jitter by < cell/5 so every quad stays a
    // simple polygon and the cells still tessellate exactly.
    std::vector<PointM> nodes(static_cast<std::size_t>(side + 1) * (side + 1));
    for (int r = 0; r <= side; ++r) {
      for (int c = 0; c <= side; ++c) {
        PointM p{x0 + c * cell, r * cell};
        if (r > 0 && r < side && c > 0 && c < side) {
          p.x += uniform_range(rng, -0.18, 0.18) * cell;
          p.y += uniform_range(rng, -0.18, 0.18) * cell;
        }
        nodes[static_cast<std::size_t>(r) * (side + 1) + c] = p;
      }
    }
    const auto node = [&](int r, int c) -> PointM {
      return nodes[static_cast<std::size_t>(r) * (side + 1) + c];
    };

    struct Cell {
      Polygon polygon;
      PointM centroid;
      double dist_m;
      int index;
    };
    std::vector<Cell> cells;
    cells.reserve(per_city);
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        Ring ring = {node(r, c), node(r, c + 1), node(r + 1, c + 1), node(r + 1, c)};
        Cell cellrec;
        cellrec.polygon = Polygon::make({std::move(ring)});
        cellrec.centroid = centroid(cellrec.polygon);
        cellrec.dist_m = distance_m(cellrec.centroid, center);
        cellrec.index = r * side + c;
        cells.push_back(std::move(cellrec));
      }
    }

    // Urban core: the n cells nearest the center; side-adjacent cells always
    // outrank diagonals despite jitter, so the core is contiguous.
    std::vector<int> rank(per_city);
    for (int i = 0; i < per_city; ++i) rank[i] = i;
    std::sort(rank.begin(), rank.end(), [&](int a, int b) {
      if (cells[a].dist_m != cells[b].dist_m) return cells[a].dist_m < cells[b].dist_m;
      return cells[a].index < cells[b].index;
    });
    // At least one urban seed: scenario targets need a positive 2012 area.
    const int n_urban = std::clamp(
        static_cast<int>(std::lround(spec.urban_seed_fraction * per_city)), 1, per_city);
    std::vector<char> urban(per_city, 0);
    for (int i = 0; i < n_urban; ++i) urban[rank[i]] = 1;

    const double half_extent_km = city_extent / 2000.0;
    double urban_km2 = 0.0;
    for (const Cell& cellrec : cells) {
      ParcelRecord p;
      p.parcel_id = static_cast<std::uint64_t>(k) * per_city + cellrec.index + 1;
      p.city_id = static_cast<std::uint64_t>(k) + 1;
      p.state = urban[cellrec.index] ? LandState::Urban : LandState::NonUrban;
      if (spec.density_model == "decay") {
        // Strictly decreasing in center distance; max 500 at the center.
        p.raw_density = 500.0 * std::exp(-(cellrec.dist_m / 1000.0) / half_extent_km);
      } else {
        p.raw_density = 100.0;
      }
      const double area_km2 = cellrec.polygon.area() / 1e6;
      out.total_parcel_area_km2 += area_km2;
      if (p.state == LandState::Urban) urban_km2 += area_km2;
      p.polygon = cellrec.polygon;
      out.parcels.push_back(std::move(p));
    }

    CityRecord city;
    city.city_id = static_cast<std::uint64_t>(k) + 1;
    city.name = "SynthCity" + std::to_string(k + 1);
    city.admin_level = kLevels[k % 5];
    city.center = center;
    // The macro 2012 area equals the parcel-derived urban area exactly, so
    // scenario targets and realized areas share one frame of reference.
    city.urban_area_2012_km2 = urban_km2;
    city.urban_area_2007_km2 = urban_km2 / std::pow(1.0 + hist_rate, 5.0);
    city.in_urban_agglomeration = (k % 2 == 0);
    out.cities.push_back(std::move(city));

    if (spec.exclusion_band) {
      ExclusionZone zone;
      zone.tag = (k % 2 == 0) ? ExclusionTag::Water : ExclusionTag::Steep;
      zone.polygon = Polygon::rectangle(x0 + (side - 1) * cell, 0.0, x0 + city_extent,
                                        city_extent);
      out.exclusions.zones.push_back(std::move(zone));
    }
  }

  sort_canonical(out.parcels);
  return out;
}

}  // namespace pca
