#include "parcelca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "parcelca/errors.hpp"

namespace pca {

ExpansionSet ExpansionSet::from_pairs(std::vector<Element> elems) {
  std::sort(elems.begin(), elems.end(),
            [](const Element& a, const Element& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < elems.size(); ++i) {
    if (!(elems[i].area_km2 > 0.0)) {
      fail(ErrorKind::Data, "expansion element " + std::to_string(elems[i].id) +
                                " has non-positive area");
    }
    if (i > 0 && elems[i].id == elems[i - 1].id) {
      fail(ErrorKind::Data, "duplicate expansion element id " + std::to_string(elems[i].id));
    }
  }
  ExpansionSet s;
  s.elements = std::move(elems);
  return s;
}

double ExpansionSet::total_area_km2() const {
  double total = 0.0;
  for (const auto& e : elements) total += e.area_km2;
  return total;
}

const ExpansionSet::Element* ExpansionSet::find(std::uint64_t id) const {
  const auto it = std::lower_bound(
      elements.begin(), elements.end(), id,
      [](const Element& e, std::uint64_t v) { return e.id < v; });
  if (it == elements.end() || it->id != id) return nullptr;
  return &*it;
}

bool ExpansionSet::contains(std::uint64_t id) const { return find(id) != nullptr; }

ExpansionSet expansion_of(const SimulationResult& r, const std::vector<ParcelRecord>& parcels) {
  std::map<std::uint64_t, double> area_by_id;
  for (const auto& p : parcels) area_by_id[p.parcel_id] = parcel_area_km2(p);
  std::vector<ExpansionSet::Element> elems;
  for (const auto& city : r.cities) {
    for (const auto& year : city.years) {
      for (std::uint64_t id : year.converted_ids) {
        const auto it = area_by_id.find(id);
        if (it == area_by_id.end()) {
          fail(ErrorKind::Data, "converted parcel " + std::to_string(id) + " not in parcel set");
        }
        elems.push_back({id, it->second});
      }
    }
  }
  return ExpansionSet::from_pairs(std::move(elems));
}

double overlap_precision(const ExpansionSet& a, const ExpansionSet& b) {
  const double denom = a.total_area_km2();
  if (!(denom > 0.0)) {
    fail(ErrorKind::Domain, "overlap precision undefined for an empty reference set");
  }
  double shared = 0.0;
  for (const auto& e : a.elements) {
    if (b.contains(e.id)) shared += e.area_km2;  // reference areas by design
  }
  return shared / denom;
}

double confusion_precision(const ExpansionSet& simulated, const ExpansionSet& observed,
                           const ExpansionSet& universe) {
  const double total = universe.total_area_km2();
  if (!(total > 0.0)) fail(ErrorKind::Domain, "confusion precision needs a nonempty universe");
  for (const auto& e : simulated.elements) {
    if (!universe.contains(e.id)) {
      fail(ErrorKind::Data, "simulated element " + std::to_string(e.id) + " outside universe");
    }
  }
  for (const auto& e : observed.elements) {
    if (!universe.contains(e.id)) {
      fail(ErrorKind::Data, "observed element " + std::to_string(e.id) + " outside universe");
    }
  }
  double agree = 0.0;
  for (const auto& e : universe.elements) {
    const bool sim = simulated.contains(e.id);
    const bool obs = observed.contains(e.id);
    if (sim == obs) agree += e.area_km2;
  }
  return agree / total;
}

ExpansionSet rasterize_expansion(const std::vector<ParcelRecord>& parcels,
                                 const std::vector<std::uint64_t>& converted_ids,
                                 double cell_m, PointM origin) {
  if (!(cell_m > 0.0)) fail(ErrorKind::Config, "raster cell size must be positive");
  std::set<std::uint64_t> wanted(converted_ids.begin(), converted_ids.end());
  const double cell_km2 = cell_m * cell_m / 1e6;

  std::set<std::uint64_t> cells;
  for (const auto& p : parcels) {
    if (!wanted.erase(p.parcel_id)) continue;
    const BBox box = p.polygon.bbox();
    const auto lo_col = static_cast<std::int64_t>(std::floor((box.min_x - origin.x) / cell_m));
    const auto hi_col = static_cast<std::int64_t>(std::floor((box.max_x - origin.x) / cell_m));
    const auto lo_row = static_cast<std::int64_t>(std::floor((box.min_y - origin.y) / cell_m));
    const auto hi_row = static_cast<std::int64_t>(std::floor((box.max_y - origin.y) / cell_m));
    for (std::int64_t row = lo_row; row <= hi_row; ++row) {
      for (std::int64_t col = lo_col; col <= hi_col; ++col) {
        const PointM center{origin.x + (static_cast<double>(col) + 0.5) * cell_m,
                            origin.y + (static_cast<double>(row) + 0.5) * cell_m};
        if (!point_in_polygon(center, p.polygon)) continue;
        // Pack the signed (col, row) pair into one id; 2^31 offset keeps it
        // non-negative for any realistic extent.
        const std::uint64_t id =
            (static_cast<std::uint64_t>(col + (1ll << 31)) << 32) |
            static_cast<std::uint64_t>(row + (1ll << 31));
        cells.insert(id);
      }
    }
  }

  if (!wanted.empty()) {
    fail(ErrorKind::Data,
         "converted parcel " + std::to_string(*wanted.begin()) + " not in parcel set");
  }

  std::vector<ExpansionSet::Element> elems;
  elems.reserve(cells.size());
  for (std::uint64_t id : cells) elems.push_back({id, cell_km2});
  return ExpansionSet::from_pairs(std::move(elems));
}

namespace {

SummaryRow make_row(std::string label, std::optional<std::uint64_t> city_id, double initial,
                    double final_area, bool shortfall) {
  SummaryRow row;
  row.label = std::move(label);
  row.city_id = city_id;
  row.initial_km2 = initial;
  row.final_km2 = final_area;
  row.growth_km2 = final_area - initial;
  row.growth_pct = initial > 0.0 ? 100.0 * row.growth_km2 / initial : 0.0;
  row.shortfall = shortfall;
  return row;
}

}  // namespace

SummaryTable summarize(const SimulationResult& r, const std::vector<CityRecord>& cities,
                       const std::vector<std::uint64_t>* city_filter) {
  std::map<std::uint64_t, const CityRecord*> by_id;
  for (const auto& c : cities) by_id[c.city_id] = &c;
  std::set<std::uint64_t> keep;
  if (city_filter) keep.insert(city_filter->begin(), city_filter->end());

  SummaryTable table;
  double init_in = 0.0, final_in = 0.0, init_out = 0.0, final_out = 0.0;
  bool short_in = false, short_out = false;

  for (const auto& traj : r.cities) {
    if (city_filter && !keep.count(traj.city_id)) continue;
    const auto it = by_id.find(traj.city_id);
    if (it == by_id.end()) {
      fail(ErrorKind::Data, "result references unknown city " + std::to_string(traj.city_id));
    }
    const CityRecord& c = *it->second;
    const double final_area =
        traj.years.empty() ? traj.initial_km2 : traj.years.back().realized_km2;
    bool shortfall = false;
    for (const auto& y : traj.years) shortfall = shortfall || y.shortfall;
    table.city_rows.push_back(
        make_row(c.name, traj.city_id, traj.initial_km2, final_area, shortfall));
    if (c.in_urban_agglomeration) {
      init_in += traj.initial_km2;
      final_in += final_area;
      short_in = short_in || shortfall;
    } else {
      init_out += traj.initial_km2;
      final_out += final_area;
      short_out = short_out || shortfall;
    }
  }

  table.group_rows.push_back(
      make_row("urban-agglomeration", std::nullopt, init_in, final_in, short_in));
  table.group_rows.push_back(
      make_row("other-cities", std::nullopt, init_out, final_out, short_out));
  table.total = make_row("all-cities", std::nullopt, init_in + init_out, final_in + final_out,
                         short_in || short_out);
  return table;
}

}  // namespace pca
