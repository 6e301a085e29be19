#include "parcelca/parcel.hpp"

#include <algorithm>

#include "parcelca/digest.hpp"
#include "parcelca/errors.hpp"

namespace pca {

double parcel_area_km2(const ParcelRecord& p) { return p.polygon.area() / 1e6; }

void sort_canonical(std::vector<ParcelRecord>& parcels) {
  std::sort(parcels.begin(), parcels.end(),
            [](const ParcelRecord& a, const ParcelRecord& b) { return a.parcel_id < b.parcel_id; });
  for (std::size_t i = 1; i < parcels.size(); ++i) {
    if (parcels[i].parcel_id == parcels[i - 1].parcel_id) {
      fail(ErrorKind::Data, "duplicate parcel_id " + std::to_string(parcels[i].parcel_id));
    }
  }
}

bool is_canonical(const std::vector<ParcelRecord>& parcels) {
  for (std::size_t i = 1; i < parcels.size(); ++i) {
    if (parcels[i - 1].parcel_id >= parcels[i].parcel_id) return false;
  }
  return true;
}

std::string parcel_set_digest(const std::vector<ParcelRecord>& parcels) {
  // Canonical stream: per parcel (ascending id): id, ring count, then each
  // ring as vertex count + raw coordinate bits.
  std::vector<const ParcelRecord*> order;
  order.reserve(parcels.size());
  for (const ParcelRecord& p : parcels) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const ParcelRecord* a, const ParcelRecord* b) { return a->parcel_id < b->parcel_id; });

  Sha256 h;
  h.update_u64(static_cast<std::uint64_t>(order.size()));
  for (const ParcelRecord* p : order) {
    h.update_u64(p->parcel_id);
    h.update_u32(static_cast<std::uint32_t>(p->polygon.rings().size()));
    for (const Ring& ring : p->polygon.rings()) {
      h.update_u32(static_cast<std::uint32_t>(ring.size()));
      for (const PointM& v : ring) {
        h.update_double(v.x);
        h.update_double(v.y);
      }
    }
  }
  return h.hex();
}

}  // namespace pca
