#pragma once

#include <cstdint>
#include <vector>

#include "parcelca/errors.hpp"

namespace pca {

/// A point in planar projected coordinates, meters.
struct PointM {
  double x = 0.0;
  double y = 0.0;
};

double distance_m(PointM a, PointM b);

/// Euclidean distance in kilometers.
double distance_km(PointM a, PointM b);

struct BBox {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

  bool intersects(const BBox& o) const {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
  BBox expanded(double r) const { return {min_x - r, min_y - r, max_x + r, max_y + r}; }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

using Ring = std::vector<PointM>;

/// Record of what geometry repair did to an input ring set.
struct RepairNote {
  bool closed_ring = false;     // a ring arrived without its closing vertex
  int dropped_vertices = 0;     // consecutive duplicates removed
  bool touched() const { return closed_ring || dropped_vertices > 0; }
};

/// Simple planar polygon: one exterior ring plus zero or more interior rings
/// (holes). Rings are stored open; the closing vertex is implicit. Inputs are
/// repaired by ring closure and duplicate-vertex removal only; a
/// self-intersecting exterior ring is rejected with a geometry error.
class Polygon {
 public:
  Polygon() = default;

  /// Validate, repair and adopt rings. rings[0] is the exterior.
  /// Throws Error(ErrorKind::Geometry) on degenerate or self-intersecting input.
  static Polygon make(std::vector<Ring> rings, RepairNote* note = nullptr);

  static Polygon rectangle(double x0, double y0, double x1, double y1);

  const Ring& exterior() const { return rings_.front(); }
  const std::vector<Ring>& rings() const { return rings_; }
  std::size_t hole_count() const { return rings_.size() - 1; }
  const BBox& bbox() const { return bbox_; }

  /// Exterior area minus hole areas, m². Always > 0 for a valid polygon.
  double area() const { return area_; }

  bool empty() const { return rings_.empty(); }

 private:
  std::vector<Ring> rings_;
  BBox bbox_;
  double area_ = 0.0;
};

/// Shoelace area of the exterior minus interiors, m².
double polygon_area(const Polygon& p);

/// Length of the exterior ring only, m.
double polygon_perimeter(const Polygon& p);

/// Perimeter² / area. 16 for any square; bounded below by 4π.
double compactness(const Polygon& p);

/// Area-weighted centroid (holes subtracted).
PointM centroid(const Polygon& p);

/// Minimum distance between polygon boundaries, m. Zero when the polygons
/// intersect, touch, or one contains the other.
double min_distance(const Polygon& p, const Polygon& q);

/// Point-in-polygon with holes. Points on the boundary are not guaranteed
/// either way; callers must not rely on knife-edge results.
bool point_in_polygon(PointM pt, const Polygon& poly);

/// Area of the overlap of two polygons, m². Exact for simple polygons
/// (computed by triangulating both and clipping triangle pairs).
double intersection_area(const Polygon& p, const Polygon& q);

enum class ExclusionTag { Steep, Water };

struct ExclusionZone {
  ExclusionTag tag;
  Polygon polygon;
};

struct ExclusionSet {
  std::vector<ExclusionZone> zones;
  bool empty() const { return zones.empty(); }
  std::size_t size() const { return zones.size(); }
};

/// True iff any single exclusion polygon overlaps p by more than
/// overlap_fraction of p's area.
bool intersects_exclusion(const Polygon& p, const ExclusionSet& ex, double overlap_fraction = 0.5);

/// Static spatial index over bounding boxes (STR-packed R-tree).
/// Immutable after build; query returns the ids of every stored box that
/// intersects the window (exact bbox test, no false negatives).
class SpatialIndex {
 public:
  SpatialIndex() = default;

  static SpatialIndex build(const std::vector<BBox>& boxes);

  void query(const BBox& window, std::vector<std::uint32_t>& out) const;
  std::vector<std::uint32_t> query(const BBox& window) const;

  std::size_t size() const { return count_; }

 private:
  struct Node {
    BBox box;
    std::int32_t first = 0;   // leaf: offset into entries_; internal: offset into children_
    std::int32_t count = 0;   // internal: child count; leaf: entry count, negated
  };

  std::vector<Node> nodes_;
  std::vector<std::int32_t> children_;
  std::vector<std::pair<BBox, std::uint32_t>> entries_;
  std::int32_t root_ = -1;
  std::size_t count_ = 0;
};

/// Index the bounding boxes of a polygon list; ids are list positions.
SpatialIndex build_index(const std::vector<Polygon>& polygons);

}  // namespace pca
