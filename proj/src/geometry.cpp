#include "parcelca/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace pca {

namespace {

constexpr double kAreaEpsScale = 1e-12;

double cross(PointM o, PointM a, PointM b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double ring_signed_area(const Ring& r) {
  double s = 0.0;
  const std::size_t n = r.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    s += r[j].x * r[i].y - r[i].x * r[j].y;
  }
  return 0.5 * s;
}

double ring_length(const Ring& r) {
  double s = 0.0;
  const std::size_t n = r.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    s += std::hypot(r[i].x - r[j].x, r[i].y - r[j].y);
  }
  return s;
}

bool same_point(PointM a, PointM b) { return a.x == b.x && a.y == b.y; }

// Inclusive segment intersection (touching counts).
bool segments_intersect(PointM p1, PointM p2, PointM q1, PointM q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](PointM a, PointM b, PointM c) {
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

bool ring_self_intersects(const Ring& r) {
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PointM a1 = r[i];
    const PointM a2 = r[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // wrap-adjacent
      if (segments_intersect(a1, a2, r[j], r[(j + 1) % n])) return true;
    }
  }
  return false;
}

double point_segment_distance(PointM p, PointM a, PointM b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double segment_segment_distance(PointM a1, PointM a2, PointM b1, PointM b2) {
  if (segments_intersect(a1, a2, b1, b2)) return 0.0;
  double d = point_segment_distance(a1, b1, b2);
  d = std::min(d, point_segment_distance(a2, b1, b2));
  d = std::min(d, point_segment_distance(b1, a1, a2));
  d = std::min(d, point_segment_distance(b2, a1, a2));
  return d;
}

std::size_t distinct_count(const Ring& r) {
  Ring sorted = r;
  std::sort(sorted.begin(), sorted.end(),
            [](PointM a, PointM b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::size_t k = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || !same_point(sorted[i], sorted[i - 1])) ++k;
  }
  return k;
}

using Triangle = std::array<PointM, 3>;

double tri_area_eps(const BBox& b) {
  const double d = std::max(b.width(), b.height());
  return kAreaEpsScale * std::max(d * d, 1.0);
}

// Ear-clipping triangulation of a simple ring. The ring is normalized to CCW
// first; collinear vertices are dropped as zero-area ears.
void triangulate_ring(Ring ring, std::vector<Triangle>& out) {
  if (ring.size() < 3) return;
  if (ring_signed_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());

  BBox box{ring[0].x, ring[0].y, ring[0].x, ring[0].y};
  for (const PointM& p : ring) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  const double eps = tri_area_eps(box);

  std::vector<std::size_t> idx(ring.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  auto strictly_inside = [eps](PointM p, PointM a, PointM b, PointM c) {
    return cross(a, b, p) > eps && cross(b, c, p) > eps && cross(c, a, p) > eps;
  };

  while (idx.size() > 3) {
    bool clipped = false;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t kp = (k + idx.size() - 1) % idx.size();
      const std::size_t kn = (k + 1) % idx.size();
      const PointM a = ring[idx[kp]];
      const PointM b = ring[idx[k]];
      const PointM c = ring[idx[kn]];
      const double cr = cross(a, b, c);
      if (cr < -eps) continue;  // reflex
      if (cr <= eps) {          // collinear spike, remove without emitting
        idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
        clipped = true;
        break;
      }
      bool blocked = false;
      for (std::size_t m = 0; m < idx.size(); ++m) {
        if (m == k || m == kp || m == kn) continue;
        if (strictly_inside(ring[idx[m]], a, b, c)) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      out.push_back({a, b, c});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
      break;
    }
    if (!clipped) {
      // Numerically stuck ring; force-clip the most convex corner so the
      // loop terminates. Only reachable on near-degenerate input.
      std::size_t best = 0;
      double best_cr = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const std::size_t kp = (k + idx.size() - 1) % idx.size();
        const std::size_t kn = (k + 1) % idx.size();
        const double cr = cross(ring[idx[kp]], ring[idx[k]], ring[idx[kn]]);
        if (cr > best_cr) {
          best_cr = cr;
          best = k;
        }
      }
      const std::size_t kp = (best + idx.size() - 1) % idx.size();
      const std::size_t kn = (best + 1) % idx.size();
      out.push_back({ring[idx[kp]], ring[idx[best]], ring[idx[kn]]});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(best));
    }
  }
  if (idx.size() == 3) {
    const PointM a = ring[idx[0]], b = ring[idx[1]], c = ring[idx[2]];
    if (cross(a, b, c) > eps) out.push_back({a, b, c});
  }
}

void normalize_ccw(Triangle& t) {
  if (cross(t[0], t[1], t[2]) < 0.0) std::swap(t[1], t[2]);
}

// Sutherland-Hodgman clip of triangle b against CCW triangle a; returns the
// overlap area.
double triangle_overlap_area(Triangle a, Triangle b) {
  normalize_ccw(a);
  normalize_ccw(b);

  std::vector<PointM> poly(b.begin(), b.end());
  std::vector<PointM> next;
  for (int e = 0; e < 3 && !poly.empty(); ++e) {
    const PointM c1 = a[static_cast<std::size_t>(e)];
    const PointM c2 = a[static_cast<std::size_t>((e + 1) % 3)];
    next.clear();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const PointM s = poly[i];
      const PointM t = poly[(i + 1) % n];
      const double ds = cross(c1, c2, s);
      const double dt = cross(c1, c2, t);
      if (ds >= 0.0) next.push_back(s);
      if ((ds > 0.0 && dt < 0.0) || (ds < 0.0 && dt > 0.0)) {
        const double f = ds / (ds - dt);
        next.push_back({s.x + f * (t.x - s.x), s.y + f * (t.y - s.y)});
      }
    }
    poly.swap(next);
  }
  if (poly.size() < 3) return 0.0;
  return std::abs(ring_signed_area(poly));
}

BBox triangle_bbox(const Triangle& t) {
  BBox b{t[0].x, t[0].y, t[0].x, t[0].y};
  for (int i = 1; i < 3; ++i) {
    b.min_x = std::min(b.min_x, t[static_cast<std::size_t>(i)].x);
    b.min_y = std::min(b.min_y, t[static_cast<std::size_t>(i)].y);
    b.max_x = std::max(b.max_x, t[static_cast<std::size_t>(i)].x);
    b.max_y = std::max(b.max_y, t[static_cast<std::size_t>(i)].y);
  }
  return b;
}

}  // namespace

double distance_m(PointM a, PointM b) { return std::hypot(a.x - b.x, a.y - b.y); }

double distance_km(PointM a, PointM b) {
  if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(b.x) || !std::isfinite(b.y)) {
    fail(ErrorKind::Domain, "distance_km requires finite points");
  }
  return distance_m(a, b) / 1000.0;
}

Polygon Polygon::make(std::vector<Ring> rings, RepairNote* note) {
  RepairNote local;
  if (rings.empty()) fail(ErrorKind::Geometry, "polygon has no rings");

  for (Ring& r : rings) {
    if (r.size() >= 2 && same_point(r.front(), r.back())) {
      r.pop_back();  // stored open
    } else if (r.size() >= 2) {
      local.closed_ring = true;  // arrived unclosed; implicit closure is the repair
    }
    Ring cleaned;
    cleaned.reserve(r.size());
    for (const PointM& p : r) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        fail(ErrorKind::Geometry, "non-finite vertex coordinate");
      }
      if (!cleaned.empty() && same_point(cleaned.back(), p)) {
        ++local.dropped_vertices;
        continue;
      }
      cleaned.push_back(p);
    }
    if (cleaned.size() >= 2 && same_point(cleaned.front(), cleaned.back())) {
      cleaned.pop_back();
      ++local.dropped_vertices;
    }
    if (cleaned.size() < 3 || distinct_count(cleaned) < 3) {
      fail(ErrorKind::Geometry, "degenerate ring (<3 distinct vertices)");
    }
    r = std::move(cleaned);
  }

  if (ring_self_intersects(rings.front())) {
    fail(ErrorKind::Geometry, "self-intersecting exterior ring");
  }

  double area = std::abs(ring_signed_area(rings.front()));
  for (std::size_t i = 1; i < rings.size(); ++i) {
    area -= std::abs(ring_signed_area(rings[i]));
  }
  if (!(area > 0.0)) fail(ErrorKind::Geometry, "polygon area must be positive");

  Polygon poly;
  poly.rings_ = std::move(rings);
  poly.area_ = area;
  const Ring& ext = poly.rings_.front();
  poly.bbox_ = {ext[0].x, ext[0].y, ext[0].x, ext[0].y};
  for (const PointM& p : ext) {
    poly.bbox_.min_x = std::min(poly.bbox_.min_x, p.x);
    poly.bbox_.min_y = std::min(poly.bbox_.min_y, p.y);
    poly.bbox_.max_x = std::max(poly.bbox_.max_x, p.x);
    poly.bbox_.max_y = std::max(poly.bbox_.max_y, p.y);
  }
  if (note) *note = local;
  return poly;
}

Polygon Polygon::rectangle(double x0, double y0, double x1, double y1) {
  return make({{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
}

double polygon_area(const Polygon& p) {
  if (p.empty()) fail(ErrorKind::Geometry, "empty polygon");
  return p.area();
}

double polygon_perimeter(const Polygon& p) {
  if (p.empty()) fail(ErrorKind::Geometry, "empty polygon");
  return ring_length(p.exterior());
}

double compactness(const Polygon& p) {
  const double a = polygon_area(p);
  if (!(a > 0.0)) fail(ErrorKind::Geometry, "compactness requires positive area");
  const double per = polygon_perimeter(p);
  return per * per / a;
}

PointM centroid(const Polygon& p) {
  if (p.empty()) fail(ErrorKind::Geometry, "empty polygon");
  double wsum = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t ri = 0; ri < p.rings().size(); ++ri) {
    const Ring& r = p.rings()[ri];
    const std::size_t n = r.size();
    double a2 = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const double d = r[j].x * r[i].y - r[i].x * r[j].y;
      a2 += d;
      sx += (r[j].x + r[i].x) * d;
      sy += (r[j].y + r[i].y) * d;
    }
    const double area = std::abs(a2) * 0.5;
    if (area <= 0.0) continue;
    const double w = (ri == 0) ? area : -area;
    // centroid of the ring polygon: (sx, sy) / (3 * a2)
    cx += w * (sx / (3.0 * a2));
    cy += w * (sy / (3.0 * a2));
    wsum += w;
  }
  if (wsum <= 0.0) fail(ErrorKind::Geometry, "degenerate polygon centroid");
  return {cx / wsum, cy / wsum};
}

bool point_in_polygon(PointM pt, const Polygon& poly) {
  // Even-odd rule over every ring; holes flip parity back.
  bool inside = false;
  for (const Ring& r : poly.rings()) {
    const std::size_t n = r.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const bool cross_y = (r[i].y > pt.y) != (r[j].y > pt.y);
      if (cross_y &&
          pt.x < (r[j].x - r[i].x) * (pt.y - r[i].y) / (r[j].y - r[i].y) + r[i].x) {
        inside = !inside;
      }
    }
  }
  return inside;
}

double min_distance(const Polygon& p, const Polygon& q) {
  if (p.empty() || q.empty()) fail(ErrorKind::Geometry, "empty polygon");
  double best = std::numeric_limits<double>::infinity();
  for (const Ring& rp : p.rings()) {
    const std::size_t np = rp.size();
    for (std::size_t i = 0, pi = np - 1; i < np; pi = i++) {
      for (const Ring& rq : q.rings()) {
        const std::size_t nq = rq.size();
        for (std::size_t j = 0, pj = nq - 1; j < nq; pj = j++) {
          best = std::min(best, segment_segment_distance(rp[pi], rp[i], rq[pj], rq[j]));
          if (best == 0.0) return 0.0;
        }
      }
    }
  }
  // Disjoint boundaries can still mean full containment.
  if (point_in_polygon(p.exterior().front(), q) || point_in_polygon(q.exterior().front(), p)) {
    return 0.0;
  }
  return best;
}

double intersection_area(const Polygon& p, const Polygon& q) {
  if (p.empty() || q.empty()) fail(ErrorKind::Geometry, "empty polygon");
  if (!p.bbox().intersects(q.bbox())) return 0.0;

  struct SignedTris {
    double sign;
    std::vector<Triangle> tris;
    std::vector<BBox> boxes;
  };
  auto decompose = [](const Polygon& poly) {
    std::vector<SignedTris> rings;
    for (std::size_t i = 0; i < poly.rings().size(); ++i) {
      SignedTris st;
      st.sign = (i == 0) ? 1.0 : -1.0;
      triangulate_ring(poly.rings()[i], st.tris);
      st.boxes.reserve(st.tris.size());
      for (const Triangle& t : st.tris) st.boxes.push_back(triangle_bbox(t));
      rings.push_back(std::move(st));
    }
    return rings;
  };

  const auto ta = decompose(p);
  const auto tb = decompose(q);
  double total = 0.0;
  for (const SignedTris& ra : ta) {
    for (const SignedTris& rb : tb) {
      const double s = ra.sign * rb.sign;
      for (std::size_t i = 0; i < ra.tris.size(); ++i) {
        for (std::size_t j = 0; j < rb.tris.size(); ++j) {
          if (!ra.boxes[i].intersects(rb.boxes[j])) continue;
          const double a = triangle_overlap_area(ra.tris[i], rb.tris[j]);
          if (a > 0.0) total += s * a;
        }
      }
    }
  }
  return std::max(total, 0.0);
}

bool intersects_exclusion(const Polygon& p, const ExclusionSet& ex, double overlap_fraction) {
  if (ex.empty()) return false;
  const double parcel_area = polygon_area(p);
  for (const ExclusionZone& zone : ex.zones) {
    if (!p.bbox().intersects(zone.polygon.bbox())) continue;
    const double overlap = intersection_area(p, zone.polygon);
    if (overlap / parcel_area > overlap_fraction) return true;
  }
  return false;
}

}  // namespace pca
