#pragma once

// Shared fixtures and independent oracles for the test suite.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "parcelca/calibration.hpp"
#include "parcelca/geometry.hpp"
#include "parcelca/parcel.hpp"
#include "parcelca/rng.hpp"

namespace testutil {

using namespace pca;

// Deterministic standard normal (Box-Muller over the project's own uniform
// helpers, so draws never depend on the standard library's distributions).
inline double normal01(std::mt19937_64& rng) {
  const double u1 = uniform_open01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline Polygon square_at(double x, double y, double side) {
  return Polygon::rectangle(x, y, x + side, y + side);
}

inline ParcelRecord make_parcel(std::uint64_t id, std::uint64_t city, Polygon poly,
                                LandState state = LandState::NonUrban, double density = 0.0) {
  ParcelRecord p;
  p.parcel_id = id;
  p.city_id = city;
  p.polygon = std::move(poly);
  p.state = state;
  p.raw_density = density;
  return p;
}

// Star-shaped polygon about a center: angles strictly increasing, radii in
// [r_min, r_max]; always simple, never degenerate.
inline Polygon random_star_polygon(std::mt19937_64& rng, PointM center, double r_min,
                                   double r_max, int vertices) {
  Ring ring;
  ring.reserve(vertices);
  std::vector<double> angles(vertices);
  for (int i = 0; i < vertices; ++i) {
    angles[i] = (i + 0.2 + 0.6 * uniform01(rng)) * 2.0 * 3.14159265358979323846 / vertices;
  }
  for (int i = 0; i < vertices; ++i) {
    const double r = uniform_range(rng, r_min, r_max);
    ring.push_back({center.x + r * std::cos(angles[i]), center.y + r * std::sin(angles[i])});
  }
  return Polygon::make({std::move(ring)});
}

// O(n^2) neighbor oracle: same-city pairs whose boundary distance is within
// the radius. Input must be canonical; output rows are sorted.
inline std::vector<std::vector<std::uint32_t>> brute_force_neighbors(
    const std::vector<ParcelRecord>& parcels, double radius_m) {
  const std::size_t n = parcels.size();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (parcels[i].city_id != parcels[j].city_id) continue;
      if (min_distance(parcels[i].polygon, parcels[j].polygon) <= radius_m) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

// Planted logistic generator shared by the unit and acceptance suites.
// Feature distributions (documented contract of the recovery tests):
//   size_ln ~ N(0, 5), compact ~ N(0, 1), center_km ~ N(0, 10),
//   density_std ~ U(-1, 1), all independent; label ~ Bernoulli(sigma(w.x)).
inline std::vector<CalibrationSample> planted_samples(std::size_t n, const Coefficients& w,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng = make_engine(seed, 17);
  std::vector<CalibrationSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CalibrationSample s;
    s.features.size_ln = 5.0 * normal01(rng);
    s.features.compact = normal01(rng);
    s.features.center_km = 10.0 * normal01(rng);
    s.features.density_std = uniform_range(rng, -1.0, 1.0);
    const double p = local_potential(s.features, w);
    s.label = uniform01(rng) < p ? 1 : 0;
    samples.push_back(s);
  }
  return samples;
}

}  // namespace testutil
