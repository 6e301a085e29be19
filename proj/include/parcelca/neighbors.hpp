#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "parcelca/parcel.hpp"

namespace pca {

enum class NeighborDistance { Boundary, Centroid };

NeighborDistance parse_neighbor_distance(const std::string& s);

struct NeighborOptions {
  double radius_m = 500.0;
  NeighborDistance distance = NeighborDistance::Boundary;
  unsigned jobs = 0;  // 0 = hardware concurrency
};

/// Symmetric, irreflexive adjacency over canonical parcel indices. Built once
/// per parcel set; the content digest pins the graph to the exact geometry it
/// was computed from.
struct NeighborGraph {
  std::uint32_t parcel_count = 0;
  double radius_m = 0.0;
  std::string digest_hex;
  std::vector<std::vector<std::uint32_t>> adjacency;  // sorted ascending per parcel

  /// Symmetry, irreflexivity, range and ordering; throws a data error on
  /// violation.
  void validate() const;

  std::size_t edge_count() const;
  std::size_t neighbor_count(std::uint32_t index) const;
};

/// Two parcels are neighbors iff they belong to the same city and their
/// distance (boundary by default) is within the radius. Input order does not
/// matter; the result is indexed by canonical (ascending parcel_id) order.
NeighborGraph compute_neighbors(const std::vector<ParcelRecord>& parcels,
                                const NeighborOptions& opts = {});

/// Plain-text cache: `PCA-NG v1 <radius_m> <parcel_count> <digest-hex>`
/// then one `<id>:<comma-separated neighbor ids>` line per parcel.
void save_graph(const NeighborGraph& g, const std::filesystem::path& path);

/// Reload a cached graph; raises a stale-cache error when the stored digest
/// no longer matches the parcel set, and a format error on malformed files.
NeighborGraph load_graph(const std::filesystem::path& path,
                         const std::vector<ParcelRecord>& parcels);

}  // namespace pca
