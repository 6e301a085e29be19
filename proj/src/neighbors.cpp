#include "parcelca/neighbors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "parcelca/errors.hpp"
#include "parcelca/parallel.hpp"

namespace pca {

namespace {

std::string double_to_string(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(ErrorKind::Format, std::string("bad ") + what + " field in neighbor cache");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(ErrorKind::Format, std::string("bad ") + what + " field in neighbor cache");
  }
  return v;
}

}  // namespace

NeighborDistance parse_neighbor_distance(const std::string& s) {
  if (s == "boundary") return NeighborDistance::Boundary;
  if (s == "centroid") return NeighborDistance::Centroid;
  fail(ErrorKind::Config, "unknown neighbor distance mode '" + s + "'");
}

void NeighborGraph::validate() const {
  if (adjacency.size() != parcel_count) {
    fail(ErrorKind::Data, "neighbor graph row count does not match parcel count");
  }
  for (std::uint32_t i = 0; i < parcel_count; ++i) {
    const auto& row = adjacency[i];
    for (std::size_t k = 0; k < row.size(); ++k) {
      const std::uint32_t j = row[k];
      if (j >= parcel_count) fail(ErrorKind::Data, "neighbor id out of range");
      if (j == i) fail(ErrorKind::Data, "self-loop in neighbor graph");
      if (k > 0 && row[k - 1] >= j) fail(ErrorKind::Data, "neighbor list not strictly ascending");
      const auto& back = adjacency[j];
      if (!std::binary_search(back.begin(), back.end(), i)) {
        fail(ErrorKind::Data, "asymmetric neighbor edge " + std::to_string(i) + "-" + std::to_string(j));
      }
    }
  }
}

std::size_t NeighborGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& row : adjacency) total += row.size();
  return total / 2;
}

std::size_t NeighborGraph::neighbor_count(std::uint32_t index) const {
  if (index >= parcel_count) fail(ErrorKind::Data, "parcel index out of range");
  return adjacency[index].size();
}

NeighborGraph compute_neighbors(const std::vector<ParcelRecord>& parcels,
                                const NeighborOptions& opts) {
  if (!(opts.radius_m > 0.0)) fail(ErrorKind::Config, "neighbor radius must be positive");

  const std::size_t n = parcels.size();
  std::vector<std::uint32_t> canonical(n);
  for (std::uint32_t i = 0; i < n; ++i) canonical[i] = i;
  std::sort(canonical.begin(), canonical.end(), [&](std::uint32_t a, std::uint32_t b) {
    return parcels[a].parcel_id < parcels[b].parcel_id;
  });
  for (std::size_t i = 1; i < n; ++i) {
    if (parcels[canonical[i]].parcel_id == parcels[canonical[i - 1]].parcel_id) {
      fail(ErrorKind::Data,
           "duplicate parcel_id " + std::to_string(parcels[canonical[i]].parcel_id));
    }
  }

  // Neighborhoods never cross city boundaries; each city is searched
  // independently against its own index.
  std::map<std::uint64_t, std::vector<std::uint32_t>> cities;  // city -> canonical indices
  for (std::uint32_t ci = 0; ci < n; ++ci) {
    cities[parcels[canonical[ci]].city_id].push_back(ci);
  }

  NeighborGraph graph;
  graph.parcel_count = static_cast<std::uint32_t>(n);
  graph.radius_m = opts.radius_m;
  graph.digest_hex = parcel_set_digest(parcels);
  graph.adjacency.assign(n, {});

  const bool centroid_mode = opts.distance == NeighborDistance::Centroid;

  for (const auto& [city_id, members] : cities) {
    const std::size_t m = members.size();
    std::vector<BBox> boxes(m);
    for (std::size_t i = 0; i < m; ++i) {
      boxes[i] = parcels[canonical[members[i]]].polygon.bbox();
    }
    const SpatialIndex index = SpatialIndex::build(boxes);

    std::vector<PointM> centers;
    if (centroid_mode) {
      centers.resize(m);
      for (std::size_t i = 0; i < m; ++i) centers[i] = centroid(parcels[canonical[members[i]]].polygon);
    }

    // partial[i] holds this member's neighbors with larger local index;
    // mirrored below, so the result is independent of worker count.
    std::vector<std::vector<std::uint32_t>> partial(m);
    parallel_for(m, opts.jobs, [&](std::size_t begin, std::size_t end) {
      std::vector<std::uint32_t> hits;
      for (std::size_t i = begin; i < end; ++i) {
        const Polygon& poly_i = parcels[canonical[members[i]]].polygon;
        index.query(boxes[i].expanded(opts.radius_m), hits);
        for (std::uint32_t j : hits) {
          if (j <= i) continue;
          bool close;
          if (centroid_mode) {
            close = distance_m(centers[i], centers[j]) <= opts.radius_m;
          } else {
            close = min_distance(poly_i, parcels[canonical[members[j]]].polygon) <= opts.radius_m;
          }
          if (close) partial[i].push_back(j);
        }
      }
    });

    for (std::size_t i = 0; i < m; ++i) {
      for (std::uint32_t j : partial[i]) {
        graph.adjacency[members[i]].push_back(members[j]);
        graph.adjacency[members[j]].push_back(members[i]);
      }
    }
  }

  for (auto& row : graph.adjacency) std::sort(row.begin(), row.end());
  graph.validate();
  return graph;
}

void save_graph(const NeighborGraph& g, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "PCA-NG v1 " << double_to_string(g.radius_m) << ' ' << g.parcel_count << ' '
      << g.digest_hex << '\n';
  for (std::uint32_t i = 0; i < g.parcel_count; ++i) {
    out << i << ':';
    const auto& row = g.adjacency[i];
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out << ',';
      out << row[k];
    }
    out << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  const std::string bytes = out.str();
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) fail(ErrorKind::Io, "failed writing " + path.string());
}

NeighborGraph load_graph(const std::filesystem::path& path,
                         const std::vector<ParcelRecord>& parcels) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::Io, "cannot open neighbor cache " + path.string());

  std::string header;
  if (!std::getline(file, header)) fail(ErrorKind::Format, "empty neighbor cache file");
  std::istringstream hs(header);
  std::string magic, version, radius_s, count_s, digest;
  if (!(hs >> magic >> version >> radius_s >> count_s >> digest) || magic != "PCA-NG" ||
      version != "v1") {
    fail(ErrorKind::Format, "bad neighbor cache header");
  }
  if (digest.size() != 64) fail(ErrorKind::Format, "bad digest length in neighbor cache header");

  NeighborGraph graph;
  graph.radius_m = parse_double(radius_s, "radius");
  const std::uint64_t count = parse_u64(count_s, "parcel count");
  graph.parcel_count = static_cast<std::uint32_t>(count);
  graph.digest_hex = digest;

  const std::string current = parcel_set_digest(parcels);
  if (current != graph.digest_hex) {
    fail(ErrorKind::StaleCache,
         "neighbor cache was built for a different parcel set (recompute required)");
  }
  if (count != parcels.size()) {
    fail(ErrorKind::Format, "neighbor cache parcel count mismatch");
  }

  graph.adjacency.assign(count, {});
  std::string line;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(file, line)) fail(ErrorKind::Format, "truncated neighbor cache file");
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) fail(ErrorKind::Format, "missing ':' in neighbor cache line");
    if (parse_u64(std::string_view(line).substr(0, colon), "row id") != i) {
      fail(ErrorKind::Format, "neighbor cache rows out of order");
    }
    std::string_view rest = std::string_view(line).substr(colon + 1);
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view tok = rest.substr(0, comma);
      const std::uint64_t j = parse_u64(tok, "neighbor id");
      if (j >= count) fail(ErrorKind::Format, "neighbor id out of range in cache");
      graph.adjacency[i].push_back(static_cast<std::uint32_t>(j));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  if (std::getline(file, line) && !line.empty()) {
    fail(ErrorKind::Format, "trailing content in neighbor cache file");
  }

  try {
    graph.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Format, std::string("invalid neighbor cache: ") + e.what());
  }
  return graph;
}

}  // namespace pca
