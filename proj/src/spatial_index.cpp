#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "parcelca/geometry.hpp"

namespace pca {

namespace {

constexpr std::size_t kFanout = 16;

double center_x(const BBox& b) { return 0.5 * (b.min_x + b.max_x); }
double center_y(const BBox& b) { return 0.5 * (b.min_y + b.max_y); }

BBox box_union(const BBox& a, const BBox& b) {
  return {std::min(a.min_x, b.min_x), std::min(a.min_y, b.min_y),
          std::max(a.max_x, b.max_x), std::max(a.max_y, b.max_y)};
}

// Sort-tile-recursive ordering: slices by x, each slice sorted by y.
// Returns the permutation that packs items into consecutive groups of kFanout.
std::vector<std::size_t> str_order(const std::vector<BBox>& boxes) {
  const std::size_t n = boxes.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  const std::size_t pages = (n + kFanout - 1) / kFanout;
  const std::size_t slices =
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pages))));
  const std::size_t per_slice = (n + slices - 1) / slices;

  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ca = center_x(boxes[a]), cb = center_x(boxes[b]);
    return ca < cb || (ca == cb && a < b);
  });
  for (std::size_t s = 0; s * per_slice < n; ++s) {
    const auto begin = order.begin() + static_cast<std::ptrdiff_t>(s * per_slice);
    const auto end = order.begin() + static_cast<std::ptrdiff_t>(std::min(n, (s + 1) * per_slice));
    std::sort(begin, end, [&](std::size_t a, std::size_t b) {
      const double ca = center_y(boxes[a]), cb = center_y(boxes[b]);
      return ca < cb || (ca == cb && a < b);
    });
  }
  return order;
}

}  // namespace

SpatialIndex SpatialIndex::build(const std::vector<BBox>& boxes) {
  SpatialIndex index;
  index.count_ = boxes.size();
  if (boxes.empty()) return index;

  // Reorder entries so each leaf owns a contiguous range.
  const std::vector<std::size_t> order = str_order(boxes);
  index.entries_.reserve(boxes.size());
  for (std::size_t src : order) {
    index.entries_.emplace_back(boxes[src], static_cast<std::uint32_t>(src));
  }

  std::vector<std::int32_t> level;
  for (std::size_t off = 0; off < index.entries_.size(); off += kFanout) {
    const std::size_t cnt = std::min(kFanout, index.entries_.size() - off);
    Node leaf;
    leaf.box = index.entries_[off].first;
    for (std::size_t i = 1; i < cnt; ++i) leaf.box = box_union(leaf.box, index.entries_[off + i].first);
    leaf.first = static_cast<std::int32_t>(off);
    leaf.count = -static_cast<std::int32_t>(cnt);
    level.push_back(static_cast<std::int32_t>(index.nodes_.size()));
    index.nodes_.push_back(leaf);
  }

  while (level.size() > 1) {
    std::vector<BBox> level_boxes;
    level_boxes.reserve(level.size());
    for (std::int32_t id : level) level_boxes.push_back(index.nodes_[static_cast<std::size_t>(id)].box);
    const std::vector<std::size_t> node_order = str_order(level_boxes);

    std::vector<std::int32_t> parents;
    for (std::size_t off = 0; off < node_order.size(); off += kFanout) {
      const std::size_t cnt = std::min(kFanout, node_order.size() - off);
      Node parent;
      parent.first = static_cast<std::int32_t>(index.children_.size());
      parent.count = static_cast<std::int32_t>(cnt);
      parent.box = level_boxes[node_order[off]];
      for (std::size_t i = 0; i < cnt; ++i) {
        const std::int32_t child = level[node_order[off + i]];
        index.children_.push_back(child);
        parent.box = box_union(parent.box, index.nodes_[static_cast<std::size_t>(child)].box);
      }
      parents.push_back(static_cast<std::int32_t>(index.nodes_.size()));
      index.nodes_.push_back(parent);
    }
    level.swap(parents);
  }
  index.root_ = level.front();
  return index;
}

void SpatialIndex::query(const BBox& window, std::vector<std::uint32_t>& out) const {
  out.clear();
  if (root_ < 0) return;
  std::vector<std::int32_t> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (!node.box.intersects(window)) continue;
    if (node.count < 0) {
      const std::size_t first = static_cast<std::size_t>(node.first);
      const std::size_t cnt = static_cast<std::size_t>(-node.count);
      for (std::size_t i = 0; i < cnt; ++i) {
        if (entries_[first + i].first.intersects(window)) {
          out.push_back(entries_[first + i].second);
        }
      }
    } else {
      for (std::int32_t i = 0; i < node.count; ++i) {
        stack.push_back(children_[static_cast<std::size_t>(node.first + i)]);
      }
    }
  }
  std::sort(out.begin(), out.end());
}

std::vector<std::uint32_t> SpatialIndex::query(const BBox& window) const {
  std::vector<std::uint32_t> out;
  query(window, out);
  return out;
}

SpatialIndex build_index(const std::vector<Polygon>& polygons) {
  std::vector<BBox> boxes;
  boxes.reserve(polygons.size());
  for (const Polygon& p : polygons) boxes.push_back(p.bbox());
  return SpatialIndex::build(boxes);
}

}  // namespace pca
