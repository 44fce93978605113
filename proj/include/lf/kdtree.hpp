#pragma once

#include <cstdint>
#include <vector>

#include "lf/geom.hpp"

namespace lf {

// Static 3-d tree over a point set; built once, queried many times.
// Median-split on the widest axis, leaves hold small buckets.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::vector<Vec3> points) { build(std::move(points)); }

  void build(std::vector<Vec3> points);

  std::size_t size() const { return pts_.size(); }
  const Vec3& point(std::uint32_t i) const { return pts_[i]; }

  // Append indices (original order) of all points with |p - q| <= r to `out`.
  // Output order is deterministic but unspecified; callers sort if they care.
  void radius_query(const Vec3& q, double r, std::vector<std::uint32_t>& out) const;

  // Index of the nearest point, or -1 when empty.
  std::int64_t nearest(const Vec3& q) const;

 private:
  struct Node {
    // Internal nodes: split axis/value and children. Leaves: [begin,end) into ids_.
    double split = 0;
    std::int32_t left = -1, right = -1;
    std::uint32_t begin = 0, end = 0;
    std::uint8_t axis = 3;  // 3 marks a leaf
  };

  std::int32_t build_rec(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> pts_;
  std::vector<std::uint32_t> ids_;  // permutation of [0,n)
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace lf
