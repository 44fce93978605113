#include "lf/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lf {

namespace {
constexpr std::uint32_t kLeafSize = 12;
}

void KdTree3::build(std::vector<Vec3> points) {
  pts_ = std::move(points);
  ids_.resize(pts_.size());
  for (std::uint32_t i = 0; i < ids_.size(); ++i) ids_[i] = i;
  nodes_.clear();
  nodes_.reserve(pts_.empty() ? 1 : 2 * pts_.size() / kLeafSize + 2);
  root_ = pts_.empty() ? -1 : build_rec(0, static_cast<std::uint32_t>(pts_.size()));
}

std::int32_t KdTree3::build_rec(std::uint32_t begin, std::uint32_t end) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Vec3& p = pts_[ids_[i]];
    for (int ax = 0; ax < 3; ++ax) {
      lo[ax] = std::min(lo[ax], p[ax]);
      hi[ax] = std::max(hi[ax], p[ax]);
    }
  }
  int axis = 0;
  Vec3 span = hi - lo;
  if (span.y > span[axis]) axis = 1;
  if (span.z > span[axis]) axis = 2;

  std::uint32_t mid = (begin + end) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return pts_[a][axis] < pts_[b][axis];
                   });
  node.axis = static_cast<std::uint8_t>(axis);
  node.split = pts_[ids_[mid]][axis];

  std::int32_t self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  std::int32_t l = build_rec(begin, mid);
  std::int32_t r = build_rec(mid, end);
  nodes_[self].left = l;
  nodes_[self].right = r;
  return self;
}

void KdTree3::radius_query(const Vec3& q, double r,
                           std::vector<std::uint32_t>& out) const {
  if (root_ < 0) return;
  double r2 = r * r;
  // Explicit stack; depth is O(log n) but be generous.
  std::int32_t stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.axis == 3) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        std::uint32_t id = ids_[i];
        if ((pts_[id] - q).norm2() <= r2) out.push_back(id);
      }
      continue;
    }
    double d = q[node.axis] - node.split;
    // The split value partitions points: left has coord <= split at the median
    // position only approximately (nth_element semantics), so recurse by bound.
    if (d <= r) stack[top++] = node.left;
    if (d >= -r) stack[top++] = node.right;
  }
}

std::int64_t KdTree3::nearest(const Vec3& q) const {
  if (root_ < 0) return -1;
  double best2 = std::numeric_limits<double>::infinity();
  std::int64_t best = -1;
  struct Item {
    std::int32_t node;
    double dist;
  };
  Item stack[64];
  int top = 0;
  stack[top++] = {root_, 0.0};
  while (top > 0) {
    Item it = stack[--top];
    if (it.dist * it.dist > best2) continue;
    const Node& node = nodes_[it.node];
    if (node.axis == 3) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        std::uint32_t id = ids_[i];
        double d2 = (pts_[id] - q).norm2();
        if (d2 < best2 || (d2 == best2 && static_cast<std::int64_t>(id) < best)) {
          best2 = d2;
          best = id;
        }
      }
      continue;
    }
    double d = q[node.axis] - node.split;
    std::int32_t near = d <= 0 ? node.left : node.right;
    std::int32_t far = d <= 0 ? node.right : node.left;
    stack[top++] = {far, std::abs(d)};
    stack[top++] = {near, 0.0};
  }
  return best;
}

}  // namespace lf
