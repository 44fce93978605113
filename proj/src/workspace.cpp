#include "lf/workspace.hpp"

#include <cassert>
#include <cmath>

namespace lf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Golden-section minimization over [0,1]. Every per-obstacle distance along a
// segment is convex in the interpolation parameter (distance to a convex solid
// composed with an affine map), so this converges to the global minimum.
template <typename F>
double golden_min01(F&& f) {
  constexpr double kPhi = 0.6180339887498949;
  double a = 0.0, b = 1.0;
  double x1 = b - kPhi * (b - a), x2 = a + kPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 90; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kPhi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min(f1, f2);
}

double point_box_distance(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  double dx = std::max({lo.x - p.x, p.x - hi.x, 0.0});
  double dy = std::max({lo.y - p.y, p.y - hi.y, 0.0});
  double dz = std::max({lo.z - p.z, p.z - hi.z, 0.0});
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Slab test: does segment [a,b] intersect the box?
bool segment_hits_box(const Vec3& a, const Vec3& b, const Vec3& lo, const Vec3& hi) {
  double t0 = 0.0, t1 = 1.0;
  Vec3 d = b - a;
  for (int ax = 0; ax < 3; ++ax) {
    if (std::abs(d[ax]) < 1e-300) {
      if (a[ax] < lo[ax] || a[ax] > hi[ax]) return false;
    } else {
      double inv = 1.0 / d[ax];
      double u = (lo[ax] - a[ax]) * inv, v = (hi[ax] - a[ax]) * inv;
      if (u > v) std::swap(u, v);
      t0 = std::max(t0, u);
      t1 = std::min(t1, v);
      if (t0 > t1) return false;
    }
  }
  return true;
}

double point_pole_distance(const Vec3& p, double cx, double cy, double r, double z0,
                           double z1) {
  double dxy = std::hypot(p.x - cx, p.y - cy);
  double dz = std::max({z0 - p.z, p.z - z1, 0.0});
  if (dxy <= r) return dz;
  double dr = dxy - r;
  return dz > 0.0 ? std::hypot(dr, dz) : dr;
}

}  // namespace

Vec3 Obstacle::base_point() const {
  switch (kind) {
    case Kind::Sphere:
      return center;
    case Kind::Box:
      return (box_min + box_max) * 0.5;
    case Kind::Pole:
      return {center.x, center.y, 0.5 * (z0 + z1)};
  }
  return {};
}

Vec3 sample_schedule(const std::vector<std::pair<double, Vec3>>& schedule, double t) {
  if (t <= schedule.front().first) return schedule.front().second;
  if (t >= schedule.back().first) return schedule.back().second;
  // Schedules are short; linear scan is fine and branch-predictable.
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (t <= schedule[i].first) {
      const auto& [ta, pa] = schedule[i - 1];
      const auto& [tb, pb] = schedule[i];
      double u = (t - ta) / (tb - ta);
      return pa + (pb - pa) * u;
    }
  }
  return schedule.back().second;
}

Vec3 Obstacle::position_at(double t) const {
  if (schedule.empty()) return base_point();
  return sample_schedule(schedule, t);
}

double Obstacle::point_distance(const Vec3& p_world, double t) const {
  Vec3 p = dynamic() ? p_world - offset_at(t) : p_world;
  switch (kind) {
    case Kind::Sphere:
      return std::max(0.0, p.dist(center) - radius);
    case Kind::Box:
      return point_box_distance(p, box_min, box_max);
    case Kind::Pole:
      return point_pole_distance(p, center.x, center.y, radius, z0, z1);
  }
  return kInf;
}

double Obstacle::segment_distance(const Vec3& a_world, const Vec3& b_world,
                                  double t) const {
  Vec3 off = dynamic() ? offset_at(t) : Vec3{};
  Vec3 a = a_world - off, b = b_world - off;
  switch (kind) {
    case Kind::Sphere:
      return std::max(0.0, point_segment_distance(center, a, b) - radius);
    case Kind::Box: {
      if (segment_hits_box(a, b, box_min, box_max)) return 0.0;
      return golden_min01(
          [&](double u) { return point_box_distance(a + (b - a) * u, box_min, box_max); });
    }
    case Kind::Pole: {
      bool a_in = a.z >= z0 && a.z <= z1;
      bool b_in = b.z >= z0 && b.z <= z1;
      if (a_in && b_in) {
        // Entirely within the z-span: the exact distance is the 2D
        // segment-to-axis distance minus the radius.
        Vec3 a2{a.x, a.y, 0}, b2{b.x, b.y, 0}, c2{center.x, center.y, 0};
        return std::max(0.0, point_segment_distance(c2, a2, b2) - radius);
      }
      return golden_min01([&](double u) {
        return point_pole_distance(a + (b - a) * u, center.x, center.y, radius, z0, z1);
      });
    }
  }
  return kInf;
}

bool Obstacle::segment_clear(const Vec3& a_world, const Vec3& b_world, double clear_r,
                             double t) const {
  Vec3 off = dynamic() ? offset_at(t) : Vec3{};
  Vec3 a = a_world - off, b = b_world - off;
  switch (kind) {
    case Kind::Sphere:
      return point_segment_distance(center, a, b) - radius > clear_r;
    case Kind::Box: {
      // Cheap accept via the box's bounding sphere.
      Vec3 c = (box_min + box_max) * 0.5;
      double half_diag = (box_max - box_min).norm() * 0.5;
      if (point_segment_distance(c, a, b) - half_diag > clear_r) return true;
      if (segment_hits_box(a, b, box_min, box_max)) return false;
      if (point_box_distance(a, box_min, box_max) <= clear_r) return false;
      if (point_box_distance(b, box_min, box_max) <= clear_r) return false;
      return golden_min01([&](double u) {
               return point_box_distance(a + (b - a) * u, box_min, box_max);
             }) > clear_r;
    }
    case Kind::Pole: {
      // Capsule (axis segment + radius) under-estimates the distance to the
      // flat-capped cylinder, so clearing it clears the pole.
      Vec3 p0{center.x, center.y, z0}, p1{center.x, center.y, z1};
      if (segment_segment_distance(a, b, p0, p1) - radius > clear_r) return true;
      bool a_in = a.z >= z0 && a.z <= z1;
      bool b_in = b.z >= z0 && b.z <= z1;
      if (a_in && b_in) {
        Vec3 a2{a.x, a.y, 0}, b2{b.x, b.y, 0}, c2{center.x, center.y, 0};
        return point_segment_distance(c2, a2, b2) - radius > clear_r;
      }
      if (point_pole_distance(a, center.x, center.y, radius, z0, z1) <= clear_r)
        return false;
      if (point_pole_distance(b, center.x, center.y, radius, z0, z1) <= clear_r)
        return false;
      return golden_min01([&](double u) {
               return point_pole_distance(a + (b - a) * u, center.x, center.y, radius,
                                          z0, z1);
             }) > clear_r;
    }
  }
  return true;
}

void Obstacle::aabb(double pad, Vec3& lo, Vec3& hi) const {
  switch (kind) {
    case Kind::Sphere:
      lo = center - Vec3{radius, radius, radius};
      hi = center + Vec3{radius, radius, radius};
      break;
    case Kind::Box:
      lo = box_min;
      hi = box_max;
      break;
    case Kind::Pole:
      lo = {center.x - radius, center.y - radius, z0};
      hi = {center.x + radius, center.y + radius, z1};
      break;
  }
  lo -= Vec3{pad, pad, pad};
  hi += Vec3{pad, pad, pad};
}

bool Workspace::point_free(const Vec3& p, double r, double t, double dyn_inflate) const {
  if (!inside_shrunk(p, r)) return false;
  for (const auto& ob : obstacles) {
    double need = r + (ob.dynamic() ? dyn_inflate : 0.0);
    if (ob.point_distance(p, t) <= need) return false;
  }
  return true;
}

bool Workspace::segment_free(const Vec3& a, const Vec3& b, double r, double t,
                             double dyn_inflate) const {
  if (!inside_shrunk(a, r) || !inside_shrunk(b, r)) return false;
  for (const auto& ob : obstacles) {
    double need = r + (ob.dynamic() ? dyn_inflate : 0.0);
    if (!ob.segment_clear(a, b, need, t)) return false;
  }
  return true;
}

double Workspace::point_clearance(const Vec3& p, double t) const {
  double d = kInf;
  for (const auto& ob : obstacles) d = std::min(d, ob.point_distance(p, t));
  return d;
}

double Workspace::segment_clearance(const Vec3& a, const Vec3& b, double t) const {
  double d = kInf;
  for (const auto& ob : obstacles) d = std::min(d, ob.segment_distance(a, b, t));
  return d;
}

OccupancyGrid::OccupancyGrid(const Workspace& ws, double voxel, double radius)
    : origin_(ws.bounds_min), voxel_(voxel), radius_(radius) {
  Vec3 span = ws.bounds_max - ws.bounds_min;
  nx_ = std::max(1, static_cast<int>(std::ceil(span.x / voxel_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(span.y / voxel_)));
  nz_ = std::max(1, static_cast<int>(std::ceil(span.z / voxel_)));
  bits_.assign(static_cast<std::size_t>(nx_) * ny_ * nz_, false);

  double half_diag = 0.5 * voxel_ * std::sqrt(3.0);
  double inflate = radius_ + half_diag;
  for (const auto& ob : ws.obstacles) {
    if (ob.dynamic()) continue;  // dynamic obstacles always get exact tests
    Vec3 lo, hi;
    ob.aabb(inflate + half_diag, lo, hi);
    int x0 = std::max(0, static_cast<int>(std::floor((lo.x - origin_.x) / voxel_)));
    int y0 = std::max(0, static_cast<int>(std::floor((lo.y - origin_.y) / voxel_)));
    int z0 = std::max(0, static_cast<int>(std::floor((lo.z - origin_.z) / voxel_)));
    int x1 = std::min(nx_ - 1, static_cast<int>(std::floor((hi.x - origin_.x) / voxel_)));
    int y1 = std::min(ny_ - 1, static_cast<int>(std::floor((hi.y - origin_.y) / voxel_)));
    int z1 = std::min(nz_ - 1, static_cast<int>(std::floor((hi.z - origin_.z) / voxel_)));
    for (int iz = z0; iz <= z1; ++iz)
      for (int iy = y0; iy <= y1; ++iy)
        for (int ix = x0; ix <= x1; ++ix) {
          Vec3 c = origin_ + Vec3{(ix + 0.5) * voxel_, (iy + 0.5) * voxel_,
                                  (iz + 0.5) * voxel_};
          if (ob.point_distance(c, 0.0) <= inflate) bits_[idx(ix, iy, iz)] = true;
        }
  }
}

bool OccupancyGrid::cell_of(const Vec3& p, int& ix, int& iy, int& iz) const {
  ix = static_cast<int>(std::floor((p.x - origin_.x) / voxel_));
  iy = static_cast<int>(std::floor((p.y - origin_.y) / voxel_));
  iz = static_cast<int>(std::floor((p.z - origin_.z) / voxel_));
  return ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_ && iz >= 0 && iz < nz_;
}

bool OccupancyGrid::voxel_free(const Vec3& p) const {
  int ix, iy, iz;
  if (!cell_of(p, ix, iy, iz)) return false;
  return !bits_[idx(ix, iy, iz)];
}

bool OccupancyGrid::segment_voxels_free(const Vec3& a, const Vec3& b) const {
  int ix, iy, iz, jx, jy, jz;
  if (!cell_of(a, ix, iy, iz) || !cell_of(b, jx, jy, jz)) return false;
  if (bits_[idx(ix, iy, iz)]) return false;

  // Amanatides-Woo voxel traversal from a to b.
  Vec3 d = b - a;
  int step[3], cur[3] = {ix, iy, iz}, end[3] = {jx, jy, jz};
  double t_max[3], t_delta[3];
  for (int ax = 0; ax < 3; ++ax) {
    if (d[ax] > 0) {
      step[ax] = 1;
      double edge = origin_[ax] + (cur[ax] + 1) * voxel_;
      t_max[ax] = (edge - a[ax]) / d[ax];
      t_delta[ax] = voxel_ / d[ax];
    } else if (d[ax] < 0) {
      step[ax] = -1;
      double edge = origin_[ax] + cur[ax] * voxel_;
      t_max[ax] = (edge - a[ax]) / d[ax];
      t_delta[ax] = -voxel_ / d[ax];
    } else {
      step[ax] = 0;
      t_max[ax] = kInf;
      t_delta[ax] = kInf;
    }
  }
  int guard = 3 * (nx_ + ny_ + nz_) + 3;
  while (cur[0] != end[0] || cur[1] != end[1] || cur[2] != end[2]) {
    if (--guard < 0) return false;  // numeric corner case: punt to exact tests
    int ax = 0;
    if (t_max[1] < t_max[ax]) ax = 1;
    if (t_max[2] < t_max[ax]) ax = 2;
    cur[ax] += step[ax];
    t_max[ax] += t_delta[ax];
    if (cur[ax] < 0 || cur[ax] >= (ax == 0 ? nx_ : ax == 1 ? ny_ : nz_)) return false;
    if (bits_[idx(cur[0], cur[1], cur[2])]) return false;
  }
  return true;
}

bool CollisionContext::point_free(const Vec3& p) const {
  if (!ws->inside_shrunk(p, radius)) return false;
  bool statics_ok = grid && grid->voxel_free(p);
  for (const auto& ob : ws->obstacles) {
    if (ob.dynamic()) {
      if (ob.point_distance(p, t) <= radius + dyn_inflate) return false;
    } else if (!statics_ok) {
      if (ob.point_distance(p, t) <= radius) return false;
    }
  }
  return true;
}

bool CollisionContext::segment_free(const Vec3& a, const Vec3& b) const {
  if (!ws->inside_shrunk(a, radius) || !ws->inside_shrunk(b, radius)) return false;
  bool statics_ok = grid && grid->segment_voxels_free(a, b);
  for (const auto& ob : ws->obstacles) {
    if (ob.dynamic()) {
      if (!ob.segment_clear(a, b, radius + dyn_inflate, t)) return false;
    } else if (!statics_ok) {
      if (!ob.segment_clear(a, b, radius, t)) return false;
    }
  }
  return true;
}

}  // namespace lf
