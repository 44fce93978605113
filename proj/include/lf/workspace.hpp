#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "lf/geom.hpp"

namespace lf {

// Clamped piecewise-linear interpolation of a (time, position) schedule with
// strictly increasing times: holds the first entry before it, the last entry
// after it. The schedule must be non-empty.
Vec3 sample_schedule(const std::vector<std::pair<double, Vec3>>& schedule, double t);

// Solid obstacle primitive. A non-empty schedule makes the obstacle dynamic:
// its reference point follows the piecewise-linear schedule (clamped at both
// ends) and the whole shape translates rigidly with it.
struct Obstacle {
  enum class Kind { Sphere, Box, Pole };

  Kind kind = Kind::Sphere;

  // Sphere
  Vec3 center{};
  double radius = 0.0;  // sphere and pole radius

  // Box (axis-aligned)
  Vec3 box_min{}, box_max{};

  // Pole: vertical cylinder at (xy.x, xy.y) spanning z in [z0, z1]
  double z0 = 0.0, z1 = 0.0;

  // (time_s, reference-point position), strictly increasing times.
  std::vector<std::pair<double, Vec3>> schedule;

  bool dynamic() const { return !schedule.empty(); }

  // Reference point the schedule drives.
  Vec3 base_point() const;
  // Scheduled position at time t (clamped linear interpolation); base if static.
  Vec3 position_at(double t) const;
  // Rigid translation applied to the shape at time t.
  Vec3 offset_at(double t) const { return position_at(t) - base_point(); }

  // Distance from point/segment to the solid (0 inside), shape frozen at t.
  double point_distance(const Vec3& p, double t) const;
  double segment_distance(const Vec3& a, const Vec3& b, double t) const;
  // Early-out boolean: is the swept sphere of radius `clear_r` along [a,b]
  // strictly clear of the solid at time t?  Equivalent to
  // segment_distance(a,b,t) > clear_r but cheaper in the common far case.
  bool segment_clear(const Vec3& a, const Vec3& b, double clear_r, double t) const;

  // Static-shape AABB inflated by `pad` (used by the occupancy grid builder).
  void aabb(double pad, Vec3& lo, Vec3& hi) const;
};

// Axis-aligned bounded workspace with solid obstacles. Queries are pure and
// safe to call concurrently after construction.
class Workspace {
 public:
  Vec3 bounds_min{}, bounds_max{};
  bool planar = false;
  double dynamic_margin = 0.05;  // planning-time inflation for scheduled obstacles
  std::vector<Obstacle> obstacles;

  // Sphere of radius r centered at p lies inside the (closed) workspace box.
  // In planar mode the z extent is not shrunk: z must lie in [z0, z1].
  bool inside_shrunk(const Vec3& p, double r) const {
    if (p.x < bounds_min.x + r || p.x > bounds_max.x - r) return false;
    if (p.y < bounds_min.y + r || p.y > bounds_max.y - r) return false;
    if (planar) return p.z >= bounds_min.z && p.z <= bounds_max.z;
    return p.z >= bounds_min.z + r && p.z <= bounds_max.z - r;
  }

  // Sphere(p, r) is collision-free at time t. Tangency counts as collision.
  // dyn_inflate adds margin to scheduled obstacles only.
  bool point_free(const Vec3& p, double r, double t = 0.0, double dyn_inflate = 0.0) const;

  // Swept sphere of radius r along [a,b] is collision-free at time t.
  bool segment_free(const Vec3& a, const Vec3& b, double r, double t = 0.0,
                    double dyn_inflate = 0.0) const;

  // Smallest distance from p (resp. segment) to any obstacle at time t;
  // +inf when there are no obstacles. Ignores the workspace boundary.
  double point_clearance(const Vec3& p, double t = 0.0) const;
  double segment_clearance(const Vec3& a, const Vec3& b, double t = 0.0) const;

  double diameter() const { return (bounds_max - bounds_min).norm(); }
};

// Minimum over alpha in [0,1] of |(a0 + alpha(a1-a0)) - (b0 + alpha(b1-b0))|:
// the closest approach of two agents moving synchronously along their step
// segments. Closed form (quadratic in alpha).
inline double pair_min_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                                const Vec3& b1) {
  Vec3 d0 = a0 - b0;
  Vec3 dd = (a1 - b1) - d0;
  double n2 = dd.norm2();
  double alpha = n2 > 0.0 ? std::clamp(-d0.dot(dd) / n2, 0.0, 1.0) : 0.0;
  return (d0 + dd * alpha).norm();
}

// Conservative voxel bitmap over the workspace, built from *static* obstacles
// only and inflated by a fixed query radius: a free voxel certifies that every
// point inside it is point-free at that radius. Occupied voxels prove nothing
// (the grid over-approximates, never under-approximates the blocked set).
class OccupancyGrid {
 public:
  OccupancyGrid(const Workspace& ws, double voxel, double radius);

  double voxel_size() const { return voxel_; }
  double radius() const { return radius_; }

  // True iff the voxel containing p is known collision-free for `radius()`.
  // Points outside the grid extent return false (fall back to exact tests).
  bool voxel_free(const Vec3& p) const;

  // True iff every voxel the segment passes through is free (then the whole
  // swept sphere is provably clear of static obstacles).
  bool segment_voxels_free(const Vec3& a, const Vec3& b) const;

  bool occupied_index(int ix, int iy, int iz) const {
    return bits_[static_cast<std::size_t>((iz * ny_ + iy) * nx_ + ix)];
  }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }

 private:
  std::size_t idx(int ix, int iy, int iz) const {
    return static_cast<std::size_t>((iz * ny_ + iy) * nx_ + ix);
  }
  bool cell_of(const Vec3& p, int& ix, int& iy, int& iz) const;

  Vec3 origin_{};
  double voxel_ = 0.1, radius_ = 0.0;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<bool> bits_;
};

// Frozen-time query bundle used by roadmap construction and search: a fixed
// snapshot time, an effective agent radius, the planning margin for dynamic
// obstacles, and an optional static-obstacle broad phase.
struct CollisionContext {
  const Workspace* ws = nullptr;
  double t = 0.0;
  double radius = 0.0;
  double dyn_inflate = 0.0;
  const OccupancyGrid* grid = nullptr;  // must be built for `radius` if set

  bool point_free(const Vec3& p) const;
  bool segment_free(const Vec3& a, const Vec3& b) const;
};

}  // namespace lf
