#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "lf/errors.hpp"
#include "lf/geom.hpp"
#include "lf/kdtree.hpp"
#include "lf/workspace.hpp"

namespace lf {

struct RoadmapParams {
  double lattice_h = 0.5;        // lattice spacing (m)
  double connect_radius = 0.95;  // target-to-lattice connection radius (m)
  double neighbor_radius = 1.0;  // gradient / scoring query radius (m)
};

// Minimal rotation taking the +x axis onto `dir` (Rodrigues). `dir` must be
// unit length within 1e-6 (NotUnitError otherwise). dir == -x maps to a pi
// rotation about +z.
Mat3 rotation_to(const Vec3& dir);

// Shared lattice geometry for one (workspace, radius, params) triple: vertex
// positions, static-obstacle-filtered vertices and edges, and a spatial index.
// Built once; time-varying obstacles are filtered per snapshot on top.
class LatticeBase {
 public:
  struct Edge {
    std::uint32_t to;
    double w;
  };

  LatticeBase(const Workspace& ws, const RoadmapParams& prm, double radius,
              const OccupancyGrid* grid);

  const std::vector<Vec3>& verts() const { return verts_; }
  const KdTree3& tree() const { return tree_; }
  const std::vector<std::uint32_t>& row() const { return row_; }
  const std::vector<Edge>& adj() const { return adj_; }
  bool planar() const { return planar_; }

 private:
  std::vector<Vec3> verts_;
  std::vector<std::uint32_t> row_;  // CSR offsets, size verts+1
  std::vector<Edge> adj_;
  KdTree3 tree_;
  bool planar_ = false;
};

// Per-agent potential field over the shared lattice plus the agent's target
// vertex. phi holds the Dijkstra cost-to-go (edge weights are Euclidean);
// vertices unusable in the current snapshot keep phi = +inf.
class Roadmap {
 public:
  std::shared_ptr<const LatticeBase> base;
  Vec3 target{};
  std::vector<double> phi;  // size base->verts().size() + 1; back() == 0 (target)
  RoadmapParams params;

  std::uint32_t target_index() const {
    return static_cast<std::uint32_t>(base->verts().size());
  }
  std::size_t num_vertices() const { return base->verts().size() + 1; }
  Vec3 vertex(std::uint32_t i) const {
    return i < base->verts().size() ? base->verts()[i] : target;
  }

  // Indices of vertices with |v - p| <= r and finite phi, ascending.
  std::vector<std::uint32_t> radius_neighbors(const Vec3& p, double r) const;
  // Same set, traversal order, no sort (hot path).
  void radius_neighbors_unsorted(const Vec3& p, double r,
                                 std::vector<std::uint32_t>& out) const;

  // Local steepest-descent direction of the interpolated potential field:
  // with N = neighbors within params.neighbor_radius and mean potential m,
  //   g = sum_{v in N} (phi(v) - m) * (v - p)
  // returns normalize(-g); nullopt when |N| <= 1 or |g| < 1e-9.
  std::optional<Vec3> descent_direction(const Vec3& p) const;

  // min over neighbors of phi(v) + |v - p|  (+inf when no neighbor is in range).
  double cost_to_go(const Vec3& p) const;

  // descent_direction, falling back to steering toward the neighbor with the
  // smallest phi(v) + |v - p|; nullopt only when no usable neighbor exists.
  std::optional<Vec3> preferred_direction(const Vec3& p) const;
};

// Single-agent construction: lattice over the workspace at spacing h, vertices
// and 26-connected edges (8-connected in planar mode) kept when collision-free
// for a sphere of radius r_agent, the target linked to free vertices within
// the connection radius, and phi filled by Dijkstra from the target.
// Dynamic obstacles are frozen at time t and inflated by dyn_inflate.
// Throws TargetBlockedError / EmptyRoadmapError.
Roadmap build_roadmap(const Workspace& ws, const Vec3& target, double r_agent,
                      const RoadmapParams& prm = {}, double t = 0.0,
                      double dyn_inflate = 0.0);

// Team-sized reuse of the shared lattice: the static part (grid, vertex and
// edge filtering against unscheduled obstacles) is built once, then each
// planning snapshot re-filters only against frozen dynamic obstacles and runs
// one Dijkstra per agent target.
class TeamRoadmaps {
 public:
  TeamRoadmaps(const Workspace& ws, RoadmapParams prm, double radius);

  const OccupancyGrid& grid() const { return grid_; }
  const LatticeBase& lattice() const { return *base_; }
  CollisionContext context(double t) const {
    return CollisionContext{ws_, t, radius_, ws_->dynamic_margin, &grid_};
  }

  // Throws TargetBlockedError naming the offending agent.
  std::vector<Roadmap> build(double t, const std::vector<Vec3>& targets) const;

 private:
  const Workspace* ws_;
  RoadmapParams prm_;
  double radius_;
  OccupancyGrid grid_;
  std::shared_ptr<const LatticeBase> base_;
};

}  // namespace lf
