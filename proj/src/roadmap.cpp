#include "lf/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

namespace lf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Mat3 rotation_to(const Vec3& dir) {
  double n = dir.norm();
  if (std::abs(n - 1.0) > 1e-6)
    throw NotUnitError("rotation_to: direction must be unit length");
  const Vec3 e1{1, 0, 0};
  Vec3 a = e1.cross(dir);
  double s2 = a.norm2();
  double c = e1.dot(dir);
  if (s2 < 1e-24) {
    if (c > 0.0) return Mat3::identity();
    // Antiparallel: pi about +z.
    Mat3 r;
    r.m[0][0] = -1;
    r.m[1][1] = -1;
    r.m[2][2] = 1;
    return r;
  }
  // Rodrigues with unnormalized axis a (|a| = sin theta, c = cos theta):
  // R = I + [a]_x + [a]_x^2 (1-c)/s^2
  Mat3 K;
  K.m[0][0] = K.m[1][1] = K.m[2][2] = 0;
  K.m[0][1] = -a.z;
  K.m[0][2] = a.y;
  K.m[1][0] = a.z;
  K.m[1][2] = -a.x;
  K.m[2][0] = -a.y;
  K.m[2][1] = a.x;
  Mat3 K2 = K * K;
  double f = (1.0 - c) / s2;
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.m[i][j] = (i == j ? 1.0 : 0.0) + K.m[i][j] + f * K2.m[i][j];
  return r;
}

LatticeBase::LatticeBase(const Workspace& ws, const RoadmapParams& prm, double radius,
                         const OccupancyGrid* grid) {
  planar_ = ws.planar;
  const double h = prm.lattice_h;
  Vec3 span = ws.bounds_max - ws.bounds_min;
  int nx = static_cast<int>(std::floor(span.x / h + 1e-9)) + 1;
  int ny = static_cast<int>(std::floor(span.y / h + 1e-9)) + 1;
  int nz = planar_ ? 1 : static_cast<int>(std::floor(span.z / h + 1e-9)) + 1;

  auto statics_free_point = [&](const Vec3& p) {
    if (!ws.inside_shrunk(p, radius)) return false;
    if (grid && grid->voxel_free(p)) return true;
    for (const auto& ob : ws.obstacles)
      if (!ob.dynamic() && ob.point_distance(p, 0.0) <= radius) return false;
    return true;
  };
  auto statics_free_segment = [&](const Vec3& a, const Vec3& b) {
    if (grid && grid->segment_voxels_free(a, b)) return true;
    for (const auto& ob : ws.obstacles)
      if (!ob.dynamic() && !ob.segment_clear(a, b, radius, 0.0)) return false;
    return true;
  };

  std::vector<std::int32_t> id_of(static_cast<std::size_t>(nx) * ny * nz, -1);
  auto cell = [&](int ix, int iy, int iz) {
    return static_cast<std::size_t>((iz * ny + iy) * nx + ix);
  };
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        Vec3 p = ws.bounds_min + Vec3{ix * h, iy * h, iz * h};
        if (statics_free_point(p)) {
          id_of[cell(ix, iy, iz)] = static_cast<std::int32_t>(verts_.size());
          verts_.push_back(p);
        }
      }

  // Half-space of neighbor offsets; each undirected edge is collision-checked
  // once and inserted in both adjacency rows.
  std::vector<std::array<int, 3>> offs;
  for (int dz = planar_ ? 0 : -1; dz <= (planar_ ? 0 : 1); ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        if (dz < 0 || (dz == 0 && (dy < 0 || (dy == 0 && dx < 0)))) continue;
        offs.push_back({dx, dy, dz});
      }

  std::vector<std::vector<Edge>> rows(verts_.size());
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        std::int32_t u = id_of[cell(ix, iy, iz)];
        if (u < 0) continue;
        for (const auto& o : offs) {
          int jx = ix + o[0], jy = iy + o[1], jz = iz + o[2];
          if (jx < 0 || jx >= nx || jy < 0 || jy >= ny || jz < 0 || jz >= nz) continue;
          std::int32_t v = id_of[cell(jx, jy, jz)];
          if (v < 0) continue;
          if (!statics_free_segment(verts_[u], verts_[v])) continue;
          double w = verts_[u].dist(verts_[v]);
          rows[u].push_back({static_cast<std::uint32_t>(v), w});
          rows[v].push_back({static_cast<std::uint32_t>(u), w});
        }
      }

  row_.resize(verts_.size() + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    row_[i + 1] = row_[i] + static_cast<std::uint32_t>(rows[i].size());
  adj_.reserve(row_.back());
  for (auto& r : rows) adj_.insert(adj_.end(), r.begin(), r.end());

  tree_.build(verts_);
}

namespace {

// Dynamic-obstacle filtering for one snapshot: vertex and edge usability
// masks against obstacles frozen at time t and inflated by dyn_inflate.
struct SnapshotMasks {
  std::vector<std::uint8_t> vert_ok;
  std::vector<std::uint8_t> edge_ok;
  bool trivial = true;  // no dynamic obstacles: everything usable
};

SnapshotMasks make_masks(const Workspace& ws, const LatticeBase& base, double radius,
                         double t, double dyn_inflate) {
  SnapshotMasks m;
  std::vector<const Obstacle*> dyn;
  for (const auto& ob : ws.obstacles)
    if (ob.dynamic()) dyn.push_back(&ob);
  if (dyn.empty()) return m;

  m.trivial = false;
  const auto& verts = base.verts();
  m.vert_ok.assign(verts.size(), 1);
  double need = radius + dyn_inflate;

  // Inflated bounding boxes so that only geometry near an obstacle pays for
  // exact tests.
  std::vector<std::pair<Vec3, Vec3>> boxes;
  for (const auto* ob : dyn) {
    Vec3 lo, hi;
    ob->aabb(need + 1e-9, lo, hi);
    Vec3 off = ob->offset_at(t);
    boxes.emplace_back(lo + off, hi + off);
  }
  auto near_box = [](const Vec3& p, const std::pair<Vec3, Vec3>& b) {
    return p.x >= b.first.x && p.x <= b.second.x && p.y >= b.first.y &&
           p.y <= b.second.y && p.z >= b.first.z && p.z <= b.second.z;
  };

  for (std::size_t i = 0; i < verts.size(); ++i)
    for (std::size_t k = 0; k < dyn.size(); ++k)
      if (near_box(verts[i], boxes[k]) && dyn[k]->point_distance(verts[i], t) <= need) {
        m.vert_ok[i] = 0;
        break;
      }

  m.edge_ok.assign(base.adj().size(), 1);
  for (std::size_t u = 0; u < verts.size(); ++u) {
    for (std::uint32_t e = base.row()[u]; e < base.row()[u + 1]; ++e) {
      const auto& edge = base.adj()[e];
      if (!m.vert_ok[u] || !m.vert_ok[edge.to]) {
        m.edge_ok[e] = 0;
        continue;
      }
      const Vec3& a = verts[u];
      const Vec3& b = verts[edge.to];
      for (std::size_t k = 0; k < dyn.size(); ++k) {
        // Segment AABB vs inflated obstacle AABB prefilter.
        const auto& bx = boxes[k];
        if (std::max(a.x, b.x) < bx.first.x || std::min(a.x, b.x) > bx.second.x ||
            std::max(a.y, b.y) < bx.first.y || std::min(a.y, b.y) > bx.second.y ||
            std::max(a.z, b.z) < bx.first.z || std::min(a.z, b.z) > bx.second.z)
          continue;
        if (!dyn[k]->segment_clear(a, b, need, t)) {
          m.edge_ok[e] = 0;
          break;
        }
      }
    }
  }
  return m;
}

Roadmap attach_target(std::shared_ptr<const LatticeBase> base,
                      const SnapshotMasks& masks, const CollisionContext& ctx,
                      const Vec3& target, const RoadmapParams& prm) {
  if (!ctx.point_free(target))
    throw TargetBlockedError("target is not collision-free at the query radius");

  Roadmap rm;
  rm.base = base;
  rm.target = target;
  rm.params = prm;
  const auto& verts = base->verts();
  const std::uint32_t n = static_cast<std::uint32_t>(verts.size());
  rm.phi.assign(n + 1, kInf);
  rm.phi[n] = 0.0;

  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.push({0.0, n});

  std::vector<std::uint32_t> near;
  base->tree().radius_query(target, prm.connect_radius, near);
  std::vector<std::pair<std::uint32_t, double>> target_adj;
  for (std::uint32_t v : near) {
    if (!masks.trivial && !masks.vert_ok[v]) continue;
    if (!ctx.segment_free(target, verts[v])) continue;
    target_adj.emplace_back(v, target.dist(verts[v]));
  }

  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > rm.phi[u]) continue;
    if (u == n) {
      for (auto& [v, w] : target_adj) {
        if (d + w < rm.phi[v]) {
          rm.phi[v] = d + w;
          pq.push({rm.phi[v], v});
        }
      }
      continue;
    }
    for (std::uint32_t e = base->row()[u]; e < base->row()[u + 1]; ++e) {
      if (!masks.trivial && !masks.edge_ok[e]) continue;
      const auto& edge = base->adj()[e];
      double nd = d + edge.w;
      if (nd < rm.phi[edge.to]) {
        rm.phi[edge.to] = nd;
        pq.push({nd, edge.to});
      }
    }
  }
  return rm;
}

}  // namespace

std::vector<std::uint32_t> Roadmap::radius_neighbors(const Vec3& p, double r) const {
  std::vector<std::uint32_t> out;
  radius_neighbors_unsorted(p, r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void Roadmap::radius_neighbors_unsorted(const Vec3& p, double r,
                                        std::vector<std::uint32_t>& out) const {
  base->tree().radius_query(p, r, out);
  std::size_t keep = 0;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (std::isfinite(phi[out[i]])) out[keep++] = out[i];
  out.resize(keep);
  if (target.dist(p) <= r) out.push_back(target_index());
}

std::optional<Vec3> Roadmap::descent_direction(const Vec3& p) const {
  std::vector<std::uint32_t> nbr;
  radius_neighbors_unsorted(p, params.neighbor_radius, nbr);
  if (nbr.size() <= 1) return std::nullopt;
  double mean = 0.0;
  for (std::uint32_t v : nbr) mean += phi[v];
  mean /= static_cast<double>(nbr.size());
  Vec3 g{};
  for (std::uint32_t v : nbr) g += (phi[v] - mean) * (vertex(v) - p);
  if (g.norm() < 1e-9) return std::nullopt;
  return normalized(-g);
}

double Roadmap::cost_to_go(const Vec3& p) const {
  std::vector<std::uint32_t> nbr;
  radius_neighbors_unsorted(p, params.neighbor_radius, nbr);
  double best = kInf;
  for (std::uint32_t v : nbr) best = std::min(best, phi[v] + vertex(v).dist(p));
  return best;
}

std::optional<Vec3> Roadmap::preferred_direction(const Vec3& p) const {
  if (auto d = descent_direction(p)) return d;
  std::vector<std::uint32_t> nbr;
  radius_neighbors_unsorted(p, params.neighbor_radius, nbr);
  double best = kInf;
  std::optional<Vec3> best_v;
  for (std::uint32_t v : nbr) {
    Vec3 q = vertex(v);
    double d = q.dist(p);
    if (d <= 1e-12) continue;
    double c = phi[v] + d;
    if (c < best) {
      best = c;
      best_v = q;
    }
  }
  if (!best_v) return std::nullopt;
  return normalized(*best_v - p);
}

Roadmap build_roadmap(const Workspace& ws, const Vec3& target, double r_agent,
                      const RoadmapParams& prm, double t, double dyn_inflate) {
  OccupancyGrid grid(ws, std::min(prm.lattice_h * 0.25, 0.1), r_agent);
  auto base = std::make_shared<const LatticeBase>(ws, prm, r_agent, &grid);
  if (base->verts().empty())
    throw EmptyRoadmapError("no collision-free lattice vertex in workspace");
  SnapshotMasks masks = make_masks(ws, *base, r_agent, t, dyn_inflate);
  CollisionContext ctx{&ws, t, r_agent, dyn_inflate, &grid};
  return attach_target(base, masks, ctx, target, prm);
}

TeamRoadmaps::TeamRoadmaps(const Workspace& ws, RoadmapParams prm, double radius)
    : ws_(&ws),
      prm_(prm),
      radius_(radius),
      grid_(ws, std::min(prm.lattice_h * 0.25, 0.1), radius),
      base_(std::make_shared<const LatticeBase>(ws, prm, radius, &grid_)) {
  if (base_->verts().empty())
    throw EmptyRoadmapError("no collision-free lattice vertex in workspace");
}

std::vector<Roadmap> TeamRoadmaps::build(double t,
                                         const std::vector<Vec3>& targets) const {
  SnapshotMasks masks = make_masks(*ws_, *base_, radius_, t, ws_->dynamic_margin);
  CollisionContext ctx = context(t);
  std::vector<Roadmap> out;
  out.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    try {
      out.push_back(attach_target(base_, masks, ctx, targets[i], prm_));
    } catch (const TargetBlockedError&) {
      throw TargetBlockedError("target of agent " + std::to_string(i) +
                               " is not collision-free");
    }
  }
  return out;
}

}  // namespace lf
