#include "bronchopt/phantom.hpp"

#include <cmath>
#include <unordered_map>

#include "bronchopt/errors.hpp"

namespace bronchopt {

namespace {

Phantom make_cylinder(const PhantomParams& p) {
  if (p.radius <= 0.0 || p.length <= 0.0 || p.segments < 3) {
    throw InvalidParams("cylinder phantom: radius/length/segments out of range");
  }

  const int s = p.segments;
  const double z0 = p.origin.z();
  const double z1 = z0 + p.length;

  AirwayMesh mesh;
  mesh.vertices.reserve(2 * s + 2);
  for (int k = 0; k < s; ++k) {
    const double a = 2.0 * M_PI * k / s;
    mesh.vertices.emplace_back(p.origin.x() + p.radius * std::cos(a),
                               p.origin.y() + p.radius * std::sin(a), z0);
  }
  for (int k = 0; k < s; ++k) {
    const double a = 2.0 * M_PI * k / s;
    mesh.vertices.emplace_back(p.origin.x() + p.radius * std::cos(a),
                               p.origin.y() + p.radius * std::sin(a), z1);
  }
  const int cb = 2 * s;      // bottom cap center
  const int ct = 2 * s + 1;  // top cap center
  mesh.vertices.emplace_back(p.origin.x(), p.origin.y(), z0);
  mesh.vertices.emplace_back(p.origin.x(), p.origin.y(), z1);

  mesh.triangles.reserve(4 * s);
  for (int k = 0; k < s; ++k) {
    const int k1 = (k + 1) % s;
    // wall, outward normals
    mesh.triangles.emplace_back(k, k1, s + k1);
    mesh.triangles.emplace_back(k, s + k1, s + k);
    // caps
    mesh.triangles.emplace_back(cb, k1, k);
    mesh.triangles.emplace_back(ct, s + k, s + k1);
  }

  mesh.compute_normals();
  mesh.watertight = check_watertight(mesh);

  const double margin = std::min(p.inset, 0.45 * p.length);
  CenterlineBranch axis;
  axis.parent = -1;
  const int n_pts = std::max(2, static_cast<int>(p.length / 2.0));
  for (int i = 0; i <= n_pts; ++i) {
    const double z = z0 + margin + (p.length - 2.0 * margin) * i / n_pts;
    axis.points.emplace_back(p.origin.x(), p.origin.y(), z);
  }

  Phantom out;
  out.mesh = std::move(mesh);
  out.centerline.branches.push_back(std::move(axis));
  return out;
}

// ---------------------------------------------------------------------------
// Y-branch: marching tetrahedra over a union-of-capsules implicit function.
// The Kuhn 6-tet cube decomposition is face-compatible across the grid, so
// the extracted surface is closed and consistently oriented.
// ---------------------------------------------------------------------------

struct Capsule {
  Eigen::Vector3d a, b;
  double r;
};

double capsule_union_f(const Eigen::Vector3d& p,
                       const std::vector<Capsule>& caps) {
  double f = std::numeric_limits<double>::infinity();
  for (const auto& c : caps) {
    const Eigen::Vector3d d = c.b - c.a;
    const double h =
        std::clamp((p - c.a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    f = std::min(f, (p - (c.a + h * d)).norm() - c.r);
  }
  return f;
}

class MarchingTets {
 public:
  MarchingTets(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
               double voxel, const std::vector<Capsule>& caps)
      : lo_(lo), voxel_(voxel) {
    for (int a = 0; a < 3; ++a) {
      dims_[a] = static_cast<int>(std::ceil((hi[a] - lo[a]) / voxel)) + 1;
    }
    values_.resize(static_cast<size_t>(dims_[0]) * dims_[1] * dims_[2]);
    for (int k = 0; k < dims_[2]; ++k) {
      for (int j = 0; j < dims_[1]; ++j) {
        for (int i = 0; i < dims_[0]; ++i) {
          double f = capsule_union_f(grid_point(i, j, k), caps);
          if (std::abs(f) < 1e-9) f = 1e-9;  // keep vertices off grid points
          values_[gid(i, j, k)] = f;
        }
      }
    }
  }

  AirwayMesh extract() {
    // Corner order of the Kuhn decomposition: six axis-monotone paths from
    // corner 0 to corner 7.
    static const int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                    {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};
    for (int k = 0; k + 1 < dims_[2]; ++k) {
      for (int j = 0; j + 1 < dims_[1]; ++j) {
        for (int i = 0; i + 1 < dims_[0]; ++i) {
          int64_t corner_ids[8];
          for (int c = 0; c < 8; ++c) {
            corner_ids[c] = gid(i + (c & 1), j + ((c >> 1) & 1),
                                k + ((c >> 2) & 1));
          }
          for (const auto& tet : kTets) {
            emit_tet(corner_ids[tet[0]], corner_ids[tet[1]],
                     corner_ids[tet[2]], corner_ids[tet[3]]);
          }
        }
      }
    }

    mesh_.compute_normals();
    mesh_.watertight = check_watertight(mesh_);
    return std::move(mesh_);
  }

 private:
  int64_t gid(int i, int j, int k) const {
    return (static_cast<int64_t>(k) * dims_[1] + j) * dims_[0] + i;
  }

  Eigen::Vector3d grid_point(int i, int j, int k) const {
    return lo_ + voxel_ * Eigen::Vector3d(i, j, k);
  }

  Eigen::Vector3d point_of(int64_t g) const {
    const int i = static_cast<int>(g % dims_[0]);
    const int j = static_cast<int>((g / dims_[0]) % dims_[1]);
    const int k = static_cast<int>(g / (static_cast<int64_t>(dims_[0]) * dims_[1]));
    return grid_point(i, j, k);
  }

  int edge_vertex(int64_t ga, int64_t gb) {
    if (ga > gb) std::swap(ga, gb);
    const auto key = std::make_pair(ga, gb);
    auto it = edge_map_.find(key);
    if (it != edge_map_.end()) return it->second;

    const double fa = values_[ga];
    const double fb = values_[gb];
    const double w = fa / (fa - fb);
    const Eigen::Vector3d v =
        point_of(ga) + w * (point_of(gb) - point_of(ga));
    const int idx = static_cast<int>(mesh_.vertices.size());
    mesh_.vertices.push_back(v);
    edge_map_.emplace(key, idx);
    return idx;
  }

  void add_triangle(int a, int b, int c, const Eigen::Vector3d& outward) {
    const Eigen::Vector3d n =
        (mesh_.vertices[b] - mesh_.vertices[a])
            .cross(mesh_.vertices[c] - mesh_.vertices[a]);
    if (n.dot(outward) < 0.0) std::swap(b, c);
    mesh_.triangles.emplace_back(a, b, c);
  }

  // Quad orientation is decided once from the diagonal normal so both
  // triangles keep consistent winding even when the quad is skew.
  void add_quad(int a, int b, int c, int d, const Eigen::Vector3d& outward) {
    const Eigen::Vector3d n =
        (mesh_.vertices[c] - mesh_.vertices[a])
            .cross(mesh_.vertices[d] - mesh_.vertices[b]);
    if (n.dot(outward) < 0.0) {
      mesh_.triangles.emplace_back(a, c, b);
      mesh_.triangles.emplace_back(a, d, c);
    } else {
      mesh_.triangles.emplace_back(a, b, c);
      mesh_.triangles.emplace_back(a, c, d);
    }
  }

  void emit_tet(int64_t g0, int64_t g1, int64_t g2, int64_t g3) {
    const int64_t g[4] = {g0, g1, g2, g3};
    int inside[4], n_in = 0;
    int outside[4], n_out = 0;
    for (int c = 0; c < 4; ++c) {
      (values_[g[c]] < 0.0 ? inside[n_in++] : outside[n_out++]) = c;
    }
    if (n_in == 0 || n_out == 0) return;

    Eigen::Vector3d mean_in = Eigen::Vector3d::Zero();
    Eigen::Vector3d mean_out = Eigen::Vector3d::Zero();
    for (int c = 0; c < n_in; ++c) mean_in += point_of(g[inside[c]]);
    for (int c = 0; c < n_out; ++c) mean_out += point_of(g[outside[c]]);
    const Eigen::Vector3d outward = mean_out / n_out - mean_in / n_in;

    if (n_in == 1 || n_out == 1) {
      const int lone = n_in == 1 ? inside[0] : outside[0];
      const int others[3] = {(lone + 1) % 4, (lone + 2) % 4, (lone + 3) % 4};
      const int a = edge_vertex(g[lone], g[others[0]]);
      const int b = edge_vertex(g[lone], g[others[1]]);
      const int c = edge_vertex(g[lone], g[others[2]]);
      add_triangle(a, b, c, outward);
    } else {
      // two inside / two outside: quad split into two triangles
      const int i0 = inside[0], i1 = inside[1];
      const int o0 = outside[0], o1 = outside[1];
      const int a = edge_vertex(g[i0], g[o0]);
      const int b = edge_vertex(g[i0], g[o1]);
      const int c = edge_vertex(g[i1], g[o1]);
      const int d = edge_vertex(g[i1], g[o0]);
      add_quad(a, b, c, d, outward);
    }
  }

  struct PairHash {
    size_t operator()(const std::pair<int64_t, int64_t>& p) const {
      const uint64_t a = static_cast<uint64_t>(p.first) * 0x9E3779B97F4A7C15ull;
      return std::hash<uint64_t>()(a ^ static_cast<uint64_t>(p.second));
    }
  };

  Eigen::Vector3d lo_;
  double voxel_;
  int dims_[3];
  std::vector<double> values_;
  std::unordered_map<std::pair<int64_t, int64_t>, int, PairHash> edge_map_;
  AirwayMesh mesh_;
};

Phantom make_y_branch(const PhantomParams& p) {
  if (p.radius <= 0.0 || p.branch_radius <= 0.0 || p.trunk_length <= 0.0 ||
      p.branch_length <= 0.0 || p.voxel <= 0.0 ||
      p.branch_angle_deg <= 0.0 || p.branch_angle_deg >= 90.0) {
    throw InvalidParams("y_branch phantom: parameters out of range");
  }

  const double angle = p.branch_angle_deg * M_PI / 180.0;
  const Eigen::Vector3d trunk_start = p.origin;
  const Eigen::Vector3d junction =
      trunk_start + Eigen::Vector3d(0, 0, p.trunk_length);
  const Eigen::Vector3d dir_l(-std::sin(angle), 0.0, std::cos(angle));
  const Eigen::Vector3d dir_r(std::sin(angle), 0.0, std::cos(angle));
  const Eigen::Vector3d tip_l = junction + p.branch_length * dir_l;
  const Eigen::Vector3d tip_r = junction + p.branch_length * dir_r;

  const std::vector<Capsule> caps = {
      {trunk_start, junction, p.radius},
      {junction, tip_l, p.branch_radius},
      {junction, tip_r, p.branch_radius},
  };

  Eigen::AlignedBox3d box;
  for (const auto& c : caps) {
    box.extend(c.a);
    box.extend(c.b);
  }
  const double pad = p.radius + 3.0 * p.voxel;
  const Eigen::Vector3d lo = box.min() - Eigen::Vector3d::Constant(pad);
  const Eigen::Vector3d hi = box.max() + Eigen::Vector3d::Constant(pad);

  MarchingTets mt(lo, hi, p.voxel, caps);

  Phantom out;
  out.mesh = mt.extract();

  auto polyline = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    CenterlineBranch br;
    const int n = std::max(2, static_cast<int>((b - a).norm() / 2.0));
    for (int i = 0; i <= n; ++i) {
      br.points.push_back(a + (b - a) * (static_cast<double>(i) / n));
    }
    return br;
  };

  CenterlineBranch trunk = polyline(trunk_start, junction);
  trunk.parent = -1;
  CenterlineBranch left = polyline(junction, tip_l);
  left.parent = 0;
  CenterlineBranch right = polyline(junction, tip_r);
  right.parent = 0;
  out.centerline.branches = {std::move(trunk), std::move(left),
                             std::move(right)};
  return out;
}

}  // namespace

Phantom make_phantom(const std::string& kind, const PhantomParams& params) {
  if (kind == "cylinder") return make_cylinder(params);
  if (kind == "y_branch") return make_y_branch(params);
  throw InvalidParams("unknown phantom kind: " + kind);
}

}  // namespace bronchopt
