#include "bronchopt/bvh.hpp"

#include <algorithm>
#include <numeric>

#include "bronchopt/errors.hpp"
#include "bronchopt/intersect.hpp"

namespace bronchopt {

namespace {

constexpr int kMaxLeafSize = 4;

// Slab test returning the entry parameter; inf when the ray misses the box.
double box_entry(const Eigen::AlignedBox3d& box, const Eigen::Vector3d& origin,
                 const Eigen::Vector3d& inv_dir, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double lo = (box.min()[a] - origin[a]) * inv_dir[a];
    double hi = (box.max()[a] - origin[a]) * inv_dir[a];
    if (inv_dir[a] < 0.0) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

double box_dist2(const Eigen::AlignedBox3d& box, const Eigen::Vector3d& p) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = std::max({box.min()[a] - p[a], 0.0, p[a] - box.max()[a]});
    d2 += d * d;
  }
  return d2;
}

}  // namespace

Bvh::Bvh(const AirwayMesh& mesh) {
  const size_t n = mesh.triangles.size();
  if (n == 0) throw EmptyMesh("Bvh: mesh has no triangles");

  v0_.resize(n);
  v1_.resize(n);
  v2_.resize(n);
  e1_.resize(n);
  e2_.resize(n);
  std::vector<Eigen::Vector3d> centroids(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& t = mesh.triangles[i];
    v0_[i] = mesh.vertices[t[0]];
    v1_[i] = mesh.vertices[t[1]];
    v2_[i] = mesh.vertices[t[2]];
    e1_[i] = v1_[i] - v0_[i];
    e2_[i] = v2_[i] - v0_[i];
    centroids[i] = (v0_[i] + v1_[i] + v2_[i]) / 3.0;
  }

  std::vector<int> items(n);
  std::iota(items.begin(), items.end(), 0);
  nodes_.reserve(2 * n);
  build(items, 0, static_cast<int>(n), centroids);
}

int Bvh::build(std::vector<int>& items, int begin, int end,
               const std::vector<Eigen::Vector3d>& centroids) {
  const int node_index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  Eigen::AlignedBox3d box;
  for (int i = begin; i < end; ++i) {
    const int t = items[i];
    box.extend(v0_[t]);
    box.extend(v1_[t]);
    box.extend(v2_[t]);
  }
  nodes_[node_index].box = box;

  const int count = end - begin;
  if (count <= kMaxLeafSize) {
    nodes_[node_index].start = static_cast<int>(order_.size());
    nodes_[node_index].count = count;
    for (int i = begin; i < end; ++i) order_.push_back(items[i]);
    return node_index;
  }

  Eigen::AlignedBox3d cbox;
  for (int i = begin; i < end; ++i) cbox.extend(centroids[items[i]]);
  int axis = 0;
  cbox.sizes().maxCoeff(&axis);

  const int mid = begin + count / 2;
  // Full sort with an index tie-break keeps the tree deterministic.
  std::sort(items.begin() + begin, items.begin() + end, [&](int a, int b) {
    const double ca = centroids[a][axis];
    const double cb = centroids[b][axis];
    return ca != cb ? ca < cb : a < b;
  });

  const int left = build(items, begin, mid, centroids);
  const int right = build(items, mid, end, centroids);
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

const Eigen::AlignedBox3d& Bvh::bounds() const { return nodes_[0].box; }

Bvh::Hit Bvh::intersect(const Eigen::Vector3d& origin,
                        const Eigen::Vector3d& dir, double t_min,
                        double t_max) const {
  const Eigen::Vector3d inv_dir = dir.cwiseInverse();
  Hit best;
  best.t = t_max;

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_entry(node.box, origin, inv_dir, best.t) >
        best.t) {
      continue;
    }
    if (node.is_leaf()) {
      for (int i = node.start; i < node.start + node.count; ++i) {
        const int tri = order_[i];
        double t;
        if (intersect_triangle(origin, dir, v0_[tri], e1_[tri], e2_[tri],
                               t_min, best.t, t)) {
          best.t = t;
          best.triangle = tri;
        }
      }
    } else {
      // Near child first so the far subtree can be pruned against best.t.
      const double tl = box_entry(nodes_[node.left].box, origin, inv_dir, best.t);
      const double tr = box_entry(nodes_[node.right].box, origin, inv_dir, best.t);
      if (tl < tr) {
        if (std::isfinite(tr)) stack[top++] = node.right;
        if (std::isfinite(tl)) stack[top++] = node.left;
      } else {
        if (std::isfinite(tl)) stack[top++] = node.left;
        if (std::isfinite(tr)) stack[top++] = node.right;
      }
    }
  }

  if (!best.valid()) best.t = std::numeric_limits<double>::infinity();
  return best;
}

int Bvh::count_intersections(const Eigen::Vector3d& origin,
                             const Eigen::Vector3d& dir) const {
  const Eigen::Vector3d inv_dir = dir.cwiseInverse();
  const double inf = std::numeric_limits<double>::infinity();
  int crossings = 0;

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!std::isfinite(box_entry(node.box, origin, inv_dir, inf))) continue;
    if (node.is_leaf()) {
      for (int i = node.start; i < node.start + node.count; ++i) {
        const int tri = order_[i];
        double t;
        if (intersect_triangle(origin, dir, v0_[tri], e1_[tri], e2_[tri], 1e-9,
                               inf, t)) {
          ++crossings;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return crossings;
}

Bvh::Closest Bvh::closest_point(const Eigen::Vector3d& p) const {
  Closest best;

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_dist2(node.box, p) > best.dist2) continue;
    if (node.is_leaf()) {
      for (int i = node.start; i < node.start + node.count; ++i) {
        const int tri = order_[i];
        Eigen::Vector3d cp;
        const double d2 = point_triangle_dist2(p, v0_[tri], v1_[tri], v2_[tri], cp);
        if (d2 < best.dist2) {
          best.dist2 = d2;
          best.point = cp;
          best.triangle = tri;
        }
      }
    } else {
      const double dl = box_dist2(nodes_[node.left].box, p);
      const double dr = box_dist2(nodes_[node.right].box, p);
      // Nearer child last so it is popped first.
      if (dl < dr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }
  return best;
}

}  // namespace bronchopt
