#pragma once

#include <Eigen/Geometry>
#include <limits>
#include <vector>

#include "bronchopt/mesh.hpp"

namespace bronchopt {

/// Axis-aligned bounding-box tree over mesh triangles, max 4 triangles per
/// leaf. Holds flattened copies of the triangle data; the source mesh may be
/// discarded after construction. Immutable and safe to query concurrently.
class Bvh {
 public:
  struct Hit {
    double t = std::numeric_limits<double>::infinity();
    int triangle = -1;  // index into the original mesh triangle list
    bool valid() const { return triangle >= 0; }
  };

  struct Closest {
    double dist2 = std::numeric_limits<double>::infinity();
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    int triangle = -1;
  };

  explicit Bvh(const AirwayMesh& mesh);

  /// Nearest hit along origin + t*dir with t in (t_min, t_max). Front and
  /// back faces both count.
  Hit intersect(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                double t_min = 1e-9,
                double t_max = std::numeric_limits<double>::infinity()) const;

  /// Number of surface crossings along the ray; used for parity-based
  /// inside/outside classification.
  int count_intersections(const Eigen::Vector3d& origin,
                          const Eigen::Vector3d& dir) const;

  Closest closest_point(const Eigen::Vector3d& p) const;

  size_t triangle_count() const { return v0_.size(); }
  const Eigen::AlignedBox3d& bounds() const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;   // internal: child node indices
    int right = -1;
    int start = 0;   // leaf: range into order_
    int count = 0;
    bool is_leaf() const { return count > 0; }
  };

  int build(std::vector<int>& items, int begin, int end,
            const std::vector<Eigen::Vector3d>& centroids);

  std::vector<Node> nodes_;
  std::vector<int> order_;                // leaf ranges index this
  std::vector<Eigen::Vector3d> v0_, e1_, e2_, v1_, v2_;  // per original tri
};

}  // namespace bronchopt
