#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <filesystem>
#include <vector>

namespace bronchopt {

/// Triangle mesh of the airway wall [mm]. `watertight` records whether the
/// mesh is a closed, consistently oriented 2-manifold; signed-distance sign
/// queries require it.
struct AirwayMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Eigen::Vector3i> triangles;
  std::vector<Eigen::Vector3d> normals;  // per-triangle, unit length
  bool watertight = false;

  Eigen::AlignedBox3d bounds() const;
  void compute_normals();

  /// Merges duplicate vertices (1e-6 mm tolerance), drops degenerate
  /// triangles, recomputes normals and the watertight flag.
  void finalize();
};

/// Loads STL (binary or ASCII) or OBJ, selected by file content/extension.
/// Throws ParseError on malformed input and EmptyMesh when no triangles
/// survive cleaning.
AirwayMesh load_mesh(const std::filesystem::path& path);

void save_stl(const AirwayMesh& mesh, const std::filesystem::path& path);

/// Closed orientable 2-manifold test: every undirected edge is shared by
/// exactly two triangles and every directed edge appears exactly once.
bool check_watertight(const AirwayMesh& mesh);

}  // namespace bronchopt
