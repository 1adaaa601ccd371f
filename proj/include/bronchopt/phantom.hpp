#pragma once

#include <string>

#include "bronchopt/centerline.hpp"
#include "bronchopt/mesh.hpp"

namespace bronchopt {

/// Desk-scale stand-ins for CT airway meshes: a straight tube and a Y-shaped
/// bifurcation, both watertight with analytic centerlines.
struct PhantomParams {
  double radius = 8.0;        // trunk radius [mm]
  double length = 100.0;      // cylinder length [mm]
  int segments = 64;          // cylinder tessellation around the circumference
  double trunk_length = 60.0;     // y_branch trunk [mm]
  double branch_length = 50.0;    // y_branch children [mm]
  double branch_radius = 6.0;     // y_branch child radius [mm]
  double branch_angle_deg = 35.0; // half-opening of each child from the trunk axis
  double voxel = 0.8;             // y_branch surface extraction resolution [mm]
  Eigen::Vector3d origin = Eigen::Vector3d(0.0, 0.0, 20.0);
  double inset = 3.0;  // centerline margin from flat end caps [mm]
};

struct Phantom {
  AirwayMesh mesh;
  Centerline centerline;
};

/// kind is "cylinder" or "y_branch". Throws InvalidParams on nonsense
/// dimensions or an unknown kind.
Phantom make_phantom(const std::string& kind, const PhantomParams& params = {});

}  // namespace bronchopt
