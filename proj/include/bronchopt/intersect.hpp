#pragma once

#include <Eigen/Core>

namespace bronchopt {

/// Moller-Trumbore ray/triangle test in double precision, double-sided, with
/// inclusive edge comparisons so rays through shared edges report hits on
/// both incident triangles with identical t. Returns true and fills `t_out`
/// when the hit parameter lies in (t_min, t_max).
bool intersect_triangle(const Eigen::Vector3d& origin,
                        const Eigen::Vector3d& dir, const Eigen::Vector3d& v0,
                        const Eigen::Vector3d& e1, const Eigen::Vector3d& e2,
                        double t_min, double t_max, double& t_out);

/// Squared distance from p to triangle (a, b, c); writes the closest point.
double point_triangle_dist2(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                            const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                            Eigen::Vector3d& closest);

}  // namespace bronchopt
