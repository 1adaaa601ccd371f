#include "bronchopt/intersect.hpp"

#include <cmath>

namespace bronchopt {

bool intersect_triangle(const Eigen::Vector3d& origin,
                        const Eigen::Vector3d& dir, const Eigen::Vector3d& v0,
                        const Eigen::Vector3d& e1, const Eigen::Vector3d& e2,
                        double t_min, double t_max, double& t_out) {
  const Eigen::Vector3d pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return false;

  const double inv_det = 1.0 / det;
  const Eigen::Vector3d tvec = origin - v0;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return false;

  const Eigen::Vector3d qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return false;

  const double t = e2.dot(qvec) * inv_det;
  if (t <= t_min || t >= t_max) return false;

  t_out = t;
  return true;
}

double point_triangle_dist2(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                            const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                            Eigen::Vector3d& closest) {
  // Ericson, "Real-Time Collision Detection", closest point on triangle.
  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d ap = p - a;

  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    closest = a;
    return (p - a).squaredNorm();
  }

  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    closest = b;
    return (p - b).squaredNorm();
  }

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double w = d1 / (d1 - d3);
    closest = a + w * ab;
    return (p - closest).squaredNorm();
  }

  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    closest = c;
    return (p - c).squaredNorm();
  }

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    closest = a + w * ac;
    return (p - closest).squaredNorm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    closest = b + w * (c - b);
    return (p - closest).squaredNorm();
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  closest = a + v * ab + w * ac;
  return (p - closest).squaredNorm();
}

}  // namespace bronchopt
