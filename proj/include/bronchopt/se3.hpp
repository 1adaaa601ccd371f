#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace bronchopt {

/// Element of se(3): translational part rho [mm], rotational part phi [rad].
struct TangentVector {
  Eigen::Vector3d rho = Eigen::Vector3d::Zero();
  Eigen::Vector3d phi = Eigen::Vector3d::Zero();

  TangentVector() = default;
  TangentVector(const Eigen::Vector3d& rho_in, const Eigen::Vector3d& phi_in)
      : rho(rho_in), phi(phi_in) {}

  Eigen::Matrix<double, 6, 1> vector() const {
    Eigen::Matrix<double, 6, 1> v;
    v << rho, phi;
    return v;
  }

  static TangentVector from_vector(const Eigen::Matrix<double, 6, 1>& v) {
    return TangentVector(v.head<3>(), v.tail<3>());
  }

  double norm() const { return vector().norm(); }
};

/// Rigid transform on SE(3). When used as a camera pose it maps camera-frame
/// points to world-frame points; `translation` is the camera center in world
/// coordinates [mm]. Camera frame convention: +z forward, +x right, +y down.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Pose() = default;
  Pose(const Eigen::Matrix3d& R, const Eigen::Vector3d& t)
      : rotation(R), translation(t) {}

  static Pose identity() { return Pose(); }

  static Pose from_quaternion(const Eigen::Quaterniond& q,
                              const Eigen::Vector3d& t) {
    return Pose(q.normalized().toRotationMatrix(), t);
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  Eigen::Vector3d camera_center() const { return translation; }

  Eigen::Matrix<double, 3, 4> matrix34() const {
    Eigen::Matrix<double, 3, 4> m;
    m.leftCols<3>() = rotation;
    m.col(3) = translation;
    return m;
  }

  /// Rotation orthonormality and determinant check.
  bool is_rigid(double tol = 1e-9) const;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Closed-form SE(3) exponential (Rodrigues rotation + V-matrix coupling).
/// Numerically stable through a Taylor branch below ||phi|| < 1e-8.
Pose exp_map(const TangentVector& xi);

/// Inverse of exp_map. Throws AmbiguousLog when the rotation angle is at pi,
/// where the axis is not unique.
TangentVector log_map(const Pose& T);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& a);

/// Projects the rotation back onto SO(3) via polar decomposition. Used to
/// contain drift after long composition chains.
Pose orthonormalized(const Pose& a);

/// Angle of a rotation matrix in [0, pi].
double rotation_angle(const Eigen::Matrix3d& R);

/// Geodesic distance ||log(Ra^T Rb)|| on SO(3).
double geodesic_distance(const Eigen::Matrix3d& Ra, const Eigen::Matrix3d& Rb);

}  // namespace bronchopt
