#include "bronchopt/se3.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "bronchopt/errors.hpp"

namespace bronchopt {

namespace {

constexpr double kSmallAngle = 1e-8;

// Rodrigues coefficients A = sin(t)/t, B = (1-cos(t))/t^2, C = (t-sin(t))/t^3
// with Taylor fallbacks below the small-angle threshold.
struct RotCoeffs {
  double a, b, c;
};

RotCoeffs rodrigues_coeffs(double theta) {
  RotCoeffs k{};
  const double t2 = theta * theta;
  if (theta < kSmallAngle) {
    k.a = 1.0 - t2 / 6.0;
    k.b = 0.5 - t2 / 24.0;
    k.c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    k.a = s / theta;
    k.b = (1.0 - c) / t2;
    k.c = (theta - s) / (t2 * theta);
  }
  return k;
}

}  // namespace

bool Pose::is_rigid(double tol) const {
  const Eigen::Matrix3d err =
      rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol &&
         translation.allFinite();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return s;
}

Pose exp_map(const TangentVector& xi) {
  const double theta = xi.phi.norm();
  const RotCoeffs k = rodrigues_coeffs(theta);
  const Eigen::Matrix3d K = skew(xi.phi);
  const Eigen::Matrix3d K2 = K * K;

  Pose T;
  T.rotation = Eigen::Matrix3d::Identity() + k.a * K + k.b * K2;
  const Eigen::Matrix3d V = Eigen::Matrix3d::Identity() + k.b * K + k.c * K2;
  T.translation = V * xi.rho;
  return T;
}

TangentVector log_map(const Pose& T) {
  const Eigen::Matrix3d& R = T.rotation;
  // atan2 form: well conditioned for all angles away from pi.
  const Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                          R(1, 0) - R(0, 1));
  const double s = 0.5 * w.norm();                          // sin(theta)
  const double c = 0.5 * (R.trace() - 1.0);                 // cos(theta)
  const double theta = std::atan2(s, std::clamp(c, -1.0, 1.0));

  if (theta > M_PI - 1e-6) {
    throw AmbiguousLog("log_map: rotation angle at pi, axis is ambiguous");
  }

  Eigen::Vector3d phi;
  if (theta < kSmallAngle) {
    phi = 0.5 * w * (1.0 + theta * theta / 6.0);
  } else {
    phi = w * (theta / (2.0 * std::sin(theta)));
  }

  // V^-1 = I - K/2 + c2 * K^2
  const double t2 = theta * theta;
  double c2;
  if (theta < kSmallAngle) {
    c2 = 1.0 / 12.0 + t2 / 720.0;
  } else {
    const RotCoeffs k = rodrigues_coeffs(theta);
    c2 = (1.0 - k.a / (2.0 * k.b)) / t2;
  }
  const Eigen::Matrix3d K = skew(phi);
  const Eigen::Matrix3d Vinv =
      Eigen::Matrix3d::Identity() - 0.5 * K + c2 * (K * K);

  return TangentVector(Vinv * T.translation, phi);
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
}

Pose inverse(const Pose& a) {
  const Eigen::Matrix3d Rt = a.rotation.transpose();
  return Pose(Rt, -(Rt * a.translation));
}

Pose orthonormalized(const Pose& a) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      a.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Eigen::Matrix3d U = svd.matrixU();
    U.col(2) *= -1.0;
    R = U * svd.matrixV().transpose();
  }
  return Pose(R, a.translation);
}

double rotation_angle(const Eigen::Matrix3d& R) {
  const Eigen::Vector3d w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                          R(1, 0) - R(0, 1));
  const double s = 0.5 * w.norm();
  const double c = 0.5 * (R.trace() - 1.0);
  return std::atan2(s, std::clamp(c, -1.0, 1.0));
}

double geodesic_distance(const Eigen::Matrix3d& Ra, const Eigen::Matrix3d& Rb) {
  return rotation_angle(Ra.transpose() * Rb);
}

}  // namespace bronchopt
