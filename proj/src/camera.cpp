#include "nvs/camera.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "nvs/errors.hpp"

namespace nvs {

Intrinsics::Intrinsics(double fx, double fy, double cx, double cy)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy) {
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
      !std::isfinite(cy)) {
    throw InvalidArgumentError("intrinsics must be finite");
  }
  if (fx <= 0.0 || fy <= 0.0) {
    throw InvalidArgumentError("focal lengths must be positive");
  }
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d K;
  K << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
  return K;
}

Intrinsics Intrinsics::shifted(double dx, double dy) const {
  return Intrinsics(fx_, fy_, cx_ - dx, cy_ - dy);
}

Pose::Pose()
    : rotation_(Eigen::Matrix3d::Identity()),
      translation_(Eigen::Vector3d::Zero()) {}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidArgumentError("pose entries must be finite");
  }
  const double err = OrthonormalityError(rotation);
  if (!(err <= kOrthonormalTolerance)) {
    std::ostringstream msg;
    msg << "rotation is not orthonormal (error " << err << ")";
    throw InvalidArgumentError(msg.str());
  }
}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation,
           Unchecked)
    : rotation_(rotation), translation_(translation) {}

Pose Pose::FromApproximate(const Eigen::Matrix3d& rotation,
                           const Eigen::Vector3d& translation, bool* repaired) {
  if (repaired != nullptr) *repaired = false;
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw FormatError("pose entries must be finite");
  }
  const double err = OrthonormalityError(rotation);
  if (err <= kOrthonormalTolerance) return Pose(rotation, translation);
  if (!(err <= kParseTolerance)) {
    std::ostringstream msg;
    msg << "rotation deviates from SO(3) by " << err;
    throw FormatError(msg.str());
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d nearest = svd.matrixU() * svd.matrixV().transpose();
  if (nearest.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    nearest = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  if (repaired != nullptr) *repaired = true;
  return Pose(nearest, translation);
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

double Pose::OrthonormalityError(const Eigen::Matrix3d& rotation) {
  const double gram =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  return std::max(gram, std::abs(rotation.determinant() - 1.0));
}

Point3 backproject(const PixelCoord& p, double depth, const Intrinsics& K) {
  if (!std::isfinite(depth) || depth <= 0.0) {
    throw InvalidDepthError("backproject requires a positive finite depth");
  }
  return Point3((p.u - K.cx()) * depth / K.fx(), (p.v - K.cy()) * depth / K.fy(),
                depth);
}

PixelCoord project(const Point3& P, const Intrinsics& K) {
  if (!(P.z() > 0.0)) {
    throw BehindCameraError("point is not in front of the camera");
  }
  return {K.fx() * P.x() / P.z() + K.cx(), K.fy() * P.y() / P.z() + K.cy()};
}

Point3 transform_point(const Point3& P, const Pose& T) {
  return T.rotation() * P + T.translation();
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation_ * b.rotation_,
              a.rotation_ * b.translation_ + a.translation_, Pose::Unchecked{});
}

Pose invert(const Pose& pose) {
  const Eigen::Matrix3d rt = pose.rotation_.transpose();
  return Pose(rt, -(rt * pose.translation_), Pose::Unchecked{});
}

PointSet transform_latent(const PointSet& points, const Pose& T) {
  if (points.rows() == 0) {
    throw InvalidArgumentError("latent point set must have at least one row");
  }
  PointSet out(points.rows(), 3);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = transform_point(points.row(i).transpose(), T).transpose();
  }
  return out;
}

Pose rotation_about(const Eigen::Vector3d& axis, double radians,
                    const Eigen::Vector3d& translation) {
  if (!(axis.norm() > 0.0)) {
    throw InvalidArgumentError("rotation axis must be nonzero");
  }
  return Pose(Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix(),
              translation);
}

}  // namespace nvs
