#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nvs {

// 3D point in camera or world coordinates, millimeters.
// Frames are right-handed, x right, y down, z forward.
using Point3 = Eigen::Vector3d;

// n x 3 set of points, one per row.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

// Continuous pixel coordinate. Integer values address pixel centers.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

// Pinhole intrinsics without skew.
class Intrinsics {
 public:
  // Throws InvalidArgumentError unless fx, fy > 0 and all values finite.
  Intrinsics(double fx, double fy, double cx, double cy);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }

  Eigen::Matrix3d matrix() const;

  // Principal point moved by (-dx, -dy); used after cropping.
  Intrinsics shifted(double dx, double dy) const;

  bool operator==(const Intrinsics&) const = default;

 private:
  double fx_, fy_, cx_, cy_;
};

// Rigid transform acting on points as p -> R p + t. Translation in mm.
class Pose {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;
  // Parsed matrices further than this from SO(3) are rejected outright.
  static constexpr double kParseTolerance = 1e-6;

  Pose();  // identity

  // Throws InvalidArgumentError if the rotation is not orthonormal with
  // det +1 within kOrthonormalTolerance, or any entry is non-finite.
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  // For matrices read from text. Within kOrthonormalTolerance the rotation is
  // used as is; within kParseTolerance it is replaced by the nearest rotation
  // (SVD projection) and *repaired is set; beyond that it throws FormatError.
  static Pose FromApproximate(const Eigen::Matrix3d& rotation,
                              const Eigen::Vector3d& translation,
                              bool* repaired = nullptr);

  static Pose Identity() { return Pose(); }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  // 4x4 homogeneous form.
  Eigen::Matrix4d matrix() const;

  // Largest entry of |R^T R - I| and |det R - 1|.
  static double OrthonormalityError(const Eigen::Matrix3d& rotation);

 private:
  struct Unchecked {};
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation,
       Unchecked);

  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;

  friend Pose compose(const Pose& a, const Pose& b);
  friend Pose invert(const Pose& pose);
};

// Back-projects pixel p at depth (mm) to a camera-frame point whose z equals
// depth exactly. Throws InvalidDepthError for non-positive or non-finite depth.
Point3 backproject(const PixelCoord& p, double depth, const Intrinsics& K);

// Throws BehindCameraError when P.z <= 0.
PixelCoord project(const Point3& P, const Intrinsics& K);

Point3 transform_point(const Point3& P, const Pose& T);

// Returns a∘b: applying the result equals applying b, then a.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& pose);

// Applies T to every row of an n x 3 point set (latent-vector transform).
PointSet transform_latent(const PointSet& points, const Pose& T);

// Rotation of `radians` about a unit axis (right-handed).
Pose rotation_about(const Eigen::Vector3d& axis, double radians,
                    const Eigen::Vector3d& translation = Eigen::Vector3d::Zero());

}  // namespace nvs
