#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "nvs/camera.hpp"
#include "nvs/dataset.hpp"
#include "nvs/raster.hpp"

namespace nvs::synth {

// Two-color checkerboard; period in millimeters along the surface.
struct Checker {
  double period = 100.0;
  Eigen::Vector3d color_a{0.9, 0.85, 0.2};
  Eigen::Vector3d color_b{0.1, 0.25, 0.6};
};

struct Plane {
  Eigen::Vector3d point{0.0, 0.0, 2000.0};
  Eigen::Vector3d normal{0.0, 0.0, -1.0};
  Checker texture;
};

struct Sphere {
  Eigen::Vector3d center{0.0, 0.0, 2000.0};
  double radius = 500.0;
  Checker texture;
};

using Primitive = std::variant<Plane, Sphere>;

// A set of textured primitives in world coordinates (mm, y down, z forward).
// The nearest hit along each ray is rendered; hits farther than far_mm count
// as misses so every rendered depth fits a 16-bit millimeter PNG.
class AnalyticScene {
 public:
  // Throws InvalidArgumentError on zero normals, non-positive radius or
  // period, colors outside [0,1], or an empty object list.
  explicit AnalyticScene(std::vector<Primitive> objects, double far_mm = 60000.0);

  const std::vector<Primitive>& objects() const { return objects_; }
  double far_mm() const { return far_mm_; }

  struct Hit {
    double depth;  // camera-frame z, mm
    Eigen::Vector3d color;
  };

  // Casts the ray through pixel (u, v) of a camera with pose world_from_camera.
  std::optional<Hit> trace(const PixelCoord& p, const Pose& world_from_camera,
                           const Intrinsics& K) const;

 private:
  std::vector<Primitive> objects_;
  double far_mm_;
};

struct RenderResult {
  Image image;     // RGB; 0 where nothing is hit
  DepthMap depth;  // exact ray depth in mm; 0 where nothing is hit
};

// Ray casts through every integer pixel center.
RenderResult render(const AnalyticScene& scene, const Pose& world_from_camera,
                    const Intrinsics& K, int width, int height);

// Renders both views (target depth included) and sets
// relative_pose = invert(pose_src) ∘ pose_tgt.
FramePair make_pair(const AnalyticScene& scene, const Pose& pose_src,
                    const Pose& pose_tgt, const Intrinsics& K, int width, int height,
                    int frame_distance = 1);

// Camera path: pose_i = start ∘ step^i, plus optional seeded translation
// jitter (uniform in [-jitter_mm, jitter_mm] per axis).
struct Trajectory {
  int frames = 20;
  Pose start;
  Pose step;
  double jitter_mm = 0.0;
  std::uint64_t seed = 0;

  std::vector<Pose> poses() const;
};

// A scene plus camera and trajectory, as read from a JSON scene file.
struct SceneConfig {
  int width = 256;
  int height = 256;
  Intrinsics K{256.0, 256.0, 127.5, 127.5};
  AnalyticScene scene{{Plane{}}};
  Trajectory trajectory;
};

// Rotation from XYZ Euler angles in degrees, applied x first: R = Rz Ry Rx.
Eigen::Matrix3d rotation_from_euler_deg(const Eigen::Vector3d& xyz_deg);

// Parses the JSON schema documented in docs/formats.md. Throws FormatError.
SceneConfig parse_scene_config(const std::string& json_text);
SceneConfig load_scene_config(const std::filesystem::path& path);

// Stand-in for a pixel-branch prediction: the image box-blurred with the
// given radius. Keeps coarse structure and drops fine texture.
Image blur_standin(const Image& img, int radius);

}  // namespace nvs::synth
