#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvs/camera.hpp"
#include "nvs/raster.hpp"

namespace nvs {

// On-disk conventions. See docs/formats.md for the exact layouts.
//
//   kPiv3cams  depth PNG unit 1 mm, pose translation in mm,
//              frames in left/, depth in depth/, pose.txt, calib.txt
//   kKitti     depth PNG unit 1/256 m, pose translation in m,
//              frames in image_2/, depth in depth/, poses.txt, calib.txt
enum class DatasetProfile { kPiv3cams, kKitti };

std::string_view to_string(DatasetProfile profile);
DatasetProfile parse_profile(std::string_view name);

// Millimeters per stored depth unit.
double depth_unit_mm(DatasetProfile profile);
// Millimeters per pose-file translation unit.
double translation_unit_mm(DatasetProfile profile);

// 16-bit single-channel PNG; stored value 0 stays 0 (missing).
DepthMap load_depth_png(const std::filesystem::path& path, DatasetProfile profile);
// Quantizes to the profile unit (round half away from zero). Throws
// FormatError if a depth does not fit in 16 bits.
void save_depth_png(const DepthMap& depth, const std::filesystem::path& path,
                    DatasetProfile profile);

// 8-bit (or 16-bit) gray/RGB/RGBA images, normalized to [0,1]. Alpha is
// dropped; color comes back as RGB.
Image load_image(const std::filesystem::path& path);
// Writes 8-bit PNG (or JPEG by extension), value round(v * 255).
void save_image(const Image& img, const std::filesystem::path& path);

// Masks are 8-bit gray PNGs; 0 -> 0, 255 -> 1.
Mask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const Mask& mask, const std::filesystem::path& path);

// Pose text: one frame per line, 12 whitespace-separated values holding the
// row-major 3x4 matrix [R | t]. Blank lines and lines starting with '#' are
// skipped. Rotations off by more than 1e-9 but within 1e-6 are projected onto
// SO(3) and noted in *warnings.
std::vector<Pose> parse_poses(std::istream& in, DatasetProfile profile,
                              std::vector<std::string>* warnings = nullptr);
std::vector<Pose> load_pose_file(const std::filesystem::path& path,
                                 DatasetProfile profile,
                                 std::vector<std::string>* warnings = nullptr);
// Full round-trip precision (17 significant digits).
std::string format_pose_line(const Pose& pose, DatasetProfile profile);
void save_pose_file(const std::filesystem::path& path, const std::vector<Pose>& poses,
                    DatasetProfile profile);

// Calibration text. Accepted lines:
//   K: fx fy cx cy
//   K: k00 k01 k02 k10 k11 k12 k20 k21 k22   (skew k01 must be 0)
//   P2: <12 values>                           (KITTI profile only)
// Other keys are ignored. Throws FormatError on a missing or invalid K.
Intrinsics parse_calib(std::istream& in, DatasetProfile profile);
Intrinsics load_calib_file(const std::filesystem::path& path, DatasetProfile profile);
void save_calib_file(const std::filesystem::path& path, const Intrinsics& K);

struct FrameRecord {
  std::filesystem::path image;
  std::filesystem::path depth;  // empty when the frame has no depth file
  Pose pose;                    // camera-to-world
};

struct SceneIndex {
  std::string scene_id;
  std::filesystem::path root;
  DatasetProfile profile = DatasetProfile::kPiv3cams;
  Intrinsics K{1.0, 1.0, 0.0, 0.0};
  std::vector<FrameRecord> frames;
  std::vector<std::string> warnings;

  std::size_t size() const { return frames.size(); }
};

// Indexes a scene directory. Throws FormatError when the image and pose
// counts disagree or no frames are found, IoError when files are missing.
SceneIndex load_scene(const std::filesystem::path& root, DatasetProfile profile);

template <typename Grid>
struct Cropped {
  Grid grid;
  Intrinsics K;
  CropWindow window;
};

// Center crop at offset (floor((W-side)/2), floor((H-side)/2)); the principal
// point shifts by the same offset. Throws ShapeError if the input is smaller.
Cropped<Image> center_crop(const Image& img, int side, const Intrinsics& K);
Cropped<DepthMap> center_crop(const DepthMap& depth, int side, const Intrinsics& K);

// Ordered frame indices; frame_distance = tgt_index - src_index (signed).
struct PairRef {
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;
  int frame_distance = 0;

  bool operator==(const PairRef&) const = default;
};

// `count` pairs with |distance| in [1, max_distance]. The signed distance is
// drawn uniformly, then the source uniformly among frames that admit it.
// Deterministic for a given seed. Throws InvalidArgumentError when the scene
// has no more than max_distance frames.
std::vector<PairRef> sample_pairs(const SceneIndex& scene, int max_distance,
                                  std::size_t count, std::uint64_t seed);

// Every ordered pair within max_distance, source-major, distances ascending.
std::vector<PairRef> enumerate_pairs(const SceneIndex& scene, int max_distance);

struct FrameView {
  Image image;
  std::optional<DepthMap> depth;
  Pose pose;  // camera-to-world
};

// relative_pose = invert(src.pose) ∘ tgt.pose: the target camera expressed in
// the source frame. As a point map it takes target-camera coordinates into
// source-camera coordinates (the pose inverse_warp expects).
struct FramePair {
  FrameView src;
  FrameView tgt;
  Pose relative_pose;
  int frame_distance = 0;
  Intrinsics K{1.0, 1.0, 0.0, 0.0};
  std::string scene_id;
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;

  const Pose& tgt_to_src() const { return relative_pose; }
  Pose src_to_tgt() const { return invert(relative_pose); }
};

Pose relative_pose(const Pose& world_from_src, const Pose& world_from_tgt);

// Loads both frames, optionally center-cropping them (intrinsics adjusted).
// A missing source depth throws IoError; a missing target depth is allowed.
FramePair load_pair(const SceneIndex& scene, const PairRef& ref,
                    std::optional<int> crop_side = std::nullopt);

}  // namespace nvs
