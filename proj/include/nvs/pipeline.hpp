#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nvs/dataset.hpp"
#include "nvs/fusion.hpp"
#include "nvs/metrics.hpp"
#include "nvs/warping.hpp"

namespace nvs {

// Which depth drives the inverse warp.
//   kTarget  ground-truth target depth (mask from forward-warping the source)
//   kSource  forward-warped source depth (sparse)
enum class DepthSource { kTarget, kSource };

// Region over which evaluate computes L1.
enum class EvalRegion { kFull, kSparseMask, kDenseMask };

std::string_view to_string(DepthSource s);
DepthSource parse_depth_source(std::string_view name);
std::string_view to_string(EvalRegion r);
EvalRegion parse_eval_region(std::string_view name);

struct RunConfig {
  DatasetProfile profile = DatasetProfile::kPiv3cams;
  std::vector<std::filesystem::path> scenes;
  std::filesystem::path output = "nvs_out";
  DepthSource depth_source = DepthSource::kTarget;
  std::optional<FusionRule> fusion;
  int densify_radius = 1;
  int crop = 0;  // 0 keeps the full frame
  std::uint64_t seed = 0;
  int max_distance = 3;
  std::size_t pair_count = 0;  // 0 enumerates every pair within max_distance
  SsimParams ssim;
  EvalRegion eval_region = EvalRegion::kFull;
  // Pixel-branch predictions: <pixel_dir>/<scene>/<target stem>.png
  std::optional<std::filesystem::path> pixel_dir;
  // Predicted fusion masks: <mask_dir>/<scene>/<target stem>.png
  std::optional<std::filesystem::path> mask_dir;
  // Without pixel_dir, a box blur of the target (this radius) stands in for
  // the pixel branch. 0 disables the stand-in.
  int pixel_blur = 0;

  // Throws InvalidArgumentError on out-of-range fields or missing inputs.
  void validate() const;
};

struct PairOutcome {
  std::string scene_id;
  std::size_t src_index = 0;
  std::size_t tgt_index = 0;
  std::string src_name;
  std::string tgt_name;
  int frame_distance = 0;
  bool ok = false;
  bool skipped = false;  // soft failure (e.g. no ground truth); not a hard error
  std::string message;

  // warp outputs, relative to RunConfig::output
  std::string warped_path;
  std::string sparse_mask_path;
  std::string dense_mask_path;
  std::string depth_path;
  std::string fused_path;
  std::size_t sparse_count = 0;
  std::size_t dense_count = 0;

  // evaluate outputs
  double l1 = 0.0;
  double ssim = 0.0;
};

struct RunReport {
  std::vector<PairOutcome> pairs;

  std::size_t hard_failures() const;
};

// Result of running the warp pipeline on one loaded pair.
struct PairProducts {
  Image warped;
  DepthMap warped_depth;  // forward-warped source depth (sparse)
  VisibilityMask sparse_mask;
  VisibilityMask dense_mask;
  VisibilityMask warp_mask;  // inverse-warp validity
};

PairProducts run_pair(const FramePair& pair, DepthSource source, int densify_radius);

// Writes <output>/<scene>/<src>_<tgt>/{warped,mask_sparse,mask_dense,
// depth_warped}.png (+ fused.png when fusing) and <output>/manifest.csv.
// Per-pair failures are recorded and the run continues.
RunReport cmd_warp(const RunConfig& config);

// Writes metrics.csv (one row per pair), summary.csv (means) and
// distance_curve.csv (mean L1/SSIM per signed frame distance) in <output>.
RunReport cmd_evaluate(const RunConfig& config);

// Renders a scene config's trajectory into <output> using the piv3cams
// layout: left/NNNNNN.png, depth/NNNNNN.png, pose.txt, calib.txt.
void cmd_synth(const std::filesystem::path& scene_config,
               const std::filesystem::path& output);

// Closes a binary mask PNG.
void cmd_densify(const std::filesystem::path& in, const std::filesystem::path& out,
                 int radius);

}  // namespace nvs
