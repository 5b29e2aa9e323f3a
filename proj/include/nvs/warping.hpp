#pragma once

#include <span>
#include <vector>

#include "nvs/camera.hpp"
#include "nvs/raster.hpp"

namespace nvs {

// Bilinear sampling with zero contribution from pixels outside the image:
//   out_c = sum_{x,y} I_c(x,y) * max(0, 1-|x-u|) * max(0, 1-|y-v|).
// A coordinate whose footprint misses the image yields zeros.
// `out` must hold img.channels() values.
void bilinear_sample(const Image& img, const PixelCoord& at, std::span<double> out);
std::vector<double> bilinear_sample(const Image& img, const PixelCoord& at);

// True when the 2x2 sampling footprint of `at` overlaps the image, i.e.
// -1 < u < width and -1 < v < height.
bool footprint_intersects(const Image& img, const PixelCoord& at);

struct SampleGradient {
  std::vector<double> value;
  std::vector<double> d_du;
  std::vector<double> d_dv;
};

// Value and spatial derivative of bilinear_sample. At integer coordinates the
// derivative is the right-hand one.
SampleGradient bilinear_sample_gradient(const Image& img, const PixelCoord& at);

struct WarpResult {
  Image image;
  VisibilityMask mask;
};

// For each target pixel with depth > 0: back-project, map into the source
// camera with `tgt_to_src`, project and sample the source bilinearly. The mask
// is 1 where the depth is valid, the mapped point lies in front of the source
// camera and the sample footprint meets the source image; color is 0 elsewhere.
// Throws ShapeError when src and tgt_depth differ in extent.
WarpResult inverse_warp(const Image& src, const DepthMap& tgt_depth,
                        const Pose& tgt_to_src, const Intrinsics& K);

struct DepthWarpResult {
  DepthMap depth;
  VisibilityMask mask;
};

// Splats every valid source depth into the target view at the nearest integer
// pixel. Collisions keep the smallest target z; on equal z the first source
// pixel in row-major order wins. Output has the source extent and is sparse.
DepthWarpResult forward_warp_depth(const DepthMap& src_depth,
                                   const Pose& src_to_tgt, const Intrinsics& K);

struct SourceWarpResult {
  Image image;
  DepthMap depth;
  VisibilityMask mask;
};

// forward_warp_depth followed by inverse_warp with the inverted pose. The
// returned mask is the forward-warp visibility mask.
SourceWarpResult warp_from_source_depth(const Image& src, const DepthMap& src_depth,
                                        const Pose& src_to_tgt,
                                        const Intrinsics& K);

// Binary closing (dilate, then erode) with a (2r+1)^2 square element.
// Pixels outside the grid are ignored by both passes, so the result always
// contains the input. Throws InvalidArgumentError on non-binary input or r < 0.
VisibilityMask densify_mask(const VisibilityMask& mask, int radius = 1);

}  // namespace nvs
